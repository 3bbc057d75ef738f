"""64-bit FNV-1a, the one hash used for features and seed derivation.

Hand-rolled on purpose: feature indices must be identical across
platforms and Python versions, which rules out ``hash()``.
"""

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a_64(data: bytes) -> int:
    """Hash ``data`` to an unsigned 64-bit integer."""
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def fnv1a_64_text(text: str) -> int:
    return fnv1a_64(text.encode("utf-8"))

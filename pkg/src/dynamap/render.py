"""Data maps: variability (x) against confidence (y), colored by correctness.

Pure string assembly, no plotting dependency; identical dynamics give
byte-identical SVG. Axes are fixed to the metric bounds (x 0..0.5,
y 0..1) so maps from different runs line up.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .dynamics import TrainingDynamics
from .errors import RenderError

#: Diverging ramp endpoints for the auto palette: low correctness red,
#: midpoint pale yellow, high correctness blue.
_RAMP = ((0xD7, 0x30, 0x27), (0xFF, 0xFF, 0xBF), (0x45, 0x75, 0xB4))


def _lerp_channel(a: int, b: int, t: float) -> int:
    return round(a + (b - a) * t)


def _ramp_color(t: float) -> str:
    if t <= 0.5:
        lo, hi, u = _RAMP[0], _RAMP[1], 2.0 * t
    else:
        lo, hi, u = _RAMP[1], _RAMP[2], 2.0 * t - 1.0
    r, g, b = (_lerp_channel(lo[i], hi[i], u) for i in range(3))
    return f"#{r:02x}{g:02x}{b:02x}"


def correctness_palette(levels: int) -> tuple[str, ...]:
    """``levels`` colors spanning the ramp; levels == epochs + 1."""
    if levels < 1:
        raise RenderError("palette needs at least one level")
    if levels == 1:
        return (_ramp_color(1.0),)
    return tuple(_ramp_color(k / (levels - 1)) for k in range(levels))


@dataclass(frozen=True)
class MapStyle:
    """Canvas geometry and coloring. Margins are (top, right, bottom,
    left); the right margin hosts the legend. ``palette`` may be left
    None to derive epochs + 1 colors from the built-in ramp."""

    width_px: int = 800
    height_px: int = 600
    point_radius_px: float = 1.5
    palette: tuple[str, ...] | None = None
    margins: tuple[int, int, int, int] = (40, 180, 60, 70)

    def __post_init__(self):
        if self.width_px <= 0 or self.height_px <= 0:
            raise RenderError("canvas dimensions must be positive")
        if self.point_radius_px <= 0:
            raise RenderError("point radius must be positive")
        if len(self.margins) != 4 or any(m < 0 for m in self.margins):
            raise RenderError("margins must be four nonnegative values")


DEFAULT_STYLE = MapStyle()

_X_MAX = 0.5  # variability is bounded by the std of values in [0, 1]
_TICK = 0.1


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def _px(value: float) -> str:
    return format(value, ".2f")


def render_map(dynamics: Sequence[TrainingDynamics], style: MapStyle = DEFAULT_STYLE) -> bytes:
    """Render a data map as a standalone SVG 1.1 document.

    Every sample becomes one circle at the affine image of
    (variability, confidence) in the plot rectangle, filled by
    palette[round(correctness * epochs)]. Empty input still yields the
    axes and legend.
    """
    epoch_counts = {d.epochs for d in dynamics}
    if len(epoch_counts) > 1:
        raise RenderError(f"mixed epoch counts {sorted(epoch_counts)}: one map per run")

    if epoch_counts:
        epochs = epoch_counts.pop()
    elif style.palette is not None:
        epochs = len(style.palette) - 1
    else:
        epochs = 6
    palette = style.palette if style.palette is not None else correctness_palette(epochs + 1)
    if len(palette) != epochs + 1:
        raise RenderError(f"palette has {len(palette)} colors, need epochs + 1 = {epochs + 1}")

    top, right, bottom, left = style.margins
    plot_w = style.width_px - left - right
    plot_h = style.height_px - top - bottom
    if plot_w <= 0 or plot_h <= 0:
        raise RenderError("margins leave no plot area")
    x0, y0 = float(left), float(top)

    def to_x(variability: float) -> float:
        return x0 + (variability / _X_MAX) * plot_w

    def to_y(confidence: float) -> float:
        return y0 + (1.0 - confidence) * plot_h

    out: list[str] = []
    out.append('<?xml version="1.0" encoding="UTF-8"?>')
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{style.width_px}" height="{style.height_px}" '
        f'viewBox="0 0 {style.width_px} {style.height_px}">'
    )
    out.append(f'<rect x="0" y="0" width="{style.width_px}" height="{style.height_px}" fill="#ffffff"/>')

    # Gridlines and ticks at 0.1 intervals on both axes.
    x_ticks = [i * _TICK for i in range(int(_X_MAX / _TICK) + 1)]
    y_ticks = [i * _TICK for i in range(11)]
    for value in x_ticks:
        x = to_x(value)
        out.append(
            f'<line x1="{_px(x)}" y1="{_px(y0)}" x2="{_px(x)}" y2="{_px(y0 + plot_h)}" '
            f'stroke="#e0e0e0" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_px(x)}" y="{_px(y0 + plot_h + 18)}" text-anchor="middle" '
            f'font-size="12" font-family="sans-serif">{value:.1f}</text>'
        )
    for value in y_ticks:
        y = to_y(value)
        out.append(
            f'<line x1="{_px(x0)}" y1="{_px(y)}" x2="{_px(x0 + plot_w)}" y2="{_px(y)}" '
            f'stroke="#e0e0e0" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_px(x0 - 8)}" y="{_px(y + 4)}" text-anchor="end" '
            f'font-size="12" font-family="sans-serif">{value:.1f}</text>'
        )

    # Axes frame and labels.
    out.append(
        f'<rect x="{_px(x0)}" y="{_px(y0)}" width="{_px(plot_w)}" height="{_px(plot_h)}" '
        f'fill="none" stroke="#000000" stroke-width="1"/>'
    )
    out.append(
        f'<text x="{_px(x0 + plot_w / 2)}" y="{_px(y0 + plot_h + 40)}" text-anchor="middle" '
        f'font-size="14" font-family="sans-serif">variability</text>'
    )
    y_label_x = x0 - 44
    y_label_y = y0 + plot_h / 2
    out.append(
        f'<text x="{_px(y_label_x)}" y="{_px(y_label_y)}" text-anchor="middle" '
        f'font-size="14" font-family="sans-serif" '
        f'transform="rotate(-90 {_px(y_label_x)} {_px(y_label_y)})">confidence</text>'
    )

    # Sample points.
    radius = format(style.point_radius_px, ".2f")
    for d in dynamics:
        level = min(max(round(d.correctness * epochs), 0), epochs)
        out.append(
            f'<circle cx="{_px(to_x(d.variability))}" cy="{_px(to_y(d.confidence))}" '
            f'r="{radius}" fill="{palette[level]}"/>'
        )

    # Legend: one swatch per correctness level.
    legend_x = x0 + plot_w + 24
    out.append(
        f'<text x="{_px(legend_x)}" y="{_px(y0 + 4)}" font-size="13" '
        f'font-family="sans-serif">correctness</text>'
    )
    for level in range(epochs, -1, -1):
        slot = epochs - level
        y = y0 + 16 + slot * 20
        out.append(
            f'<rect x="{_px(legend_x)}" y="{_px(y)}" width="14" height="14" '
            f'fill="{palette[level]}" stroke="#808080" stroke-width="0.5"/>'
        )
        out.append(
            f'<text x="{_px(legend_x + 20)}" y="{_px(y + 11)}" font-size="12" '
            f'font-family="sans-serif">{_escape(f"{level}/{epochs}")}</text>'
        )

    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")

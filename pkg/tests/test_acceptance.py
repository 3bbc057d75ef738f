"""Acceptance suite: one test per release criterion, each printing a
PASS line (run with ``pytest tests/test_acceptance.py -v -s`` to watch
them stream).

The experiment-level criteria run on the built-in synthetic corpus at
the same desk scale the toolkit targets; the 20k run asserts the
qualitative orderings the subset comparison is supposed to reproduce.
"""

import hashlib
import math
import random
import time
import xml.etree.ElementTree as ET
from fractions import Fraction

import numpy as np
import pytest
from scipy import sparse

from dynamap.dataset import LABEL_INDEX, Label, parse_tsv, write_tsv
from dynamap.dynamics import compute_dynamics
from dynamap.experiment import ExperimentConfig, emit_table, run_experiment
from dynamap.ingest import ingest, record_to_line
from dynamap.render import MapStyle, render_map
from dynamap.subsets import RECIPE_NAMES
from dynamap.synth import SplitPlan, build_split, write_corpus
from dynamap.trainer import (
    EpochRecord,
    ModelParams,
    TrainConfig,
    argmax_label,
    load_checkpoint,
    loss_and_grads,
    save_checkpoint,
    train,
)

from helpers import series_records


def _pass(message: str) -> None:
    print(f"ACCEPTANCE PASS: {message}")


# --- criterion 1: dynamics oracle equivalence ----------------------------

def test_dynamics_oracle_equivalence_200_sets():
    rng = random.Random(1702)
    started = time.perf_counter()
    checked = 0
    for _ in range(200):
        epochs = rng.randint(2, 8)
        n_guids = rng.randint(1, 50)
        records = []
        for g in range(n_guids):
            gold = list(Label)[rng.randrange(3)]
            for e in range(epochs):
                raw = [rng.random() + 1e-9 for _ in range(3)]
                total = sum(raw)
                probs = tuple(p / total for p in raw)
                records.append(EpochRecord(guid=f"g{g:03d}", epoch=e, probs=probs,
                                           predicted=argmax_label(probs), gold=gold))
        result = {d.guid: d for d in compute_dynamics(records)}

        per_guid = {}
        for r in records:
            per_guid.setdefault(r.guid, []).append(r)
        for guid, series in per_guid.items():
            series.sort(key=lambda r: r.epoch)
            gi = LABEL_INDEX[series[0].gold]
            gold_probs = [r.probs[gi] for r in series]
            mean = sum(Fraction(p) for p in gold_probs) / epochs
            var = sum((Fraction(p) - mean) ** 2 for p in gold_probs) / epochs
            correct = sum(1 for r in series if r.predicted is r.gold)
            d = result[guid]
            assert abs(d.confidence - float(mean)) <= 1e-12
            assert abs(d.variability - math.sqrt(float(var))) <= 1e-12
            assert d.correctness == correct / epochs
            checked += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"oracle equivalence took {elapsed:.2f}s"
    _pass(f"dynamics oracle equivalence: {checked} series across 200 record sets "
          f"within 1e-12 in {elapsed:.2f}s")


# --- criterion 2: trivial-law suite --------------------------------------

def test_trivial_law_suite():
    [constant] = compute_dynamics(series_records("g", Label.NEUTRAL, [0.5, 0.5]))
    assert constant.confidence == 0.5 and constant.variability == 0.0

    [extreme] = compute_dynamics(series_records("g", Label.ENTAILMENT, [0.0, 1.0]))
    assert extreme.confidence == 0.5 and extreme.variability == 0.5

    all_correct = series_records("g", Label.CONTRADICTION, [0.9, 0.8, 0.7])
    [d] = compute_dynamics(all_correct)
    assert d.correctness == 1.0
    _pass("trivial laws: constant series, [0,1] series, all-correct series exact")


# --- criterion 3: gradient check ------------------------------------------

def test_gradient_check_random_instances():
    started = time.perf_counter()
    rng = np.random.default_rng(31)
    l2 = 0.01
    step = 1e-5
    for _ in range(3):
        x = sparse.csr_matrix(rng.random((6, 5)) * (rng.random((6, 5)) > 0.3))
        y = rng.integers(0, 3, size=6)
        weights_t = rng.normal(size=(5, 3)) * 0.5
        bias = rng.normal(size=3) * 0.2
        _, grad_w, grad_b = loss_and_grads(weights_t, bias, x, y, l2)

        def loss_at(wt, b):
            return loss_and_grads(wt, b, x, y, l2)[0]

        for i in range(5):
            for j in range(3):
                up, down = weights_t.copy(), weights_t.copy()
                up[i, j] += step
                down[i, j] -= step
                fd = (loss_at(up, bias) - loss_at(down, bias)) / (2 * step)
                assert abs(grad_w[i, j] - fd) <= 1e-4 * max(abs(grad_w[i, j]), abs(fd), 1e-8)
        for j in range(3):
            up, down = bias.copy(), bias.copy()
            up[j] += step
            down[j] -= step
            fd = (loss_at(weights_t, up) - loss_at(weights_t, down)) / (2 * step)
            assert abs(grad_b[j] - fd) <= 1e-4 * max(abs(grad_b[j]), abs(fd), 1e-8)
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"gradient check took {elapsed:.2f}s"
    _pass(f"gradient check: analytic vs central differences within 1e-4 in {elapsed:.2f}s")


# --- criteria 4 and 5: determinism and subset laws on a 2k run ------------

def _tree_digest(root) -> dict:
    digest = {}
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        digest[str(path.relative_to(root))] = hashlib.sha256(path.read_bytes()).hexdigest()
    return digest


@pytest.fixture(scope="module")
def desk_run(tmp_path_factory):
    base = tmp_path_factory.mktemp("desk2k")
    paths = write_corpus(base / "corpus", 2000, 500, 500, seed=7)
    trainer = TrainConfig(hash_dim=2**15, seed=3)

    def config(out):
        return ExperimentConfig(
            train_path=paths["train"], dev_path=paths["dev"], test_path=paths["test"],
            out_dir=base / out, trainer=trainer, subset_seed=11,
        )

    started = time.perf_counter()
    table = run_experiment(config("run-a"))
    run_experiment(config("run-b"))
    elapsed = time.perf_counter() - started
    return base, paths, table, elapsed


def test_full_experiment_determinism(desk_run):
    base, _, _, elapsed = desk_run
    tree_a = _tree_digest(base / "run-a")
    tree_b = _tree_digest(base / "run-b")
    assert tree_a, "first run produced no artifacts"
    assert tree_a == tree_b
    assert elapsed < 120.0, f"two 2k runs took {elapsed:.1f}s"
    assert {"dynamics.tsv", "datamap.svg", "results.tsv", "results.md",
            "preliminary/epoch_log.jsonl", "preliminary/model.ckpt"} <= set(tree_a)
    _pass(f"determinism: two 2,000-sample experiment runs byte-identical "
          f"({len(tree_a)} files) in {elapsed:.1f}s total")


def test_subset_laws_on_the_same_run(desk_run):
    base, paths, table, _ = desk_run
    out = base / "run-a"
    n = 2000
    expected_sizes = {
        "full-shuffled": n,
        "random-33": n // 3, "easy-33": n // 3, "hard-33": n // 3,
        "ambiguous-33": n // 3,
        "easy+hard": 2 * (n // 6), "easy+ambiguous": 2 * (n // 6),
        "hard+ambiguous": 2 * (n // 6),
        "easy+hard+ambiguous": 3 * (n // 9),
    }
    train_guids = set(parse_tsv((paths["train"]).read_bytes()).split.guids())
    for name in RECIPE_NAMES:
        subset = parse_tsv((out / "subsets" / name / "train.tsv").read_bytes()).split
        assert len(subset) == expected_sizes[name], name

        manifest_lines = (out / "subsets" / name / "manifest.tsv").read_text().strip().split("\n")
        entries = [line.split("\t") for line in manifest_lines[1:]]
        guids = [e[0] for e in entries]
        assert len(guids) == len(set(guids)), f"{name}: guid claimed twice"
        assert set(guids) == set(subset.guids())
        assert set(guids) <= train_guids
    sizes_in_table = {r.subset_name: r.train_size for r in table.rows[1:]}
    assert sizes_in_table == expected_sizes
    _pass("subset laws: sizes floor-exact, provenance disjoint, guids within train")


# --- criterion 6: qualitative orderings at 20k -----------------------------

def test_qualitative_orderings_at_20k(tmp_path_factory):
    base = tmp_path_factory.mktemp("desk20k")
    started = time.perf_counter()
    paths = write_corpus(base / "corpus", 26000, 4000, 4000, seed=7)
    config = ExperimentConfig(
        train_path=paths["train"], dev_path=paths["dev"], test_path=paths["test"],
        out_dir=base / "out", trainer=TrainConfig(hash_dim=2**17, seed=3),
        subset_seed=11, desk_scale_cap=20000,
    )
    table = run_experiment(config)
    elapsed = time.perf_counter() - started
    print()
    print(emit_table(table, "tsv").decode("utf-8"))

    ids = {r.subset_name: r.id_accuracy for r in table.rows[1:]}
    tests_acc = {r.subset_name: r.test_accuracy for r in table.rows[1:]}
    margin = 0.01

    easy = ids["easy-33"]
    best_other = max(v for k, v in ids.items() if k != "easy-33")
    assert easy >= best_other + margin, (
        f"(a) easy-33 ID {easy:.4f} not highest by {margin} (next {best_other:.4f})")

    hard = ids["hard-33"]
    lowest_other = min(v for k, v in ids.items() if k != "hard-33")
    assert hard <= lowest_other - margin, (
        f"(b) hard-33 ID {hard:.4f} not lowest by {margin} (next {lowest_other:.4f})")

    # (c) is a soft expectation: measured and reported either way.
    c_holds = tests_acc["hard+ambiguous"] <= tests_acc["easy+ambiguous"] - margin
    verdict = "holds" if c_holds else "DOES NOT HOLD"
    print(f"(c) hard+ambiguous test {tests_acc['hard+ambiguous']:.4f} vs "
          f"easy+ambiguous test {tests_acc['easy+ambiguous']:.4f}: {verdict}")

    assert elapsed < 900.0, f"20k experiment took {elapsed:.1f}s"
    _pass(f"qualitative orderings at 20k: (a) easy-33 highest ID ({easy:.4f}), "
          f"(b) hard-33 lowest ID ({hard:.4f}), (c) {verdict}, {elapsed:.0f}s")


# --- criterion 7: round trips ---------------------------------------------

def test_round_trips(tmp_path):
    # dataset TSV identity on a 100-row fixture
    split = build_split(SplitPlan("train", 100, "fixture", 33, 20), seed=12)
    assert parse_tsv(write_tsv(split)).split == split

    # checkpoint save/load bit-identity
    records = []
    model = train(split, TrainConfig(epochs=2, hash_dim=2**12, seed=8), records.append)
    first = tmp_path / "model.ckpt"
    again = tmp_path / "model2.ckpt"
    save_checkpoint(model, first)
    loaded = load_checkpoint(first)
    save_checkpoint(loaded, again)
    assert first.read_bytes() == again.read_bytes()
    assert np.array_equal(loaded.weights, model.weights)
    assert np.array_equal(loaded.bias, model.bias)

    # trainer log -> ingest -> dynamics parity within 1e-9
    direct = compute_dynamics(records)
    reloaded, _ = ingest("\n".join(record_to_line(r) for r in records))
    via_log = compute_dynamics(reloaded)
    for a, b in zip(direct, via_log):
        assert a.guid == b.guid
        assert abs(a.confidence - b.confidence) <= 1e-9
        assert abs(a.variability - b.variability) <= 1e-9
        assert abs(a.correctness - b.correctness) <= 1e-9
    _pass("round trips: 100-row TSV identity, checkpoint bit-identity, "
          "log-ingest dynamics parity within 1e-9")


# --- criterion 8: renderer properties --------------------------------------

def test_renderer_properties():
    style = MapStyle(width_px=800, height_px=600, margins=(50, 50, 50, 50))
    dynamics = compute_dynamics(
        [r for g in range(20)
         for r in series_records(f"g{g:02d}", Label.NEUTRAL,
                                 [(g + e) % 7 / 10 for e in range(6)])]
    )

    svg = render_map(dynamics, style)
    assert svg == render_map(dynamics, style)

    root = ET.fromstring(svg.decode("utf-8"))
    assert root.tag == "{http://www.w3.org/2000/svg}svg"
    assert root.get("version") == "1.1"

    empty = ET.fromstring(render_map([], style).decode("utf-8"))
    assert not empty.findall(".//{http://www.w3.org/2000/svg}circle")

    corner = render_map(compute_dynamics(
        series_records("g", Label.NEUTRAL, [1.0, 1.0])), style)
    [circle] = ET.fromstring(corner.decode("utf-8")).findall(
        ".//{http://www.w3.org/2000/svg}circle")
    assert (circle.get("cx"), circle.get("cy")) == ("50.00", "50.00")

    from dynamap.dynamics import TrainingDynamics

    midpoint = render_map([TrainingDynamics(guid="g", confidence=0.5, variability=0.25,
                                            correctness=0.5, epochs=2)], style)
    [circle] = ET.fromstring(midpoint.decode("utf-8")).findall(
        ".//{http://www.w3.org/2000/svg}circle")
    assert (circle.get("cx"), circle.get("cy")) == ("400.00", "300.00")
    _pass("renderer: byte determinism, SVG 1.1 well-formedness, corner and "
          "midpoint placements exact")

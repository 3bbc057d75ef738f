import math

import numpy as np
import pytest
from scipy import sparse

from dynamap.dataset import Label
from dynamap.errors import ConfigError, DataError, TrainingError
from dynamap.trainer import (
    EpochRecord,
    FeatureVector,
    ModelParams,
    TrainConfig,
    argmax_label,
    evaluate,
    feature_terms,
    featurize,
    featurize_split,
    load_checkpoint,
    loss_and_grads,
    predict_probs,
    save_checkpoint,
    tokenize,
    train,
)

from helpers import make_sample, make_split, separable_split


# --- featurizer ---------------------------------------------------------

def test_terms_for_two_token_premise_single_token_hypothesis():
    sample = make_sample("0", s1="a b", s2="c")
    assert feature_terms(sample) == ["p1:a", "p1:b", "p2:a_b", "h1:c", "x:a|c", "x:b|c"]


def test_tokenize_lowercases_and_splits_punctuation():
    assert tokenize("Three black dogs, on grass!") == ["three", "black", "dogs", "on", "grass"]
    assert tokenize("don't stop") == ["don", "t", "stop"]
    assert tokenize("  ") == []


def test_featurize_deterministic():
    a = make_sample("0", s1="A man is running.", s2="A person is running.")
    b = make_sample("1", s1="A man is running.", s2="A person is running.")
    assert featurize(a, 2**10) == featurize(b, 2**10)


def test_featurize_empty_sentences_give_empty_vector():
    sample = make_sample("0", s1="...", s2="!!!")
    fv = featurize(sample, 2**10)
    assert fv.indices == () and fv.values == ()


def test_featurize_merges_duplicate_terms_by_summing():
    sample = make_sample("0", s1="dog dog", s2="cat")
    fv = featurize(sample, 2**18)
    # p1:dog appears twice; with a roomy hash space nothing else collides
    assert 2.0 in fv.values
    assert list(fv.indices) == sorted(fv.indices)


def test_cross_cap_limits_pair_terms():
    many = " ".join(f"w{i}" for i in range(40))
    sample = make_sample("0", s1=many, s2=many)
    capped = feature_terms(sample, cross_cap=30)
    assert sum(1 for t in capped if t.startswith("x:")) == 30 * 30
    uncapped = feature_terms(sample, cross_cap=40)
    assert sum(1 for t in uncapped if t.startswith("x:")) == 40 * 40


def test_feature_vector_invariants_enforced():
    with pytest.raises(DataError):
        FeatureVector(indices=(3, 3), values=(1.0, 1.0))
    with pytest.raises(DataError):
        FeatureVector(indices=(1,), values=(1.0, 2.0))


# --- prediction ---------------------------------------------------------

def zero_model(dim: int = 16) -> ModelParams:
    return ModelParams(weights=np.zeros((3, dim)), bias=np.zeros(3))


def test_zero_model_predicts_thirds_exactly():
    fv = FeatureVector(indices=(1, 5), values=(2.0, 1.0))
    probs = predict_probs(zero_model(), fv)
    assert probs.tolist() == [1 / 3, 1 / 3, 1 / 3]


def test_large_bias_saturates_first_label():
    model = ModelParams(weights=np.zeros((3, 4)), bias=np.array([50.0, 0.0, 0.0]))
    probs = predict_probs(model, FeatureVector(indices=(), values=()))
    assert probs[0] > 1 - 1e-9
    assert abs(probs.sum() - 1.0) <= 1e-9


def test_predict_matches_independent_softmax():
    rng = np.random.default_rng(5)
    model = ModelParams(weights=rng.normal(size=(3, 8)) * 0.3, bias=rng.normal(size=3) * 0.1)
    fv = FeatureVector(indices=(0, 3, 7), values=(1.0, 2.0, 1.0))
    probs = predict_probs(model, fv)

    # oracle: direct exp/normalize with plain math
    scores = []
    for row in range(3):
        s = model.bias[row]
        for idx, val in zip(fv.indices, fv.values):
            s += model.weights[row, idx] * val
        scores.append(s)
    m = max(scores)
    exps = [math.exp(s - m) for s in scores]
    total = sum(exps)
    for got, want in zip(probs, [e / total for e in exps]):
        assert got == pytest.approx(want, abs=1e-12)


def test_argmax_tie_breaks_in_label_order():
    assert argmax_label((0.4, 0.4, 0.2)) is Label.ENTAILMENT
    assert argmax_label((0.2, 0.4, 0.4)) is Label.CONTRADICTION
    assert argmax_label((0.5, 0.2, 0.3)) is Label.ENTAILMENT


# --- training -----------------------------------------------------------

def test_single_epoch_emits_one_record_per_sample():
    split = make_split([make_sample(str(i)) for i in range(3)])
    records = []
    train(split, TrainConfig(epochs=1, hash_dim=16, seed=1), records.append)
    assert len(records) == 3
    assert all(r.epoch == 0 for r in records)
    assert [r.guid for r in records] == ["0", "1", "2"]


def test_separable_toy_reaches_full_accuracy():
    split = separable_split()
    config = TrainConfig(epochs=20, hash_dim=2**10, seed=0)
    model = train(split, config, lambda r: None)
    assert evaluate(model, split) == 1.0


def test_same_seed_gives_identical_records_and_params():
    split = separable_split()
    config = TrainConfig(epochs=3, hash_dim=2**10, seed=11)
    r1, r2 = [], []
    m1 = train(split, config, r1.append)
    m2 = train(split, config, r2.append)
    assert r1 == r2
    assert np.array_equal(m1.weights, m2.weights)
    assert np.array_equal(m1.bias, m2.bias)


def test_different_seed_changes_training():
    # batches smaller than the split, so batch composition depends on the seed
    split = separable_split()
    m1 = train(split, TrainConfig(epochs=3, hash_dim=2**10, seed=1, batch_size=4), lambda r: None)
    m2 = train(split, TrainConfig(epochs=3, hash_dim=2**10, seed=2, batch_size=4), lambda r: None)
    assert not np.array_equal(m1.weights, m2.weights)


def test_record_completeness_every_guid_epoch_once():
    split = make_split([make_sample(str(i)) for i in range(5)])
    records = []
    train(split, TrainConfig(epochs=4, hash_dim=32, seed=2), records.append)
    assert len(records) == 20
    assert len({(r.guid, r.epoch) for r in records}) == 20


def test_epoch_mean_loss_non_increasing_on_separable_toy():
    split = separable_split()
    records = []
    train(split, TrainConfig(epochs=5, learning_rate=0.01, hash_dim=2**10, seed=0),
          records.append)
    by_epoch = {}
    for r in records:
        gold_p = r.probs[list(Label).index(r.gold)]
        by_epoch.setdefault(r.epoch, []).append(-math.log(gold_p))
    losses = [sum(by_epoch[e]) / len(by_epoch[e]) for e in range(5)]
    assert all(a >= b for a, b in zip(losses, losses[1:]))


def test_non_finite_loss_reports_epoch_and_batch():
    split = make_split([
        make_sample("0", s1="x", s2="x", gold=Label.ENTAILMENT),
        make_sample("1", s1="x", s2="x", gold=Label.CONTRADICTION),
    ])
    config = TrainConfig(epochs=1, learning_rate=1e4, batch_size=1,
                         hash_dim=16, seed=0, shuffle_each_epoch=False)
    with pytest.raises(TrainingError, match="epoch 0, batch 1"):
        train(split, config, lambda r: None)


def test_empty_split_rejected():
    with pytest.raises(DataError):
        train(make_split([]), TrainConfig(), lambda r: None)


def test_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig(epochs=0)
    with pytest.raises(ConfigError):
        TrainConfig(hash_dim=100)  # not a power of two
    with pytest.raises(ConfigError):
        TrainConfig(learning_rate=0.0)


def test_gradient_check_against_central_differences():
    rng = np.random.default_rng(7)
    x = sparse.csr_matrix(rng.random((6, 5)) * (rng.random((6, 5)) > 0.3))
    y = np.array([0, 1, 2, 0, 1, 2])
    weights_t = rng.normal(size=(5, 3)) * 0.5
    bias = rng.normal(size=3) * 0.2
    l2 = 0.01
    _, grad_w, grad_b = loss_and_grads(weights_t, bias, x, y, l2)

    step = 1e-5

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


# --- evaluation ---------------------------------------------------------

def one_per_class_split():
    return make_split([
        make_sample("e", s1="alpha", s2="beta", gold=Label.ENTAILMENT),
        make_sample("c", s1="gamma", s2="delta", gold=Label.CONTRADICTION),
        make_sample("n", s1="epsilon", s2="zeta", gold=Label.NEUTRAL),
    ])


def test_zero_model_ties_to_entailment_scores_one_third():
    split = one_per_class_split()
    assert evaluate(zero_model(2**10), split) == pytest.approx(1 / 3)


def test_perfect_model_scores_one():
    split = separable_split()
    model = train(split, TrainConfig(epochs=20, hash_dim=2**10, seed=0), lambda r: None)
    assert evaluate(model, split) == 1.0


def test_evaluate_empty_split_is_an_error():
    with pytest.raises(DataError):
        evaluate(zero_model(), make_split([]))


# --- records ------------------------------------------------------------

def test_epoch_record_validates_probs_and_argmax():
    with pytest.raises(DataError):
        EpochRecord(guid="g", epoch=0, probs=(0.9, 0.2, 0.2),
                    predicted=Label.ENTAILMENT, gold=Label.NEUTRAL)
    with pytest.raises(DataError):
        EpochRecord(guid="g", epoch=0, probs=(0.2, 0.5, 0.3),
                    predicted=Label.ENTAILMENT, gold=Label.NEUTRAL)


def test_probs_sum_to_one_within_tolerance():
    split = separable_split()
    records = []
    train(split, TrainConfig(epochs=2, hash_dim=2**10, seed=3), records.append)
    for r in records:
        assert abs(sum(r.probs) - 1.0) <= 1e-6
        assert r.predicted is argmax_label(r.probs)


# --- checkpoints --------------------------------------------------------

def test_checkpoint_round_trip_bit_identical(tmp_path):
    rng = np.random.default_rng(3)
    model = ModelParams(weights=rng.normal(size=(3, 64)), bias=rng.normal(size=3))
    path = tmp_path / "model.ckpt"
    save_checkpoint(model, path)
    loaded = load_checkpoint(path)
    assert loaded.hash_dim == 64
    assert np.array_equal(loaded.weights, model.weights)
    assert np.array_equal(loaded.bias, model.bias)
    # byte-for-byte stable on re-save
    save_checkpoint(loaded, tmp_path / "again.ckpt")
    assert (tmp_path / "again.ckpt").read_bytes() == path.read_bytes()


def test_checkpoint_bad_magic_rejected(tmp_path):
    path = tmp_path / "junk.ckpt"
    path.write_bytes(b"NOTAMODEL" + b"\x00" * 64)
    with pytest.raises(DataError, match="magic"):
        load_checkpoint(path)


def test_checkpoint_truncation_rejected(tmp_path):
    model = ModelParams(weights=np.zeros((3, 8)), bias=np.zeros(3))
    path = tmp_path / "model.ckpt"
    save_checkpoint(model, path)
    path.write_bytes(path.read_bytes()[:-4])
    with pytest.raises(DataError, match="truncated"):
        load_checkpoint(path)


def test_featurize_split_matches_featurize():
    split = make_split([make_sample("0", s1="a b", s2="c d"),
                        make_sample("1", s1="e", s2="f g h")])
    x, y = featurize_split(split, 2**12)
    for row, sample in enumerate(split.samples):
        fv = featurize(sample, 2**12)
        dense = x[row].toarray().ravel()
        assert list(np.flatnonzero(dense)) == list(fv.indices)
        assert [dense[i] for i in fv.indices] == list(fv.values)
    assert y.tolist() == [0, 0]

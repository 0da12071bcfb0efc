import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emocomb.corpus import EmojiVocabulary, Sample
from emocomb.errors import DataError, FormatError
from emocomb.fixtures import separable_samples
from emocomb.model import (BowModel, TrainConfig, TrainingError, UnigramModel, featurize,
                           load_external, loss_and_grad, mean_cross_entropy, soft_label,
                           train_bow)


def finite_difference_grad(W, b, X, Q, eps=1e-4):
    def loss(W_, b_):
        logits = X @ W_.T + b_
        logits = logits - logits.max(axis=1, keepdims=True)
        logp = logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))
        return -(Q * logp).sum() / X.shape[0]

    gW = np.zeros_like(W)
    for idx in np.ndindex(*W.shape):
        Wp, Wm = W.copy(), W.copy()
        Wp[idx] += eps
        Wm[idx] -= eps
        gW[idx] = (loss(Wp, b) - loss(Wm, b)) / (2 * eps)
    gb = np.zeros_like(b)
    for i in range(b.size):
        bp, bm = b.copy(), b.copy()
        bp[i] += eps
        bm[i] -= eps
        gb[i] = (loss(W, bp) - loss(W, bm)) / (2 * eps)
    return gW, gb


def random_problem(rng):
    k, v, n = rng.integers(2, 6), rng.integers(2, 7), rng.integers(1, 6)
    W = rng.normal(size=(k, v))
    b = rng.normal(size=k)
    X = (rng.random((n, v)) < 0.5).astype(float)
    Q = np.stack([soft_label(tuple(rng.integers(0, k, size=rng.integers(1, 4))), k)
                  for _ in range(n)])
    return W, b, X, Q


def relative_error(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(a), np.linalg.norm(b), 1e-12)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    for _ in range(20):
        W, b, X, Q = random_problem(rng)
        _, dW, db, _ = loss_and_grad(W, b, X, Q)
        fW, fb = finite_difference_grad(W, b, X, Q)
        assert relative_error(np.concatenate([dW.ravel(), db]),
                              np.concatenate([fW.ravel(), fb])) < 1e-4


@pytest.mark.parametrize("target, expected", [
    ((0, 1), {0: 0.5, 1: 0.5}),
    ((0, 0, 1), {0: 2 / 3, 1: 1 / 3}),
    ((2,), {2: 1.0}),
])
def test_soft_label(target, expected):
    q = soft_label(target, 4)
    assert q.sum() == pytest.approx(1.0)
    for i in range(4):
        assert q[i] == pytest.approx(expected.get(i, 0.0))


def test_zero_model_is_uniform():
    m = BowModel.zeros(7, 64)
    for ctx in ["", "anything at all", "😂😂"]:
        np.testing.assert_allclose(m.predict(ctx), np.full(7, 1 / 7))


def test_unigram_baseline():
    vocab = EmojiVocabulary((("😂", 6), ("❤", 3), ("🎉", 1)))
    m = UnigramModel.from_vocabulary(vocab)
    np.testing.assert_allclose(m.predict("whatever"), [0.6, 0.3, 0.1])
    np.testing.assert_allclose(m.predict_batch(["a", "b"]), [[0.6, 0.3, 0.1]] * 2)
    m2 = UnigramModel.from_samples([Sample("", (0, 0)), Sample("", (1,))], 3)
    np.testing.assert_allclose(m2.predict(""), [2 / 3, 1 / 3, 0])


def test_featurize_lowercases_and_splits_emoji():
    X = featurize(["Hello😂", "hello 😂"], 1 << 12)
    assert (X[0] != X[1]).nnz == 0
    assert X[0].nnz == 2


def test_zero_epochs_gives_uniform():
    samples, k = separable_samples(200)
    m = train_bow(samples, k, TrainConfig(epochs=0, n_features=256))
    np.testing.assert_allclose(m.predict("ctx3 some shared words"), np.full(k, 1 / k))


def test_trained_argmax_on_separable_data():
    samples = [Sample("ctxA", (0,)), Sample("ctxB", (1,))] * 50
    m = train_bow(samples, 2, TrainConfig(epochs=50, batch_size=16, n_features=512))
    assert int(np.argmax(m.predict("ctxA"))) == 0
    assert int(np.argmax(m.predict("ctxB"))) == 1
    assert mean_cross_entropy(m, samples) < 0.1


def test_training_loss_trend_and_lower_bound():
    samples, k = separable_samples(1000, seed=2)
    m = train_bow(samples, k, TrainConfig(epochs=15, n_features=1024))
    h = m.history
    assert h[-1] < h[0]
    assert all(b <= a + 1e-9 for a, b in zip(h, h[1:]))
    # one-hot labels have zero entropy, so cross-entropy is bounded by 0 from below
    assert min(h) >= 0.0


def test_seeded_training_is_bit_reproducible():
    samples, k = separable_samples(500, seed=4)
    cfg = TrainConfig(epochs=3, seed=9, n_features=512)
    a, b = train_bow(samples, k, cfg), train_bow(samples, k, cfg)
    assert a.weights.tobytes() == b.weights.tobytes()
    assert a.bias.tobytes() == b.bias.tobytes()
    c = train_bow(samples, k, TrainConfig(epochs=3, seed=10, n_features=512))
    assert c.weights.tobytes() != a.weights.tobytes()


def test_diverging_training_aborts():
    samples, k = separable_samples(200)
    with pytest.raises(TrainingError, match="learning rate"):
        train_bow(samples, k, TrainConfig(epochs=5, lr=1e308, n_features=64))


def test_empty_training_set():
    with pytest.raises(DataError):
        train_bow([], 3)


def test_checkpoint_round_trip(tmp_path):
    samples, k = separable_samples(300)
    m = train_bow(samples, k, TrainConfig(epochs=2, n_features=128), vocab_checksum="abc")
    m.save(tmp_path / "m.bin")
    m2 = BowModel.load(tmp_path / "m.bin")
    assert m2.vocab_checksum == "abc" and m2.seed == 0
    np.testing.assert_array_equal(m.weights, m2.weights)
    np.testing.assert_array_equal(m.bias, m2.bias)
    assert m2.history == m.history


def test_checkpoint_rejects_garbage(tmp_path):
    (tmp_path / "x.bin").write_bytes(b"nope\n")
    with pytest.raises(FormatError):
        BowModel.load(tmp_path / "x.bin")


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.text(max_size=40))
def test_predict_is_a_distribution(seed, context):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 20))
    m = BowModel(rng.normal(scale=5, size=(k, 64)), rng.normal(scale=5, size=k))
    p = m.predict(context)
    assert p.shape == (k,)
    assert (p >= 0).all()
    assert abs(p.sum() - 1) <= 1e-6
    np.testing.assert_array_equal(p, m.predict(context))


def _samples(n):
    return [Sample(f"c{i}", (0,)) for i in range(n)]


def test_external_verbatim(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("0.25,0.25,0.5\n1,0,0\n")
    m = load_external(path, _samples(2), 3)
    np.testing.assert_array_equal(m.predict_index(0), [0.25, 0.25, 0.5])
    np.testing.assert_array_equal(m.predict("c1"), [1, 0, 0])


def test_external_renormalizes(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("0.5,0.5,1.0\n")
    m = load_external(path, _samples(1))
    np.testing.assert_allclose(m.predict("c0"), [0.25, 0.25, 0.5])


def test_external_row_count_mismatch(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("1,0\n1,0\n0,1\n")
    with pytest.raises(DataError):
        load_external(path, _samples(4))


@pytest.mark.parametrize("row", ["0.5,-0.1,0.6", "0,0,0", "a,b,c", "0.5,0.5"])
def test_external_bad_rows(tmp_path, row):
    path = tmp_path / "p.csv"
    path.write_text("0.2,0.3,0.5\n" + row + "\n")
    with pytest.raises(FormatError) as exc:
        load_external(path, _samples(2), 3)
    assert exc.value.line == 2

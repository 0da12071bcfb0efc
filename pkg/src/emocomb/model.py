"""Emoji probability models: P(emoji | context) over the K vocabulary ids.

A single distribution per context serves every position of the target
combination (position-independent unigram factorization of the target).
"""
from __future__ import annotations

import csv
import json
import logging
import zlib
from collections import Counter
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import EmojiVocabulary, Sample
from .emoji_text import EmojiTable, default_table, feature_tokens
from .errors import DataError, FormatError

log = logging.getLogger(__name__)

DEFAULT_FEATURES = 1 << 14
CHECKPOINT_MAGIC = b"EMOCOMB-BOW\n"
CHECKPOINT_VERSION = 1


class ProbabilityModel(Protocol):
    n_classes: int

    def predict(self, context: str) -> np.ndarray: ...

    def predict_batch(self, contexts: Sequence[str]) -> np.ndarray: ...


class TrainingError(RuntimeError):
    pass


def softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def soft_label(target, k: int) -> np.ndarray:
    """Normalized emoji counts of a target combination."""
    q = np.zeros(k, dtype=np.float64)
    for e in target:
        q[e] += 1.0
    return q / len(target)


def feature_ids(text: str, n_features: int, table: EmojiTable | None = None) -> list[int]:
    """Sorted distinct hashed feature ids (crc32 of the UTF-8 token mod n_features)."""
    return sorted({zlib.crc32(t.encode("utf-8")) % n_features
                   for t in feature_tokens(text, table)})


def featurize(contexts: Sequence[str], n_features: int,
              table: EmojiTable | None = None) -> sp.csr_matrix:
    """Binary bag-of-words design matrix, one row per context."""
    table = table or default_table()
    indptr = [0]
    indices: list[int] = []
    for c in contexts:
        indices.extend(feature_ids(c, n_features, table))
        indptr.append(len(indices))
    data = np.ones(len(indices), dtype=np.float64)
    return sp.csr_matrix((data, np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
                         shape=(len(contexts), n_features))


def loss_and_grad(W, b, X, Q):
    """Mean soft-label cross-entropy of softmax(X W^T + b) and its gradient.

    X is dense (n, V), Q holds label distributions (n, K).  Returns
    ``(loss, dW, db, P)``.
    """
    n = X.shape[0]
    P = softmax(X @ W.T + b)
    loss = float(-(Q * np.log(np.maximum(P, 1e-300))).sum() / n)
    G = (P - Q) / n
    return loss, G.T @ X, G.sum(axis=0), P


@dataclass
class BowModel:
    """Linear softmax head over hashed bag-of-words features."""

    weights: np.ndarray  # (K, n_features)
    bias: np.ndarray  # (K,)
    seed: int = 0
    vocab_checksum: str = ""
    history: list = field(default_factory=list, compare=False)
    table: EmojiTable | None = field(default=None, compare=False, repr=False)

    @classmethod
    def zeros(cls, k: int, n_features: int = DEFAULT_FEATURES, **kw):
        return cls(np.zeros((k, n_features)), np.zeros(k), **kw)

    @property
    def n_classes(self):
        return self.weights.shape[0]

    @property
    def n_features(self):
        return self.weights.shape[1]

    def predict_batch(self, contexts):
        X = featurize(contexts, self.n_features, self.table)
        return softmax(np.asarray(X @ self.weights.T) + self.bias)

    def predict(self, context):
        return self.predict_batch([context])[0]

    def save(self, path):
        header = {
            "version": CHECKPOINT_VERSION,
            "k": self.n_classes,
            "n_features": self.n_features,
            "seed": self.seed,
            "vocab_checksum": self.vocab_checksum,
            "history": self.history,
            "dtype": "<f8",
        }
        with open(path, "wb") as f:
            f.write(CHECKPOINT_MAGIC)
            f.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
            f.write(np.ascontiguousarray(self.weights, dtype="<f8").tobytes())
            f.write(np.ascontiguousarray(self.bias, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path, table=None):
        with open(path, "rb") as f:
            if f.readline() != CHECKPOINT_MAGIC:
                raise FormatError("not a bag-of-words checkpoint", path)
            try:
                header = json.loads(f.readline())
            except ValueError:
                raise FormatError("corrupt checkpoint header", path, 2) from None
            if header.get("version") != CHECKPOINT_VERSION:
                raise FormatError(f"unsupported checkpoint version {header.get('version')}", path)
            k, v = header["k"], header["n_features"]
            body = f.read()
        if len(body) != 8 * (k * v + k):
            raise FormatError("truncated checkpoint", path)
        flat = np.frombuffer(body, dtype="<f8").astype(np.float64)
        return cls(flat[:k * v].reshape(k, v).copy(), flat[k * v:].copy(),
                   seed=header["seed"], vocab_checksum=header["vocab_checksum"],
                   history=header.get("history", []), table=table)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 64
    lr: float = 0.5
    seed: int = 0
    n_features: int = DEFAULT_FEATURES


def train_bow(samples: Sequence[Sample], k: int, config: TrainConfig = TrainConfig(),
              table: EmojiTable | None = None, vocab_checksum: str = "") -> BowModel:
    """Mini-batch gradient descent on mean soft-label cross-entropy.

    Parameters start at zero; the seed only drives the per-epoch shuffle.
    Only weight columns for features present in a batch are touched, which
    is exact for plain gradient descent since the others get zero gradient.
    """
    if not samples:
        raise DataError("no training samples")
    if config.epochs < 0 or config.batch_size < 1 or config.lr <= 0:
        raise ValueError(f"invalid training config {config}")
    table = table or default_table()
    model = BowModel.zeros(k, config.n_features, seed=config.seed,
                           vocab_checksum=vocab_checksum, table=table)
    X = featurize([s.context for s in samples], config.n_features, table)
    targets = [s.target for s in samples]
    n = len(samples)
    rng = np.random.default_rng(config.seed)
    W, b = model.weights, model.bias
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            Xb = X[idx]
            cols = np.unique(Xb.indices)
            Xd = Xb[:, cols].toarray()
            Q = np.stack([soft_label(targets[i], k) for i in idx])
            with np.errstate(over="ignore", invalid="ignore"):
                loss, dW, db, _ = loss_and_grad(W[:, cols], b, Xd, Q)
            if not np.isfinite(loss):
                raise TrainingError(
                    f"non-finite loss at epoch {epoch}, batch {start // config.batch_size}; "
                    f"learning rate {config.lr} is probably too high")
            W[:, cols] -= config.lr * dW
            b -= config.lr * db
            total += loss * len(idx)
        model.history.append(total / n)
        log.info("epoch %d mean cross-entropy %.6f", epoch + 1, total / n)
    return model


def mean_cross_entropy(model: ProbabilityModel, samples: Sequence[Sample]) -> float:
    P = model.predict_batch([s.context for s in samples])
    k = P.shape[1]
    Q = np.stack([soft_label(s.target, k) for s in samples])
    return float(-(Q * np.log(np.maximum(P, 1e-300))).sum() / len(samples))


@dataclass
class UnigramModel:
    """Context-free baseline: emoji frequency distribution."""

    probs: np.ndarray

    @classmethod
    def from_vocabulary(cls, vocab: EmojiVocabulary):
        counts = np.array([c for _, c in vocab.entries], dtype=np.float64)
        return cls(counts / counts.sum())

    @classmethod
    def from_samples(cls, samples, k):
        counts = Counter(e for s in samples for e in s.target)
        p = np.array([counts.get(i, 0) for i in range(k)], dtype=np.float64)
        return cls(p / p.sum())

    @property
    def n_classes(self):
        return self.probs.shape[0]

    def predict(self, context):
        return self.probs.copy()

    def predict_batch(self, contexts):
        return np.tile(self.probs, (len(contexts), 1))


@dataclass
class ExternalModel:
    """Distributions computed elsewhere, aligned by index with a dataset."""

    rows: np.ndarray  # (n, K), each row sums to 1
    contexts: tuple[str, ...]

    @property
    def n_classes(self):
        return self.rows.shape[1]

    def predict_index(self, i):
        return self.rows[i].copy()

    def predict(self, context):
        try:
            i = self.contexts.index(context)
        except ValueError:
            raise KeyError(f"context not in the aligned dataset: {context!r}") from None
        return self.predict_index(i)

    def predict_batch(self, contexts):
        if tuple(contexts) != self.contexts:
            raise ValueError("external distributions are only defined for their aligned dataset")
        return self.rows.copy()


def load_external(path, samples: Sequence[Sample], k: int | None = None) -> ExternalModel:
    """Read one comma-separated distribution per sample; rows are renormalized."""
    rows = []
    with open(path, newline="", encoding="utf-8") as f:
        for lineno, rec in enumerate(csv.reader(f), 1):
            if not rec or all(not c.strip() for c in rec):
                continue
            try:
                row = np.array([float(c) for c in rec], dtype=np.float64)
            except ValueError:
                raise FormatError("non-numeric entry", path, lineno) from None
            if k is not None and row.size != k:
                raise FormatError(f"expected {k} values, got {row.size}", path, lineno)
            if rows and row.size != rows[0].size:
                raise FormatError("ragged rows", path, lineno)
            if not np.all(np.isfinite(row)) or (row < 0).any():
                raise FormatError("negative or non-finite probability", path, lineno)
            total = row.sum()
            if total <= 0:
                raise FormatError("row sums to 0", path, lineno)
            rows.append(row / total)
    if len(rows) != len(samples):
        raise DataError(f"{path}: {len(rows)} distributions for {len(samples)} samples")
    if not rows:
        raise DataError(f"{path}: no distributions")
    return ExternalModel(np.stack(rows), tuple(s.context for s in samples))

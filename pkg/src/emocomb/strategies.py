"""Turning one emoji probability vector into a predicted combination.

Three strategies: fixed top-3, greedy cumulative-threshold, and retrieval
over a mined candidate dictionary ranked by cross-entropy against the
candidate's own emoji distribution (lower is better).
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .corpus import DEFAULT_MAX_LEN, CandidateDictionary

EPS = 1e-12


@dataclass(frozen=True)
class RankedPrediction:
    combination: tuple[int, ...]
    score: float
    frequency: int


def _check_dist(p):
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("probability vector must be 1-D and non-empty")
    return p


def naive_top3(p) -> tuple[int, ...]:
    """Three most probable ids, most probable first; equal mass -> lower id first."""
    p = _check_dist(p)
    if p.size < 3:
        raise ValueError("naive top-3 needs at least 3 classes")
    order = np.argsort(-p, kind="stable")
    return tuple(int(i) for i in order[:3])


def greedy_topk(p, thr: float, max_len: int = DEFAULT_MAX_LEN) -> tuple[int, ...]:
    if not 0.0 < thr <= 1.0:
        raise ValueError("thr must be in (0, 1]")
    p = _check_dist(p)
    order = np.argsort(-p, kind="stable")
    out = []
    cum = 0.0
    for i in order[:max_len]:
        out.append(int(i))
        cum += float(p[i])
        if cum >= thr:
            break
    return tuple(out)


def canonical_form(comb, width: int = DEFAULT_MAX_LEN):
    """Distinct ids ascending with normalized counts, zero-padded to ``width``.

    Every ordering of the same multiset maps to the same arrays, which is
    what makes scores bitwise order-invariant.
    """
    if not comb:
        raise ValueError("empty combination")
    counts = Counter(comb)
    ids = np.zeros(width, dtype=np.int64)
    weights = np.zeros(width, dtype=np.float64)
    for slot, e in enumerate(sorted(counts)):
        ids[slot] = e
        weights[slot] = counts[e] / len(comb)
    return ids, weights


def log_probs(p) -> np.ndarray:
    return np.log(np.maximum(_check_dist(p), EPS))


def cross_entropy_scores(logp, ids, weights) -> np.ndarray:
    """-sum_slot weight * log p[id], accumulated slot by slot left to right."""
    acc = weights[:, 0] * logp[ids[:, 0]]
    for s in range(1, ids.shape[1]):
        acc = acc + weights[:, s] * logp[ids[:, s]]
    return -acc


def score_candidate(p, cand, width: int = DEFAULT_MAX_LEN) -> float:
    p = _check_dist(p)
    if any(not 0 <= e < p.size for e in cand):
        raise ValueError("candidate id out of range")
    ids, weights = canonical_form(cand, max(width, len(cand)))
    return float(cross_entropy_scores(log_probs(p), ids[None, :], weights[None, :])[0])


def size_penalty(length, pen: float, max_len: int = DEFAULT_MAX_LEN):
    return pen * (max_len - length)


def penalized_scores(p, dictionary: CandidateDictionary, pen: float = 0.0) -> np.ndarray:
    ids, weights, lengths, _, _ = dictionary.arrays
    return cross_entropy_scores(log_probs(p), ids, weights) + size_penalty(
        lengths, pen, dictionary.max_len)


def retrieval_rank(p, dictionary: CandidateDictionary, pen: float = 0.0) -> RankedPrediction:
    """Best candidate by penalized score, then higher frequency, then id order."""
    if pen < 0:
        raise ValueError("pen must be >= 0")
    if len(dictionary) == 0:
        raise ValueError("empty candidate dictionary")
    scores = penalized_scores(p, dictionary, pen)
    _, _, _, freqs, lex = dictionary.arrays
    tied = np.flatnonzero(scores == scores.min())
    if tied.size > 1:
        best_f = freqs[tied].max()
        tied = tied[freqs[tied] == best_f]
    if tied.size > 1:
        keys = [lex[tied, s] for s in range(lex.shape[1] - 1, -1, -1)]
        tied = tied[np.lexsort(keys)]
    j = int(tied[0])
    comb, freq = dictionary.candidates[j]
    return RankedPrediction(tuple(comb), float(scores[j]), int(freq))


def retrieval_predict(p, dictionary: CandidateDictionary, pen: float = 0.0) -> tuple[int, ...]:
    return retrieval_rank(p, dictionary, pen).combination


def predict_one(p, strategy: str, *, thr: float = 0.3, pen: float = 0.0,
                dictionary: CandidateDictionary | None = None,
                max_len: int = DEFAULT_MAX_LEN) -> RankedPrediction:
    """Dispatch by strategy name; ``score`` for naive/greedy is the unpenalized
    cross-entropy of the chosen combination."""
    if strategy == "retrieval":
        if dictionary is None:
            raise ValueError("retrieval strategy needs a candidate dictionary")
        return retrieval_rank(p, dictionary, pen)
    if strategy == "naive":
        comb = naive_top3(p)
    elif strategy == "greedy":
        comb = greedy_topk(p, thr, max_len)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return RankedPrediction(comb, score_candidate(p, comb, max_len), 0)

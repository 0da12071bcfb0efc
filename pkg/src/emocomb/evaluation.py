"""Multiset precision / recall / F1 for predicted emoji combinations."""
from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .corpus import DEFAULT_MAX_LEN, CandidateDictionary, Sample
from .strategies import predict_one

REPORT_HEADER = ("strategy", "params", "recall_pct", "precision_pct", "f1_x100",
                 "exact_match_pct", "n_samples")


@dataclass(frozen=True)
class SampleScore:
    tp: int
    pred_size: int
    target_size: int
    exact: bool = False


def sample_score(pred, target) -> SampleScore:
    """tp is the size of the multiset intersection; order is ignored except for ``exact``."""
    tp = sum((Counter(pred) & Counter(target)).values())
    return SampleScore(tp, len(pred), len(target), tuple(pred) == tuple(target))


@dataclass(frozen=True)
class StrategyConfig:
    strategy: str
    thr: float | None = None
    pen: float | None = None

    @property
    def params(self):
        if self.strategy == "greedy":
            return f"thr={self.thr:g}"
        if self.strategy == "retrieval":
            return f"pen={self.pen:g}"
        return ""

    @property
    def label(self):
        return f"{self.strategy} {self.params}".strip()


STRATEGY_GRID = (
    StrategyConfig("naive"),
    StrategyConfig("greedy", thr=0.4),
    StrategyConfig("greedy", thr=0.3),
    StrategyConfig("greedy", thr=0.2),
    StrategyConfig("retrieval", pen=0.0),
    StrategyConfig("retrieval", pen=0.2),
    StrategyConfig("retrieval", pen=0.3),
    StrategyConfig("retrieval", pen=0.4),
)


@dataclass(frozen=True)
class EvalReport:
    """Micro-averaged scores from pooled counts."""

    config: StrategyConfig
    tp: int
    pred_total: int
    target_total: int
    exact: int
    n_samples: int

    @property
    def precision(self):
        return self.tp / self.pred_total if self.pred_total else 0.0

    @property
    def recall(self):
        return self.tp / self.target_total if self.target_total else 0.0

    @property
    def f1(self):
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r > 0 else 0.0

    @property
    def exact_match(self):
        return self.exact / self.n_samples

    def row(self):
        return (self.config.strategy, self.config.params,
                f"{100 * self.recall:.4f}", f"{100 * self.precision:.4f}",
                f"{100 * self.f1:.4f}", f"{100 * self.exact_match:.4f}", str(self.n_samples))


def aggregate(scores: Iterable[SampleScore], config: StrategyConfig = StrategyConfig("")) -> EvalReport:
    tp = pred = target = exact = n = 0
    for s in scores:
        tp += s.tp
        pred += s.pred_size
        target += s.target_size
        exact += int(s.exact)
        n += 1
    if n == 0:
        raise ValueError("cannot aggregate an empty score stream")
    return EvalReport(config, tp, pred, target, exact, n)


def macro_scores(scores: Sequence[SampleScore]):
    """Per-sample-averaged (precision, recall); kept only to contrast with micro."""
    p = np.mean([s.tp / s.pred_size for s in scores])
    r = np.mean([s.tp / s.target_size for s in scores])
    return float(p), float(r)


def evaluate_predictions(preds, targets, config) -> EvalReport:
    return aggregate((sample_score(p, t) for p, t in zip(preds, targets, strict=True)), config)


def compare_strategies(model, samples: Sequence[Sample], dictionary: CandidateDictionary | None,
                       grid: Sequence[StrategyConfig] = STRATEGY_GRID,
                       max_len: int = DEFAULT_MAX_LEN, probs=None) -> list[EvalReport]:
    """One report per grid entry, all from the same model probabilities."""
    if not samples:
        raise ValueError("no samples to evaluate")
    if probs is None:
        probs = model.predict_batch([s.context for s in samples])
    targets = [s.target for s in samples]
    reports = []
    for cfg in grid:
        preds = [predict_one(p, cfg.strategy, thr=cfg.thr or 0.0, pen=cfg.pen or 0.0,
                             dictionary=dictionary, max_len=max_len).combination
                 for p in probs]
        reports.append(evaluate_predictions(preds, targets, cfg))
    return reports


def report_csv(reports: Sequence[EvalReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for r in reports:
        w.writerow(r.row())
    return buf.getvalue()


def format_table(reports: Sequence[EvalReport]) -> str:
    lines = [f"{'strategy':<22}{'recall%':>9}{'prec%':>9}{'F1x100':>9}{'exact%':>9}"]
    for r in reports:
        lines.append(f"{r.config.label:<22}{100 * r.recall:9.1f}{100 * r.precision:9.1f}"
                     f"{100 * r.f1:9.1f}{100 * r.exact_match:9.1f}")
    return "\n".join(lines)

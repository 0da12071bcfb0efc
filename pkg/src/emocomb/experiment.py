"""In-process fixture experiment: synthetic corpus -> strategy comparison."""
from __future__ import annotations

from dataclasses import dataclass

from .corpus import (DEFAULT_DICT_SIZE, DEFAULT_K, build_samples, build_vocabulary,
                     mine_candidates, preprocess, split_samples)
from .evaluation import STRATEGY_GRID, compare_strategies
from .fixtures import topic_corpus
from .model import TrainConfig, train_bow


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    n_posts: int = 12000
    test_fraction: float = 0.2
    k: int = DEFAULT_K
    dict_size: int = DEFAULT_DICT_SIZE
    epochs: int = 20
    lr: float = 0.5


def run_fixture_experiment(cfg: ExperimentConfig = ExperimentConfig(), grid=STRATEGY_GRID):
    posts = [preprocess(p) for p in topic_corpus(cfg.n_posts, seed=cfg.seed)]
    vocab = build_vocabulary(posts, cfg.k)
    samples = build_samples(posts, vocab)
    train, test = split_samples(samples, cfg.test_fraction, cfg.seed)
    dictionary = mine_candidates(train, cfg.dict_size, len(vocab), vocab_checksum=vocab.checksum)
    model = train_bow(train, len(vocab), TrainConfig(epochs=cfg.epochs, lr=cfg.lr, seed=cfg.seed),
                      vocab_checksum=vocab.checksum)
    return compare_strategies(model, test, dictionary, grid)

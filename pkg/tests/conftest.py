from pathlib import Path

import pytest

from emocomb.cli import main
from emocomb.fixtures import topic_corpus
from emocomb.formats import corpus_text

DATA = Path(__file__).parent / "data"


@pytest.fixture
def six_posts():
    return DATA / "six_posts.jsonl"


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "corpus.jsonl"
    path.write_text(corpus_text(topic_corpus(1500, seed=3)), encoding="utf-8")
    return path


def run_pipeline(workdir, corpus, seed=0, epochs=3):
    """build-dataset -> mine-candidates -> train -> evaluate; returns output paths."""
    w = Path(workdir)
    out = {name: w / name for name in
           ("vocab.tsv", "train.jsonl", "test.jsonl", "dict.tsv", "model.bin", "report.csv")}
    common = ["--vocab", str(out["vocab.tsv"]), "--seed", str(seed)]
    steps = [
        ["build-dataset", "--corpus", str(corpus), "--dataset", str(out["train.jsonl"]),
         "--test-dataset", str(out["test.jsonl"]), "--test-fraction", "0.2"],
        ["mine-candidates", "--dataset", str(out["train.jsonl"]), "--dict", str(out["dict.tsv"])],
        ["train", "--dataset", str(out["train.jsonl"]), "--model", str(out["model.bin"]),
         "--epochs", str(epochs), "--n-features", "4096"],
        ["evaluate", "--dataset", str(out["test.jsonl"]), "--dict", str(out["dict.tsv"]),
         "--model", str(out["model.bin"]), "--report", str(out["report.csv"])],
    ]
    for argv in steps:
        assert main(argv + common) == 0, argv
    return out


_CRITERIA = {
    "c01": "retrieval == brute-force argmin (250 instances, <10 s)",
    "c02": "cross-entropy score 0.948560 +-1e-6, uniform ln 500 +-1e-9",
    "c03": "score order invariance, bitwise (1000 pairs)",
    "c04": "penalty algebra 1e-12; fixture recall up / precision down with pen",
    "c05": "greedy prefix property (1000); fixture recall thr0.4 >= thr0.2",
    "c06": "analytic vs central-difference gradient < 1e-4 (50 models)",
    "c07": "separable fixture CE < 0.1 nats within 50 epochs, < 60 s",
    "c08": "fixture F1: retrieval > greedy > naive on 3 seeds",
    "c09": "CLI pipeline byte-identical on rerun",
    "c10": "6-post hand-traced extraction",
    "c11": "metric sanity (perfect, disjoint, hand aggregate 1e-12)",
}
_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: exit criteria")


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance" in report.nodeid and name[5:8] in _CRITERIA:
        key = name[5:8]
        if report.failed:
            _outcomes[key] = "FAIL"
        elif report.when == "call" and report.passed:
            _outcomes.setdefault(key, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for key, text in _CRITERIA.items():
        if key in _outcomes:
            terminalreporter.write_line(f"{_outcomes[key]}  {key}  {text}")

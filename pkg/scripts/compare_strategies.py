"""Strategy comparison on the synthetic topic corpus, one table per seed.

    python3 scripts/compare_strategies.py --seeds 0 1 2
"""
import argparse
import time

from emocomb.experiment import ExperimentConfig, run_fixture_experiment
from emocomb.evaluation import format_table


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--n-posts", type=int, default=ExperimentConfig.n_posts)
    ap.add_argument("--epochs", type=int, default=ExperimentConfig.epochs)
    ap.add_argument("--lr", type=float, default=ExperimentConfig.lr)
    args = ap.parse_args()

    for seed in args.seeds:
        cfg = ExperimentConfig(seed=seed, n_posts=args.n_posts, epochs=args.epochs, lr=args.lr)
        t0 = time.perf_counter()
        reports = run_fixture_experiment(cfg)
        print(f"seed={seed}  test samples={reports[0].n_samples}  "
              f"({time.perf_counter() - t0:.1f}s)")
        print(format_table(reports))
        best = {kind: max(r.f1 for r in reports if r.config.strategy == kind)
                for kind in ("naive", "greedy", "retrieval")}
        ordered = best["retrieval"] > best["greedy"] > best["naive"]
        print("best F1: " + "  ".join(f"{k}={100 * v:.1f}" for k, v in best.items())
              + f"  retrieval>greedy>naive: {ordered}\n")


if __name__ == "__main__":
    main()

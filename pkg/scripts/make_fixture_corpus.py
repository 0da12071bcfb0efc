"""Write the synthetic topic corpus as JSONL ({"text": ...} per line) for the CLI."""
import argparse

from emocomb.fixtures import topic_corpus
from emocomb.formats import atomic_write, corpus_text


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out")
    ap.add_argument("--n-posts", type=int, default=12000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    atomic_write(args.out, corpus_text(topic_corpus(args.n_posts, seed=args.seed)))
    print(f"wrote {args.n_posts} posts to {args.out}")


if __name__ == "__main__":
    main()

"""Regenerate src/emocomb/data/emoji_v11.tsv from the `emoji` package.

Keeps fully-qualified entries introduced at or before Emoji 11.0, minus
skin-tone modifier sequences and bare components (the same set as the
Unicode full emoji list for that release).

    pip install emoji
    python scripts/gen_emoji_table.py
"""
import argparse
from pathlib import Path

import emoji

MODIFIERS = set(range(0x1F3FB, 0x1F400))
OUT = Path(__file__).resolve().parent.parent / "src" / "emocomb" / "data" / "emoji_v11.tsv"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--version", type=float, default=11.0)
    ap.add_argument("--out", type=Path, default=OUT)
    args = ap.parse_args()

    rows = []
    for seq, info in emoji.EMOJI_DATA.items():
        if info["status"] != emoji.STATUS["fully_qualified"] or info["E"] > args.version:
            continue
        if any(ord(c) in MODIFIERS for c in seq):
            continue
        hexes = " ".join("%X" % ord(c) for c in seq)
        rows.append((seq, hexes, info["en"].strip(":")))
    rows.sort()
    with open(args.out, "w", encoding="utf-8", newline="\n") as f:
        for _, hexes, name in rows:
            f.write(f"{hexes}\t{name}\n")
    print(f"wrote {len(rows)} entries to {args.out}")


if __name__ == "__main__":
    main()

"""From raw posts to (context, target) samples, vocabulary and candidate dictionary."""
from __future__ import annotations

import hashlib
import random
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .emoji_text import EMOJI, EmojiTable, default_table, segment, to_hex
from .errors import DataError

DEFAULT_K = 500
DEFAULT_MAX_LEN = 3
DEFAULT_DICT_SIZE = 30000

Combination = tuple  # ordered emoji ids, 1..max_len long

_URL = re.compile(r"(?:\b[a-zA-Z][a-zA-Z0-9+.\-]*://|\bwww\.)\S+")
_MENTION_TAG = re.compile(r"(?<!\w)[@#]\w+")


def preprocess(raw: str) -> str:
    """Strip URLs, @mentions and #hashtags, then collapse whitespace."""
    text = _URL.sub(" ", raw)
    text = _MENTION_TAG.sub(" ", text)
    return " ".join(text.split())


@dataclass(frozen=True)
class EmojiVocabulary:
    """The K most frequent normalized emojis; id = rank (0 is most frequent)."""

    entries: tuple[tuple[str, int], ...]

    def __post_init__(self):
        counts = [c for _, c in self.entries]
        if any(a < b for a, b in zip(counts, counts[1:])):
            raise ValueError("vocabulary counts must be non-increasing")

    @cached_property
    def _index(self):
        index = {e: i for i, (e, _) in enumerate(self.entries)}
        if len(index) != len(self.entries):
            raise ValueError("duplicate vocabulary entry")
        return index

    def __len__(self):
        return len(self.entries)

    def __contains__(self, emoji):
        return emoji in self._index

    @property
    def size(self):
        return len(self.entries)

    def id_of(self, emoji: str) -> int:
        return self._index[emoji]

    def emoji_of(self, i: int) -> str:
        return self.entries[i][0]

    def count_of(self, i: int) -> int:
        return self.entries[i][1]

    def render(self, combination) -> list[str]:
        return [self.entries[i][0] for i in combination]

    @cached_property
    def checksum(self) -> str:
        """sha256 over the canonical ``hex<TAB>count`` lines."""
        h = hashlib.sha256()
        for e, c in self.entries:
            h.update(f"{to_hex(e)}\t{c}\n".encode("ascii"))
        return h.hexdigest()


@dataclass(frozen=True)
class Sample:
    context: str
    target: tuple[int, ...]


def count_emojis(posts: Iterable[str], table: EmojiTable | None = None) -> Counter:
    table = table or default_table()
    counts: Counter = Counter()
    for post in posts:
        for tok in segment(post, table):
            if tok.kind == EMOJI:
                counts.update(tok.emojis)
    return counts


def vocabulary_from_counts(counts, k: int = DEFAULT_K) -> EmojiVocabulary:
    if k < 1:
        raise ValueError("K must be >= 1")
    counts = {e: c for e, c in counts.items() if c > 0}
    if not counts:
        raise DataError("empty emoji vocabulary")
    ranked = sorted(counts.items(), key=lambda ec: (-ec[1], ec[0]))
    return EmojiVocabulary(tuple(ranked[:k]))


def build_vocabulary(posts: Iterable[str], k: int = DEFAULT_K,
                     table: EmojiTable | None = None) -> EmojiVocabulary:
    """Top-k emojis by occurrence count; ties go to the smaller codepoint sequence."""
    return vocabulary_from_counts(count_emojis(posts, table), k)


def extract_samples(post: str, vocab: EmojiVocabulary, table: EmojiTable | None = None,
                    max_len: int = DEFAULT_MAX_LEN) -> list[Sample]:
    """One sample per maximal emoji run of acceptable length and all-in-vocab.

    The context is the post verbatim up to the run, earlier emojis included.
    """
    table = table or default_table()
    samples = []
    for tok in segment(post, table):
        if tok.kind != EMOJI:
            continue
        run = tok.emojis
        if not 1 <= len(run) <= max_len or not all(e in vocab for e in run):
            continue
        samples.append(Sample(post[:tok.start], tuple(vocab.id_of(e) for e in run)))
    return samples


def build_samples(posts: Iterable[str], vocab: EmojiVocabulary, table: EmojiTable | None = None,
                  max_len: int = DEFAULT_MAX_LEN) -> list[Sample]:
    out = []
    for post in posts:
        out.extend(extract_samples(post, vocab, table, max_len))
    return out


def split_samples(samples: Sequence[Sample], test_fraction: float, seed: int):
    """Seeded random train/test split; returns (train, test) in original order."""
    if not 0.0 <= test_fraction < 1.0:
        raise ValueError("test_fraction must be in [0, 1)")
    n_test = int(round(len(samples) * test_fraction))
    idx = list(range(len(samples)))
    random.Random(seed).shuffle(idx)
    test_idx = set(idx[:n_test])
    train = [s for i, s in enumerate(samples) if i not in test_idx]
    test = [s for i, s in enumerate(samples) if i in test_idx]
    return train, test


@dataclass(frozen=True)
class CandidateDictionary:
    """Mined combinations with training frequency, most frequent first."""

    candidates: tuple[tuple[tuple[int, ...], int], ...]
    max_len: int = DEFAULT_MAX_LEN
    vocab_checksum: str = field(default="", compare=False)

    def __post_init__(self):
        seen = set()
        for comb, freq in self.candidates:
            if not 1 <= len(comb) <= self.max_len:
                raise ValueError(f"candidate {comb} has bad length")
            if freq < 0:
                raise ValueError("negative candidate frequency")
            if comb in seen:
                raise ValueError(f"duplicate candidate {comb}")
            seen.add(comb)

    def __len__(self):
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)

    @cached_property
    def arrays(self):
        """Padded canonical form used by the retrieval scorer.

        Returns ``(ids, weights, lengths, freqs, lex)``: ``ids``/``weights``
        hold each candidate's distinct emojis in ascending id order with
        normalized counts (zero-padded to max_len); ``lex`` is the stored
        order padded with -1 for tuple-order comparisons.
        """
        from .strategies import canonical_form

        n, m = len(self.candidates), self.max_len
        ids = np.zeros((n, m), dtype=np.int64)
        weights = np.zeros((n, m), dtype=np.float64)
        lex = np.full((n, m), -1, dtype=np.int64)
        lengths = np.zeros(n, dtype=np.int64)
        freqs = np.zeros(n, dtype=np.int64)
        for j, (comb, freq) in enumerate(self.candidates):
            cids, cw = canonical_form(comb, m)
            ids[j] = cids
            weights[j] = cw
            lex[j, :len(comb)] = comb
            lengths[j] = len(comb)
            freqs[j] = freq
        return ids, weights, lengths, freqs, lex


def rank_combinations(counts, n: int):
    ranked = sorted(counts.items(), key=lambda cf: (-cf[1], cf[0]))
    return ranked[:n]


def mine_candidates(samples: Iterable[Sample], n: int = DEFAULT_DICT_SIZE,
                    vocab_size: int | None = None, max_len: int = DEFAULT_MAX_LEN,
                    vocab_checksum: str = "") -> CandidateDictionary:
    """Top-n ordered target combinations by training frequency.

    With ``vocab_size`` given, every single emoji id not already present
    as a length-1 candidate is appended with frequency 0 (ascending id).
    """
    if n < 1:
        raise ValueError("N must be >= 1")
    counts: Counter = Counter(tuple(s.target) for s in samples)
    if not counts:
        raise DataError("no samples to mine candidates from")
    kept = rank_combinations(counts, n)
    if vocab_size is not None:
        present = {c for c, _ in kept}
        kept += [((i,), 0) for i in range(vocab_size) if (i,) not in present]
    return CandidateDictionary(tuple(kept), max_len, vocab_checksum)

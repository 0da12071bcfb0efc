"""Emoji recognition, normalization and segmentation of raw text.

Emoji graphemes are represented as plain ``str`` (a sequence of scalars).
Grapheme boundaries come from the extended grapheme cluster rules of the
``regex`` module; which clusters count as emoji is decided solely by the
loaded :class:`EmojiTable`.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import regex

from .errors import FormatError

SKIN_TONE_FIRST = 0x1F3FB
SKIN_TONE_LAST = 0x1F3FF
VS16 = "\ufe0f"
ZWJ = "\u200d"

_GRAPHEME = regex.compile(r"\X")
_STRIP = {cp: None for cp in range(SKIN_TONE_FIRST, SKIN_TONE_LAST + 1)}
_STRIP[ord(VS16)] = None

WORD = "word"
SPACE = "space"
EMOJI = "emoji"


class ModifierOnlyError(ValueError):
    """Raised when normalization would leave nothing (a bare skin-tone modifier)."""


def normalize_emoji(g: str) -> str:
    """Drop skin-tone modifiers (U+1F3FB..U+1F3FF) and U+FE0F."""
    out = g.translate(_STRIP)
    if not out:
        raise ModifierOnlyError(f"modifier-only grapheme {to_hex(g)!r}")
    return out


def to_hex(seq: str) -> str:
    return " ".join("%X" % ord(c) for c in seq)


def from_hex(text: str) -> str:
    parts = text.split()
    if not parts:
        raise ValueError("empty codepoint sequence")
    try:
        return "".join(chr(int(p, 16)) for p in parts)
    except ValueError:
        raise ValueError(f"bad hex codepoint in {text!r}") from None


@dataclass(frozen=True)
class EmojiTable:
    """Immutable membership set of emoji graphemes.

    ``entries`` keeps the sequences exactly as listed in the source file;
    lookups go through :func:`normalize_emoji` on both sides, so ``👍🏽`` and
    ``❤️`` match their bare table forms.
    """

    entries: tuple[str, ...]
    names: dict = field(default_factory=dict, compare=False, repr=False)
    _normalized: frozenset = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        norm = set()
        for e in self.entries:
            try:
                norm.add(normalize_emoji(e))
            except ModifierOnlyError:
                pass
        object.__setattr__(self, "_normalized", frozenset(norm))

    def __len__(self):
        return len(self.entries)

    def __contains__(self, g):
        return self.is_emoji(g)

    def is_emoji(self, g: str) -> bool:
        try:
            return normalize_emoji(g) in self._normalized
        except ModifierOnlyError:
            return False

    def emoji_parts(self, grapheme: str) -> list[str] | None:
        """Normalized emojis making up one grapheme, or None if it is not emoji.

        A ZWJ sequence missing from the table falls apart into its components
        when each of them is a table emoji.
        """
        if self.is_emoji(grapheme):
            return [normalize_emoji(grapheme)]
        if ZWJ in grapheme:
            parts = grapheme.split(ZWJ)
            if all(p and self.is_emoji(p) for p in parts):
                return [normalize_emoji(p) for p in parts]
        return None


def load_emoji_table(table_file) -> EmojiTable:
    """Read the TSV emoji table (hex codepoints, optional name column).

    Blank lines and ``#`` comment lines are skipped and not counted.
    """
    entries = []
    names = {}
    with open(table_file, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            try:
                seq = from_hex(cols[0])
            except ValueError as exc:
                raise FormatError(str(exc), table_file, lineno) from None
            entries.append(seq)
            if len(cols) > 1 and cols[1]:
                names[seq] = cols[1]
    return EmojiTable(tuple(entries), names)


@functools.lru_cache(maxsize=None)
def default_table() -> EmojiTable:
    """The bundled Emoji 11.0 table."""
    ref = resources.files("emocomb") / "data" / "emoji_v11.tsv"
    with resources.as_file(ref) as path:
        return load_emoji_table(Path(path))


@dataclass(frozen=True)
class Token:
    kind: str
    start: int
    end: int
    text: str
    emojis: tuple[str, ...] = ()

    @property
    def is_emoji_run(self):
        return self.kind == EMOJI


def _classify(grapheme, table):
    if grapheme.isspace():
        return SPACE, None
    parts = table.emoji_parts(grapheme)
    if parts is None:
        return WORD, None
    return EMOJI, parts


def segment(text: str, table: EmojiTable | None = None) -> list[Token]:
    """Split text into word, whitespace and maximal emoji-run tokens.

    Every grapheme of ``text`` lands in exactly one token, so joining
    ``t.text`` over the result gives back the input.  An emoji glued to a
    word still starts a new token: ``"wow😂ok"`` is word, run, word.
    """
    if table is None:
        table = default_table()
    tokens = []
    kind = None
    start = 0
    emojis: list[str] = []
    pos = 0
    for m in _GRAPHEME.finditer(text):
        g = m.group()
        gkind, parts = _classify(g, table)
        if gkind != kind:
            if kind is not None:
                tokens.append(Token(kind, start, pos, text[start:pos], tuple(emojis)))
            kind, start, emojis = gkind, pos, []
        if parts:
            emojis.extend(parts)
        pos = m.end()
    if kind is not None:
        tokens.append(Token(kind, start, pos, text[start:pos], tuple(emojis)))
    return tokens


def words_and_runs(tokens):
    return [t for t in tokens if t.kind != SPACE]


def feature_tokens(text: str, table: EmojiTable | None = None) -> list[str]:
    """Lowercased words plus one token per emoji, in text order."""
    out = []
    for t in segment(text, table):
        if t.kind == WORD:
            out.append(t.text.lower())
        elif t.kind == EMOJI:
            out.extend(t.emojis)
    return out

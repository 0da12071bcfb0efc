"""On-disk formats for corpora, datasets, vocabularies and candidate dictionaries.

All writers go through :func:`atomic_write` (temp file + rename), so a
failed run never leaves a half-written artifact behind.
"""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from .corpus import CandidateDictionary, EmojiVocabulary, Sample
from .emoji_text import from_hex, to_hex
from .errors import DataError, FormatError

FORMAT_VERSION = 1
DATASET_TAG = "emocomb-dataset"
VOCAB_TAG = "#emocomb-vocab"
DICT_TAG = "#emocomb-dict"


def atomic_write(path, data):
    path = Path(path)
    if isinstance(data, str):
        data = data.encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.chmod(tmp, 0o666 & ~_umask())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _umask():
    mask = os.umask(0)
    os.umask(mask)
    return mask


def read_corpus(path):
    """Texts from a JSON-lines corpus; every object needs a string ``text``."""
    texts = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except ValueError:
                raise FormatError("invalid JSON", path, lineno) from None
            if not isinstance(obj, dict) or not isinstance(obj.get("text"), str):
                raise FormatError('missing string field "text"', path, lineno)
            texts.append(obj["text"])
    return texts


def corpus_text(texts):
    return "".join(json.dumps({"text": t}, ensure_ascii=False) + "\n" for t in texts)


def _check_header(tag, version, path):
    if version != FORMAT_VERSION:
        raise FormatError(f"{tag} version {version!r} unsupported (expected {FORMAT_VERSION})",
                          path, 1)


# -- vocabulary ---------------------------------------------------------------

def vocabulary_text(vocab: EmojiVocabulary) -> str:
    lines = [f"{VOCAB_TAG}\tv{FORMAT_VERSION}\n"]
    lines += [f"{i}\t{to_hex(e)}\t{c}\n" for i, (e, c) in enumerate(vocab.entries)]
    return "".join(lines)


def write_vocabulary(path, vocab):
    atomic_write(path, vocabulary_text(vocab))


def read_vocabulary(path) -> EmojiVocabulary:
    entries = []
    with open(path, encoding="utf-8") as f:
        head = f.readline().rstrip("\n").split("\t")
        if head[0] != VOCAB_TAG or len(head) < 2:
            raise FormatError("not a vocabulary file", path, 1)
        _check_header("vocabulary", _version(head[1], path), path)
        for lineno, line in enumerate(f, 2):
            if not line.strip():
                continue
            cols = line.rstrip("\n").split("\t")
            try:
                rank, seq, count = int(cols[0]), from_hex(cols[1]), int(cols[2])
            except (ValueError, IndexError):
                raise FormatError("malformed vocabulary row", path, lineno) from None
            if rank != len(entries):
                raise FormatError(f"rank {rank} out of sequence", path, lineno)
            entries.append((seq, count))
    if not entries:
        raise DataError(f"{path}: empty emoji vocabulary")
    try:
        return EmojiVocabulary(tuple(entries))
    except ValueError as exc:
        raise FormatError(str(exc), path) from None


def _version(field, path):
    if not field.startswith("v"):
        raise FormatError(f"bad version field {field!r}", path, 1)
    try:
        return int(field[1:])
    except ValueError:
        raise FormatError(f"bad version field {field!r}", path, 1) from None


# -- dataset ------------------------------------------------------------------

def dataset_text(samples, vocab: EmojiVocabulary) -> str:
    header = {"format": DATASET_TAG, "version": FORMAT_VERSION, "vocab_checksum": vocab.checksum}
    lines = [json.dumps(header, sort_keys=True) + "\n"]
    for s in samples:
        lines.append(json.dumps({"context": s.context, "target": vocab.render(s.target)},
                                ensure_ascii=False) + "\n")
    return "".join(lines)


def write_dataset(path, samples, vocab):
    atomic_write(path, dataset_text(samples, vocab))


def read_dataset(path, vocab: EmojiVocabulary, max_len: int = 3) -> list[Sample]:
    samples = []
    with open(path, encoding="utf-8") as f:
        first = f.readline()
        if not first.strip():
            raise DataError(f"{path}: no samples")
        try:
            header = json.loads(first)
        except ValueError:
            raise FormatError("invalid dataset header", path, 1) from None
        if not isinstance(header, dict) or header.get("format") != DATASET_TAG:
            raise FormatError("not a dataset file", path, 1)
        _check_header("dataset", header.get("version"), path)
        if header.get("vocab_checksum") != vocab.checksum:
            raise DataError(f"{path}: dataset was built against a different vocabulary")
        for lineno, line in enumerate(f, 2):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                context, target = obj["context"], obj["target"]
                if not isinstance(context, str) or not isinstance(target, list):
                    raise TypeError
                ids = tuple(vocab.id_of(e) for e in target)
            except (ValueError, KeyError, TypeError):
                raise FormatError("malformed sample", path, lineno) from None
            if not 1 <= len(ids) <= max_len:
                raise FormatError(f"target length {len(ids)} outside 1..{max_len}", path, lineno)
            samples.append(Sample(context, ids))
    if not samples:
        raise DataError(f"{path}: no samples")
    return samples


# -- candidate dictionary -----------------------------------------------------

def dictionary_text(dictionary: CandidateDictionary, vocab: EmojiVocabulary) -> str:
    lines = [f"{DICT_TAG}\tv{FORMAT_VERSION}\tvocab={vocab.checksum}\tmax_len={dictionary.max_len}\n"]
    for comb, freq in dictionary.candidates:
        lines.append("|".join(to_hex(vocab.emoji_of(i)) for i in comb) + f"\t{freq}\n")
    return "".join(lines)


def write_dictionary(path, dictionary, vocab):
    atomic_write(path, dictionary_text(dictionary, vocab))


def read_dictionary(path, vocab: EmojiVocabulary) -> CandidateDictionary:
    with open(path, encoding="utf-8") as f:
        head = f.readline().rstrip("\n").split("\t")
        if head[0] != DICT_TAG or len(head) < 4:
            raise FormatError("not a candidate dictionary file", path, 1)
        _check_header("dictionary", _version(head[1], path), path)
        meta = dict(h.split("=", 1) for h in head[2:] if "=" in h)
        if meta.get("vocab") != vocab.checksum:
            raise DataError(f"{path}: dictionary was mined against a different vocabulary")
        try:
            max_len = int(meta["max_len"])
        except (KeyError, ValueError):
            raise FormatError("bad max_len", path, 1) from None
        candidates = []
        for lineno, line in enumerate(f, 2):
            if not line.strip():
                continue
            cols = line.rstrip("\n").split("\t")
            try:
                comb = tuple(vocab.id_of(from_hex(h)) for h in cols[0].split("|"))
                freq = int(cols[1])
            except (ValueError, KeyError, IndexError):
                raise FormatError("malformed candidate row", path, lineno) from None
            candidates.append((comb, freq))
    if not candidates:
        raise DataError(f"{path}: empty candidate dictionary")
    try:
        return CandidateDictionary(tuple(candidates), max_len, vocab.checksum)
    except ValueError as exc:
        raise FormatError(str(exc), path) from None

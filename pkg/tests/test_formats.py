import json

import pytest

from emocomb import formats
from emocomb.corpus import EmojiVocabulary, Sample, mine_candidates
from emocomb.errors import DataError, FormatError

VOCAB = EmojiVocabulary((("😂", 5), ("👨‍💻", 3), ("❤", 3)))
SAMPLES = [Sample("hi ", (0,)), Sample("", (1, 2)), Sample("a 😂 b\tc ", (2, 2, 0))]


def test_dataset_round_trip(tmp_path):
    formats.write_vocabulary(tmp_path / "v.tsv", VOCAB)
    formats.write_dataset(tmp_path / "d.jsonl", SAMPLES, VOCAB)
    vocab = formats.read_vocabulary(tmp_path / "v.tsv")
    assert vocab == VOCAB and vocab.checksum == VOCAB.checksum
    assert formats.read_dataset(tmp_path / "d.jsonl", vocab) == SAMPLES


def test_dataset_lines_are_plain_json(tmp_path):
    formats.write_dataset(tmp_path / "d.jsonl", SAMPLES, VOCAB)
    lines = (tmp_path / "d.jsonl").read_text(encoding="utf-8").splitlines()
    assert json.loads(lines[1]) == {"context": "hi ", "target": ["😂"]}
    assert json.loads(lines[2])["target"] == ["👨‍💻", "❤"]


def test_dictionary_round_trip(tmp_path):
    d = mine_candidates(SAMPLES, 10, vocab_size=3, vocab_checksum=VOCAB.checksum)
    formats.write_dictionary(tmp_path / "c.tsv", d, VOCAB)
    text = (tmp_path / "c.tsv").read_text(encoding="utf-8")
    assert "1F468 200D 1F4BB|2764\t1\n" in text
    assert formats.read_dictionary(tmp_path / "c.tsv", VOCAB) == d


def test_vocabulary_bad_hex_line(tmp_path):
    path = tmp_path / "v.tsv"
    path.write_text("#emocomb-vocab\tv1\n0\t1F602\t5\n1\tXYZ\t3\n", encoding="utf-8")
    with pytest.raises(FormatError) as exc:
        formats.read_vocabulary(path)
    assert exc.value.line == 3


def test_dictionary_bad_hex_line(tmp_path):
    d = mine_candidates(SAMPLES, 10)
    formats.write_dictionary(tmp_path / "c.tsv", d, VOCAB)
    with open(tmp_path / "c.tsv", "a", encoding="utf-8") as f:
        f.write("1F60G\t1\n")
    with pytest.raises(FormatError) as exc:
        formats.read_dictionary(tmp_path / "c.tsv", VOCAB)
    assert exc.value.line == len(d) + 2


def test_empty_dataset(tmp_path):
    (tmp_path / "d.jsonl").write_text("")
    with pytest.raises(DataError, match="no samples"):
        formats.read_dataset(tmp_path / "d.jsonl", VOCAB)
    formats.write_dataset(tmp_path / "h.jsonl", [], VOCAB)
    with pytest.raises(DataError, match="no samples"):
        formats.read_dataset(tmp_path / "h.jsonl", VOCAB)


def test_dataset_version_mismatch(tmp_path):
    path = tmp_path / "d.jsonl"
    formats.write_dataset(path, SAMPLES, VOCAB)
    text = path.read_text(encoding="utf-8").replace('"version": 1', '"version": 7')
    path.write_text(text, encoding="utf-8")
    with pytest.raises(FormatError, match="version"):
        formats.read_dataset(path, VOCAB)


def test_dataset_malformed_line(tmp_path):
    path = tmp_path / "d.jsonl"
    formats.write_dataset(path, SAMPLES, VOCAB)
    with open(path, "a", encoding="utf-8") as f:
        f.write('{"context": "x", "target": ["🐶"]}\n')
    with pytest.raises(FormatError) as exc:
        formats.read_dataset(path, VOCAB)
    assert exc.value.line == 5


def test_artifacts_tied_to_vocabulary(tmp_path):
    other = EmojiVocabulary((("😂", 6), ("👨‍💻", 3), ("❤", 3)))
    formats.write_dataset(tmp_path / "d.jsonl", SAMPLES, VOCAB)
    formats.write_dictionary(tmp_path / "c.tsv", mine_candidates(SAMPLES, 5), VOCAB)
    with pytest.raises(DataError, match="different vocabulary"):
        formats.read_dataset(tmp_path / "d.jsonl", other)
    with pytest.raises(DataError, match="different vocabulary"):
        formats.read_dictionary(tmp_path / "c.tsv", other)


def test_corpus_reader(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text('{"text": "a 😂", "id": 4}\n\n{"text": "b"}\n', encoding="utf-8")
    assert formats.read_corpus(path) == ["a 😂", "b"]
    path.write_text('{"text": "a"}\n{"body": "b"}\n', encoding="utf-8")
    with pytest.raises(FormatError) as exc:
        formats.read_corpus(path)
    assert exc.value.line == 2


def test_atomic_write_leaves_no_temp_on_failure(tmp_path):
    class Boom(str):
        def encode(self, *a):
            raise RuntimeError("boom")

    with pytest.raises(RuntimeError):
        formats.atomic_write(tmp_path / "x.txt", Boom("data"))
    assert list(tmp_path.iterdir()) == []

"""Binary serialization of trained models.

The format is fixed-layout and little-endian so that saving the same
model twice produces byte-identical files:

    magic "CTGZMODL" | u32 version | u32 section count | sections

Each section is a u32 name length, the ASCII name, a u64 payload length,
and the payload. Version 1 has exactly five sections in this order:
metadata, vocabulary, idf, classes, pairs. Strings are u32-length-prefixed
UTF-8; numeric arrays are raw little-endian int64 or float64. Pair weights
are stored sparse (count, indices, values) and rebuilt dense on load.

The creation timestamp comes from SOURCE_DATE_EPOCH when set and is zero
otherwise, so reruns of the same training produce identical files.

Writes go to a temporary file in the target directory followed by an
atomic rename; a crashed save never leaves a half-written model behind.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .calibration import CalibratedPair, SigmoidParams
from .model import MulticlassModel
from .svm import BinaryLinearClassifier
from .textprep import vocabulary_from_counts
from .vectorize import IdfTable

MAGIC = b"CTGZMODL"
FORMAT_VERSION = 1
SECTION_ORDER = ("metadata", "vocabulary", "idf", "classes", "pairs")


class PersistError(ValueError):
    pass


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


class _Writer:
    def __init__(self) -> None:
        self.parts: list[bytes] = []

    def u32(self, v: int) -> None:
        self.parts.append(struct.pack("<I", v))

    def u64(self, v: int) -> None:
        self.parts.append(struct.pack("<Q", v))

    def f64(self, v: float) -> None:
        self.parts.append(struct.pack("<d", v))

    def string(self, s: str) -> None:
        self.parts.append(_pack_str(s))

    def i64_array(self, a: np.ndarray) -> None:
        self.parts.append(np.ascontiguousarray(a, dtype="<i8").tobytes())

    def f64_array(self, a: np.ndarray) -> None:
        self.parts.append(np.ascontiguousarray(a, dtype="<f8").tobytes())

    def bytes_out(self) -> bytes:
        return b"".join(self.parts)


class _Reader:
    def __init__(self, buf: bytes, label: str) -> None:
        self.buf = buf
        self.offset = 0
        self.label = label

    def take(self, n: int) -> bytes:
        if self.offset + n > len(self.buf):
            raise PersistError(f"truncated model file in {self.label}")
        out = self.buf[self.offset : self.offset + n]
        self.offset += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]

    def string(self) -> str:
        n = self.u32()
        return self.take(n).decode("utf-8")

    def i64_array(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(count * 8), dtype="<i8").astype(np.int64)

    def f64_array(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(count * 8), dtype="<f8").astype(np.float64)

    def done(self) -> None:
        if self.offset != len(self.buf):
            raise PersistError(
                f"{len(self.buf) - self.offset} unexpected trailing bytes in {self.label}"
            )


def _encode_metadata(model: MulticlassModel) -> bytes:
    w = _Writer()
    created_at = int(os.environ.get("SOURCE_DATE_EPOCH", "0") or 0)
    w.u64(created_at)
    w.string(json.dumps(model.config, sort_keys=True, separators=(",", ":")))
    return w.bytes_out()


def _encode_vocabulary(model: MulticlassModel) -> bytes:
    vocab = model.vocabulary
    w = _Writer()
    w.u32(len(vocab))
    for word in vocab.words:
        w.string(word)
    w.i64_array(vocab.doc_freq)
    w.i64_array(vocab.corpus_freq)
    return w.bytes_out()


def _encode_idf(model: MulticlassModel) -> bytes:
    w = _Writer()
    w.u64(model.idf.n_docs)
    w.f64_array(model.idf.values)
    return w.bytes_out()


def _encode_classes(model: MulticlassModel) -> bytes:
    w = _Writer()
    w.u32(len(model.classes))
    for code in model.classes:
        w.string(code)
    return w.bytes_out()


def _encode_pairs(model: MulticlassModel) -> bytes:
    w = _Writer()
    w.u32(len(model.pairs))
    for pair in model.pairs:
        clf = pair.classifier
        w.string(clf.positive_class)
        w.string(clf.negative_class)
        w.f64(pair.sigmoid.A)
        w.f64(pair.sigmoid.B)
        w.f64(clf.bias)
        nz = np.flatnonzero(clf.weights)
        w.u32(len(nz))
        w.i64_array(nz)
        w.f64_array(clf.weights[nz])
    return w.bytes_out()


def serialize_model(model: MulticlassModel) -> bytes:
    encoders = {
        "metadata": _encode_metadata,
        "vocabulary": _encode_vocabulary,
        "idf": _encode_idf,
        "classes": _encode_classes,
        "pairs": _encode_pairs,
    }
    out = _Writer()
    out.parts.append(MAGIC)
    out.u32(FORMAT_VERSION)
    out.u32(len(SECTION_ORDER))
    for name in SECTION_ORDER:
        payload = encoders[name](model)
        out.string(name)
        out.u64(len(payload))
        out.parts.append(payload)
    return out.bytes_out()


def save_model(model: MulticlassModel, path: Path | str) -> int:
    """Write the model atomically; returns the number of bytes written."""
    path = Path(path)
    blob = serialize_model(model)
    try:
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(blob)
            os.replace(tmp_name, path)
        except BaseException:
            os.unlink(tmp_name)
            raise
    except OSError as e:
        raise PersistError(f"cannot write model file {path}: {e}") from e
    return len(blob)


def _decode_metadata(buf: bytes) -> dict:
    r = _Reader(buf, "section 'metadata'")
    created_at = r.u64()
    raw = r.string()
    r.done()
    try:
        config = json.loads(raw)
    except json.JSONDecodeError as e:
        raise PersistError(f"invalid config JSON in section 'metadata': {e}") from e
    if not isinstance(config, dict):
        raise PersistError("config in section 'metadata' is not an object")
    return {"created_at": created_at, "config": config}


def load_model(path: Path | str) -> MulticlassModel:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as e:
        raise PersistError(f"cannot read model file {path}: {e}") from e

    header = _Reader(blob, "header")
    magic = header.take(len(MAGIC))
    if magic != MAGIC:
        raise PersistError("not a model file (bad magic bytes)")
    version = header.u32()
    if version != FORMAT_VERSION:
        raise PersistError(
            f"unsupported model format version {version}, this build reads version {FORMAT_VERSION}"
        )
    count = header.u32()
    if count != len(SECTION_ORDER):
        raise PersistError(f"expected {len(SECTION_ORDER)} sections, found {count}")

    sections: dict[str, bytes] = {}
    for position in range(count):
        header.label = f"section table entry {position}"
        name = header.string()
        if name != SECTION_ORDER[position]:
            raise PersistError(
                f"expected section '{SECTION_ORDER[position]}' at position {position}, "
                f"found '{name}'"
            )
        header.label = f"section '{name}'"
        length = header.u64()
        sections[name] = header.take(length)
    header.label = "file body"
    header.done()

    meta = _decode_metadata(sections["metadata"])

    r = _Reader(sections["vocabulary"], "section 'vocabulary'")
    n_words = r.u32()
    words = [r.string() for _ in range(n_words)]
    doc_freq = r.i64_array(n_words)
    corpus_freq = r.i64_array(n_words)
    r.done()
    try:
        vocab = vocabulary_from_counts(words, doc_freq, corpus_freq)
    except ValueError as e:
        raise PersistError(f"invalid section 'vocabulary': {e}") from e

    r = _Reader(sections["idf"], "section 'idf'")
    n_docs = r.u64()
    idf_values = r.f64_array(n_words)
    r.done()
    try:
        idf = IdfTable(n_docs=n_docs, values=idf_values)
    except ValueError as e:
        raise PersistError(f"invalid section 'idf': {e}") from e

    r = _Reader(sections["classes"], "section 'classes'")
    n_classes = r.u32()
    classes = tuple(r.string() for _ in range(n_classes))
    r.done()

    r = _Reader(sections["pairs"], "section 'pairs'")
    n_pairs = r.u32()
    class_set = set(classes)
    pairs = []
    for _ in range(n_pairs):
        pos = r.string()
        neg = r.string()
        a = r.f64()
        b = r.f64()
        bias = r.f64()
        nnz = r.u32()
        idx = r.i64_array(nnz)
        vals = r.f64_array(nnz)
        if pos not in class_set or neg not in class_set:
            raise PersistError(
                f"section 'pairs' references unknown class '{pos if pos not in class_set else neg}'"
            )
        if nnz:
            if idx[0] < 0 or idx[-1] >= n_words or (np.diff(idx) <= 0).any():
                raise PersistError("section 'pairs' has out-of-range or unsorted weight indices")
        weights = np.zeros(n_words, dtype=np.float64)
        weights[idx] = vals
        pairs.append(
            CalibratedPair(
                classifier=BinaryLinearClassifier(
                    weights=weights, bias=bias, positive_class=pos, negative_class=neg
                ),
                sigmoid=SigmoidParams(A=a, B=b),
            )
        )
    r.done()

    try:
        return MulticlassModel(
            vocabulary=vocab,
            idf=idf,
            classes=classes,
            pairs=tuple(pairs),
            config=meta["config"],
        )
    except ValueError as e:
        raise PersistError(f"inconsistent model contents: {e}") from e


def file_digest(path: Path | str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def model_version(path: Path | str) -> str:
    return file_digest(path)[:12]

"""
Feature, pair, cost and coupling files.

The file extension selects the encoding:

- features: ``.brgf`` binary or ``.csv`` (header ``dim0,...,dimK`` plus an
  optional trailing ``label`` column)
- pairs: ``.csv`` with header ``source,target``
- costs: ``.bfcm`` binary or ``.csv`` (first line ``rows,cols,kind``)
- couplings: ``.bfpi`` binary or ``.csv`` (matrix only)

Binary layouts are little-endian and reject trailing bytes:

    BRGF | u32 rows | u32 cols | u8 has_labels | f64 x rows*cols | [i64 x rows]
    BFCM | u32 rows | u32 cols | u16 kind length | kind (ascii) | f64 x rows*cols
    BFPI | u32 rows | u32 cols | f64 x rows*cols | f64 x rows | f64 x cols
         | u32 report length | report JSON (utf-8)

Floats in CSV files are written with ``repr`` so they read back exactly.
"""

import csv
import io
import json
import struct
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from ..atomic import atomic_write_bytes, atomic_write_text
from ..errors import InputError, ParseError, ValidationError
from ..nn.checkpoint import BinaryReader
from ..types import CostMatrix, Coupling, FeatureMatrix, PairedSet, SolverReport

PathLike = Union[str, Path]

FEATURE_MAGIC = b"BRGF"
COST_MAGIC = b"BFCM"
COUPLING_MAGIC = b"BFPI"

FEATURE_SUFFIXES = (".brgf", ".csv")
COST_SUFFIXES = (".bfcm", ".csv")
COUPLING_SUFFIXES = (".bfpi", ".csv")


def _suffix(path: PathLike, allowed, what: str) -> str:
    suffix = Path(path).suffix.lower()
    if suffix not in allowed:
        raise InputError(
            f"{path}: unsupported {what} file extension {suffix!r}, expected one of {list(allowed)}",
            {"file": str(path), "allowed": list(allowed)},
        )
    return suffix


def _read_bytes(path: PathLike) -> bytes:
    return Path(path).read_bytes()


def _check_magic(reader: BinaryReader, magic: bytes) -> None:
    if reader.take(4, "magic") != magic:
        raise ParseError(
            f"{reader.source}: bad magic, expected {magic.decode()} at byte offset 0",
            {"file": reader.source, "byte_offset": 0},
        )


def _read_f64(reader: BinaryReader, count: int, what: str) -> np.ndarray:
    return np.frombuffer(reader.take(8 * count, what), dtype="<f8").astype(np.float64)


def _csv_rows(path: PathLike) -> List[List[str]]:
    text = Path(path).read_text(encoding="utf-8")
    return [row for row in csv.reader(io.StringIO(text)) if row]


def _csv_text(header: List[str], rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _parse_float(value: str, path: PathLike, row: int, column: int) -> float:
    try:
        return float(value)
    except ValueError:
        raise ParseError(
            f"{path}: row {row}, column {column}: not a number: {value!r}",
            {"file": str(path), "row": row, "column": column},
        ) from None


def _parse_int(value: str, path: PathLike, row: int, column: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ParseError(
            f"{path}: row {row}, column {column}: not an integer: {value!r}",
            {"file": str(path), "row": row, "column": column},
        ) from None


def _check_width(row: List[str], width: int, path: PathLike, number: int) -> None:
    if len(row) != width:
        raise ParseError(
            f"{path}: row {number} has {len(row)} columns, expected {width}",
            {"file": str(path), "row": number, "expected": width, "got": len(row)},
        )


def _float_matrix(rows: List[List[str]], width: int, path: PathLike, first_row: int) -> np.ndarray:
    values = np.empty((len(rows), width))
    for r, row in enumerate(rows):
        number = first_row + r
        _check_width(row, width, path, number)
        for c, cell in enumerate(row):
            values[r, c] = _parse_float(cell, path, number, c)
    return values


# ========== Features ==========

def encode_features(features: FeatureMatrix) -> bytes:
    rows, cols = features.points.shape
    chunks = [
        FEATURE_MAGIC,
        struct.pack("<IIB", rows, cols, int(features.has_labels())),
        np.ascontiguousarray(features.points, dtype="<f8").tobytes(),
    ]
    if features.has_labels():
        chunks.append(np.ascontiguousarray(features.labels, dtype="<i8").tobytes())
    return b"".join(chunks)


def decode_features(data: bytes, source: str = "<bytes>") -> FeatureMatrix:
    reader = BinaryReader(data, source)
    _check_magic(reader, FEATURE_MAGIC)
    rows, cols, has_labels = reader.unpack("<IIB", "header")
    if has_labels not in (0, 1):
        raise ParseError(
            f"{source}: label flag must be 0 or 1, got {has_labels} at byte offset 12",
            {"file": source, "byte_offset": 12},
        )
    points = _read_f64(reader, rows * cols, "feature values").reshape(rows, cols)
    labels = None
    if has_labels:
        labels = np.frombuffer(reader.take(8 * rows, "labels"), dtype="<i8").astype(np.int64)
    reader.finish()
    try:
        return FeatureMatrix(points, labels=labels)
    except InputError as exc:
        raise ValidationError(f"{source}: {exc.message}", dict(exc.details, file=source)) from exc


def _features_to_csv(features: FeatureMatrix) -> str:
    header = [f"dim{k}" for k in range(features.dim)]
    if features.has_labels():
        header.append("label")
    rows = []
    for i in range(features.n):
        row = [repr(float(v)) for v in features.points[i]]
        if features.has_labels():
            row.append(str(int(features.labels[i])))
        rows.append(row)
    return _csv_text(header, rows)


def _features_from_csv(path: PathLike) -> FeatureMatrix:
    rows = _csv_rows(path)
    if not rows:
        raise ParseError(f"{path}: empty file, expected a dim0,... header", {"file": str(path), "row": 1})
    header = rows[0]
    has_labels = bool(header) and header[-1] == "label"
    dims = header[:-1] if has_labels else header
    expected = [f"dim{k}" for k in range(len(dims))]
    if not dims or dims != expected:
        raise ParseError(
            f"{path}: row 1: bad header {header!r}, expected dim0..dimK with an optional label column",
            {"file": str(path), "row": 1},
        )
    width = len(header)
    body = rows[1:]
    if not body:
        raise ParseError(f"{path}: no data rows", {"file": str(path), "row": 2})
    points = np.empty((len(body), len(dims)))
    labels = np.empty(len(body), dtype=np.int64) if has_labels else None
    for r, row in enumerate(body):
        number = r + 2
        _check_width(row, width, path, number)
        for c in range(len(dims)):
            points[r, c] = _parse_float(row[c], path, number, c)
        if has_labels:
            labels[r] = _parse_int(row[-1], path, number, len(dims))
    try:
        return FeatureMatrix(points, labels=labels)
    except InputError as exc:
        raise ValidationError(f"{path}: {exc.message}", dict(exc.details, file=str(path))) from exc


def save_features(path: PathLike, features: FeatureMatrix) -> Path:
    if _suffix(path, FEATURE_SUFFIXES, "feature") == ".brgf":
        return atomic_write_bytes(path, encode_features(features))
    return atomic_write_text(path, _features_to_csv(features))


def load_features(path: PathLike) -> FeatureMatrix:
    """
    Raises:
        FileNotFoundError: Missing file
        ParseError: Malformed header, magic or row (with byte offset or row)
        ValidationError: Non-finite values
    """
    if _suffix(path, FEATURE_SUFFIXES, "feature") == ".brgf":
        return decode_features(_read_bytes(path), str(path))
    return _features_from_csv(path)


# ========== Pairs ==========

PAIR_HEADER = ["source", "target"]


def save_pairs(path: PathLike, pairs: PairedSet) -> Path:
    _suffix(path, (".csv",), "pairs")
    rows = [[str(int(i)), str(int(j))] for i, j in pairs.pairs]
    return atomic_write_text(path, _csv_text(PAIR_HEADER, rows))


def load_pairs(path: PathLike, n: Optional[int] = None, m: Optional[int] = None) -> PairedSet:
    """
    Read a ``source,target`` CSV; with n and m the indices are range-checked.

    Raises:
        ParseError: Bad header or row
        ValidationError: Negative, duplicated or out-of-range index
    """
    _suffix(path, (".csv",), "pairs")
    rows = _csv_rows(path)
    if not rows or [cell.strip() for cell in rows[0]] != PAIR_HEADER:
        raise ParseError(f"{path}: row 1: expected header 'source,target'", {"file": str(path), "row": 1})
    pairs = np.empty((len(rows) - 1, 2), dtype=np.int64)
    for r, row in enumerate(rows[1:]):
        number = r + 2
        _check_width(row, 2, path, number)
        pairs[r] = [_parse_int(row[0], path, number, 0), _parse_int(row[1], path, number, 1)]
    try:
        paired = PairedSet(pairs)
        if n is not None and m is not None:
            paired.validate(n, m)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc.message}", dict(exc.details, file=str(path))) from exc
    return paired


# ========== Costs ==========

def encode_cost(cost: CostMatrix) -> bytes:
    rows, cols = cost.shape
    kind = cost.kind.encode("ascii")
    return b"".join([
        COST_MAGIC,
        struct.pack("<IIH", rows, cols, len(kind)),
        kind,
        np.ascontiguousarray(cost.values, dtype="<f8").tobytes(),
    ])


def decode_cost(data: bytes, source: str = "<bytes>") -> CostMatrix:
    reader = BinaryReader(data, source)
    _check_magic(reader, COST_MAGIC)
    rows, cols, kind_len = reader.unpack("<IIH", "header")
    kind_offset = reader.offset
    try:
        kind = reader.take(kind_len, "cost kind").decode("ascii")
    except UnicodeDecodeError as exc:
        raise ParseError(
            f"{source}: cost kind is not ascii at byte offset {kind_offset}",
            {"file": source, "byte_offset": kind_offset},
        ) from exc
    values = _read_f64(reader, rows * cols, "cost values").reshape(rows, cols)
    reader.finish()
    try:
        return CostMatrix(values, kind)
    except InputError as exc:
        raise ValidationError(f"{source}: {exc.message}", dict(exc.details, file=source)) from exc


def save_cost(path: PathLike, cost: CostMatrix) -> Path:
    if _suffix(path, COST_SUFFIXES, "cost") == ".bfcm":
        return atomic_write_bytes(path, encode_cost(cost))
    rows, cols = cost.shape
    body = [[repr(float(v)) for v in row] for row in cost.values]
    return atomic_write_text(path, _csv_text([str(rows), str(cols), cost.kind], body))


def load_cost(path: PathLike) -> CostMatrix:
    if _suffix(path, COST_SUFFIXES, "cost") == ".bfcm":
        return decode_cost(_read_bytes(path), str(path))
    rows = _csv_rows(path)
    if not rows or len(rows[0]) != 3:
        raise ParseError(f"{path}: row 1: expected header 'rows,cols,kind'", {"file": str(path), "row": 1})
    n = _parse_int(rows[0][0], path, 1, 0)
    m = _parse_int(rows[0][1], path, 1, 1)
    if len(rows) - 1 != n:
        raise ParseError(
            f"{path}: header declares {n} rows but the file has {len(rows) - 1}",
            {"file": str(path), "row": len(rows)},
        )
    values = _float_matrix(rows[1:], m, path, 2)
    try:
        return CostMatrix(values.reshape(n, m), rows[0][2])
    except InputError as exc:
        raise ValidationError(f"{path}: {exc.message}", dict(exc.details, file=str(path))) from exc


# ========== Couplings ==========

def _report_from_dict(payload: Dict[str, Any]) -> SolverReport:
    fields = set(SolverReport.__dataclass_fields__)
    return SolverReport(**{k: v for k, v in payload.items() if k in fields})


def encode_coupling(pi: Coupling) -> bytes:
    rows, cols = pi.shape
    report = json.dumps(pi.report.to_dict(), sort_keys=True).encode("utf-8")
    return b"".join([
        COUPLING_MAGIC,
        struct.pack("<II", rows, cols),
        np.ascontiguousarray(pi.values, dtype="<f8").tobytes(),
        np.ascontiguousarray(pi.source_marginal, dtype="<f8").tobytes(),
        np.ascontiguousarray(pi.target_marginal, dtype="<f8").tobytes(),
        struct.pack("<I", len(report)),
        report,
    ])


def decode_coupling(data: bytes, source: str = "<bytes>") -> Coupling:
    reader = BinaryReader(data, source)
    _check_magic(reader, COUPLING_MAGIC)
    rows, cols = reader.unpack("<II", "header")
    values = _read_f64(reader, rows * cols, "coupling values").reshape(rows, cols)
    a = _read_f64(reader, rows, "source marginal")
    b = _read_f64(reader, cols, "target marginal")
    (report_len,) = reader.unpack("<I", "report length")
    report_offset = reader.offset
    try:
        payload = json.loads(reader.take(report_len, "report").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(
            f"{source}: invalid report JSON at byte offset {report_offset}: {exc}",
            {"file": source, "byte_offset": report_offset},
        ) from exc
    reader.finish()
    try:
        return Coupling(values, a, b, report=_report_from_dict(payload))
    except InputError as exc:
        raise ValidationError(f"{source}: {exc.message}", dict(exc.details, file=source)) from exc


def save_coupling(path: PathLike, pi: Coupling) -> Path:
    """The CSV form stores the matrix only; use ``.bfpi`` to keep marginals and report."""
    if _suffix(path, COUPLING_SUFFIXES, "coupling") == ".bfpi":
        return atomic_write_bytes(path, encode_coupling(pi))
    header = [f"t{j}" for j in range(pi.shape[1])]
    body = [[repr(float(v)) for v in row] for row in pi.values]
    return atomic_write_text(path, _csv_text(header, body))


def load_coupling(path: PathLike) -> Coupling:
    """A CSV coupling gets its realized row and column sums as marginals."""
    if _suffix(path, COUPLING_SUFFIXES, "coupling") == ".bfpi":
        return decode_coupling(_read_bytes(path), str(path))
    rows = _csv_rows(path)
    if not rows:
        raise ParseError(f"{path}: empty file", {"file": str(path), "row": 1})
    values = _float_matrix(rows[1:], len(rows[0]), path, 2)
    try:
        return Coupling(values, values.sum(axis=1), values.sum(axis=0), report=SolverReport(solver="file"))
    except InputError as exc:
        raise ValidationError(f"{path}: {exc.message}", dict(exc.details, file=str(path))) from exc


__all__ = [
    "FEATURE_MAGIC",
    "COST_MAGIC",
    "COUPLING_MAGIC",
    "encode_features",
    "decode_features",
    "save_features",
    "load_features",
    "save_pairs",
    "load_pairs",
    "encode_cost",
    "decode_cost",
    "save_cost",
    "load_cost",
    "encode_coupling",
    "decode_coupling",
    "save_coupling",
    "load_coupling",
]

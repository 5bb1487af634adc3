"""
BFCK checkpoint format.

Layout (little-endian):

    b"BFCK" | u8 version | u32 metadata length | metadata JSON (utf-8)
    | u32 tensor count | per tensor: u16 name length, name (utf-8),
      u8 ndim, u32 x ndim dims, f64 x prod(dims) values

Trailing bytes after the last tensor are rejected.
"""

import json
import struct
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np

from ..atomic import atomic_write_bytes
from ..errors import ParseError
from .params import ParamStore

MAGIC = b"BFCK"
VERSION = 1

_PARAM = "param/"
_MOMENT_M = "adam_m/"
_MOMENT_V = "adam_v/"


def encode_tensors(tensors: Mapping[str, np.ndarray], metadata: Optional[Dict[str, Any]] = None) -> bytes:
    meta = json.dumps(metadata or {}, sort_keys=True).encode("utf-8")
    chunks = [MAGIC, struct.pack("<BI", VERSION, len(meta)), meta, struct.pack("<I", len(tensors))]
    for name in sorted(tensors):
        value = np.ascontiguousarray(tensors[name], dtype="<f8")
        encoded_name = name.encode("utf-8")
        chunks.append(struct.pack("<H", len(encoded_name)))
        chunks.append(encoded_name)
        chunks.append(struct.pack("<B", value.ndim))
        chunks.append(struct.pack(f"<{value.ndim}I", *value.shape))
        chunks.append(value.tobytes())
    return b"".join(chunks)


class BinaryReader:
    """Sequential little-endian reader that reports truncation with byte offsets."""

    def __init__(self, data: bytes, source: str):
        self.data = data
        self.offset = 0
        self.source = source

    def take(self, size: int, what: str) -> bytes:
        if self.offset + size > len(self.data):
            raise ParseError(
                f"{self.source}: truncated while reading {what} at byte offset {self.offset}",
                {"file": self.source, "byte_offset": self.offset},
            )
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))

    def finish(self) -> None:
        if self.offset != len(self.data):
            raise ParseError(
                f"{self.source}: {len(self.data) - self.offset} trailing bytes at byte offset {self.offset}",
                {"file": self.source, "byte_offset": self.offset},
            )


def decode_tensors(data: bytes, source: str = "<bytes>") -> Tuple[Dict[str, np.ndarray], Dict[str, Any]]:
    reader = BinaryReader(data, source)
    if reader.take(4, "magic") != MAGIC:
        raise ParseError(f"{source}: bad magic, expected BFCK at byte offset 0", {"file": source, "byte_offset": 0})
    version, meta_len = reader.unpack("<BI", "header")
    if version != VERSION:
        raise ParseError(
            f"{source}: unsupported checkpoint version {version} at byte offset 4",
            {"file": source, "byte_offset": 4},
        )
    meta_offset = reader.offset
    try:
        metadata = json.loads(reader.take(meta_len, "metadata").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(
            f"{source}: invalid metadata JSON at byte offset {meta_offset}: {exc}",
            {"file": source, "byte_offset": meta_offset},
        ) from exc
    (count,) = reader.unpack("<I", "tensor count")
    tensors: Dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = reader.unpack("<H", "name length")
        name = reader.take(name_len, "name").decode("utf-8")
        (ndim,) = reader.unpack("<B", f"ndim of {name}")
        shape = reader.unpack(f"<{ndim}I", f"shape of {name}") if ndim else ()
        size = int(np.prod(shape)) if shape else 1
        raw = reader.take(8 * size, f"values of {name}")
        tensors[name] = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)
    reader.finish()
    return tensors, metadata


def save_param_store(
    path: Union[str, Path],
    store: ParamStore,
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    """Write parameters and Adam state atomically."""
    tensors: Dict[str, np.ndarray] = {}
    for name in store.names:
        tensors[_PARAM + name] = store.params[name]
        tensors[_MOMENT_M + name] = store.m[name]
        tensors[_MOMENT_V + name] = store.v[name]
    meta = dict(metadata or {})
    meta["adam_step"] = store.step
    return atomic_write_bytes(path, encode_tensors(tensors, meta))


def load_param_store(path: Union[str, Path]) -> Tuple[ParamStore, Dict[str, Any]]:
    data = Path(path).read_bytes()
    tensors, metadata = decode_tensors(data, str(path))
    params, m, v = {}, {}, {}
    for key, value in tensors.items():
        if key.startswith(_PARAM):
            params[key[len(_PARAM):]] = value
        elif key.startswith(_MOMENT_M):
            m[key[len(_MOMENT_M):]] = value
        elif key.startswith(_MOMENT_V):
            v[key[len(_MOMENT_V):]] = value
        else:
            raise ParseError(f"{path}: unexpected tensor {key!r}", {"file": str(path), "tensor": key})
    store = ParamStore(params=params, m=m, v=v, step=int(metadata.pop("adam_step", 0)))
    return store, metadata


__all__ = [
    "MAGIC",
    "VERSION",
    "BinaryReader",
    "encode_tensors",
    "decode_tensors",
    "save_param_store",
    "load_param_store",
]

"""Dense observation arrays over ``[p] x [n]`` or ``⋃_s [n]^s``.

Values are stored flat in canonical order: row-major ``p x n`` in matrix
mode; in tensor mode the arity blocks ``s = s1..s2`` are concatenated, each
block row-major over ``[n]^s`` (first index most significant). Tuples with
repeated vertices are included.

Binary layout (little-endian)::

    4s   magic  b"GMXO"
    I    format version (1)
    I    mode (0 = matrix, 1 = tensor)
    Q    n
    Q    p in matrix mode, k in tensor mode
    Q    s1 (0 in matrix mode)
    Q    s2 (0 in matrix mode)
    f8 * size   values
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch

MAGIC = b"GMXO"
VERSION = 1
_HEADER = struct.Struct("<4sIIQQQQ")
MAX_TENSOR_ENTRIES = 10**8


@dataclass(frozen=True)
class ObservationShape:
    mode: str
    n: int
    p: int = 0
    s1: int = 0
    s2: int = 0
    k: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.mode == "matrix":
            if self.p < 1 or self.n < 1:
                raise ValueError(f"matrix shape needs p, n >= 1, got p={self.p}, n={self.n}")
        elif self.mode == "tensor":
            if not 2 <= self.s1 <= self.s2:
                raise ValueError(f"tensor arities need 2 <= s1 <= s2, got {self.s1}, {self.s2}")
            if self.n ** self.s2 > MAX_TENSOR_ENTRIES:
                raise ValueError(
                    f"n^s2 = {self.n ** self.s2} exceeds the dense limit {MAX_TENSOR_ENTRIES}"
                )
        else:
            raise ValueError(f"unknown observation mode {self.mode!r}")

    @classmethod
    def matrix(cls, p: int, n: int) -> "ObservationShape":
        return cls("matrix", n, p=p)

    @classmethod
    def tensor(cls, n: int, s1: int, s2: int, k: int = 0) -> "ObservationShape":
        return cls("tensor", n, s1=s1, s2=s2, k=k)

    @property
    def arities(self) -> range:
        return range(self.s1, self.s2 + 1)

    @property
    def size(self) -> int:
        if self.mode == "matrix":
            return self.p * self.n
        return sum(self.n ** s for s in self.arities)

    def block_slice(self, s: int) -> slice:
        """Flat positions of the arity-s block."""
        if self.mode != "tensor" or s not in self.arities:
            raise ValueError(f"no arity-{s} block in {self}")
        start = sum(self.n ** r for r in range(self.s1, s))
        return slice(start, start + self.n ** s)


@dataclass(frozen=True, eq=False)
class ObservationMatrix:
    shape: ObservationShape
    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64).reshape(-1)
        if values.size != self.shape.size:
            raise DimensionMismatch(
                f"{values.size} values do not fit shape of size {self.shape.size}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("observation values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def check_shape(self, other: "ObservationShape | ObservationMatrix") -> None:
        shape = other.shape if isinstance(other, ObservationMatrix) else other
        if shape != self.shape:
            raise DimensionMismatch(f"shape mismatch: {self.shape} vs {shape}")

    def as_matrix(self) -> np.ndarray:
        if self.shape.mode != "matrix":
            raise ValueError("as_matrix() needs a matrix-mode observation")
        return self.values.reshape(self.shape.p, self.shape.n)

    def block(self, s: int) -> np.ndarray:
        """The arity-s block as an array of shape ``(n,) * s``."""
        return self.values[self.shape.block_slice(s)].reshape((self.shape.n,) * s)

    # -- serialization ------------------------------------------------------

    def to_bytes(self) -> bytes:
        sh = self.shape
        if sh.mode == "matrix":
            header = _HEADER.pack(MAGIC, VERSION, 0, sh.n, sh.p, 0, 0)
        else:
            header = _HEADER.pack(MAGIC, VERSION, 1, sh.n, sh.k, sh.s1, sh.s2)
        return header + self.values.astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "ObservationMatrix":
        if len(data) < _HEADER.size:
            raise ValueError("truncated observation file")
        magic, version, mode, n, pk, s1, s2 = _HEADER.unpack_from(data)
        if magic != MAGIC or version != VERSION:
            raise ValueError("not a version-1 observation file")
        if mode == 0:
            shape = ObservationShape.matrix(pk, n)
        elif mode == 1:
            shape = ObservationShape.tensor(n, s1, s2, k=pk)
        else:
            raise ValueError(f"unknown mode code {mode}")
        body = data[_HEADER.size:]
        if len(body) != 8 * shape.size:
            raise ValueError(f"expected {shape.size} values, file holds {len(body) / 8:g}")
        return cls(shape, np.frombuffer(body, dtype="<f8").astype(np.float64))

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "ObservationMatrix":
        return cls.from_bytes(Path(path).read_bytes())

    def to_json(self) -> str:
        sh = self.shape
        doc = {"mode": sh.mode, "n": sh.n}
        if sh.mode == "matrix":
            doc["p"] = sh.p
        else:
            doc.update(k=sh.k, s1=sh.s1, s2=sh.s2)
        doc["values"] = self.values.tolist()
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "ObservationMatrix":
        doc = json.loads(text)
        if doc["mode"] == "matrix":
            shape = ObservationShape.matrix(doc["p"], doc["n"])
        else:
            shape = ObservationShape.tensor(doc["n"], doc["s1"], doc["s2"], k=doc.get("k", 0))
        return cls(shape, np.asarray(doc["values"], dtype=np.float64))

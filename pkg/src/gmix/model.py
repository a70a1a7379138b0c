"""Signal functions, noise fields and the model specification.

Matrix mode observes a ``p x n`` array with entries ``theta(x, i, x(j))``;
four signal families are provided. Hypergraph (tensor) mode observes
``phi(x(a_1), ..., x(a_s))`` for every ordered tuple in ``[n]^s`` and every
arity ``s1 <= s <= s2``. Tuples with repeated vertices are part of the
observation; many hypergraph conventions drop them, this one does not.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import ClassVar, Mapping, Sequence, Union

import numpy as np

from .arrays import ObservationMatrix, ObservationShape
from .assignment import Assignment
from .errors import DimensionMismatch, ModelError


def _key(labels: Sequence[int]) -> str:
    return ",".join(str(int(v)) for v in labels)


def _parse_key(key: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in key.split(","))
    except ValueError:
        raise ModelError(f"bad label-tuple key {key!r}; expected e.g. '1,1,2'") from None


# -- matrix-mode signals ------------------------------------------------------


@dataclass(frozen=True)
class CommunityIndicator:
    """p = k; entry (a, j) is 1 when vertex j sits in community a."""

    kind: ClassVar[str] = "community_indicator"

    def rows(self, n: int, k: int) -> int:
        return k

    def batch(self, codes: np.ndarray, k: int) -> np.ndarray:
        return (np.arange(k)[None, :, None] == codes[:, None, :]).astype(np.float64)

    def preserves(self, w: np.ndarray, k: int) -> bool:
        return bool(np.all(w == np.arange(k)))


@dataclass(frozen=True)
class VertexIndicator:
    """p = n; entry (i, j) is 1 when vertices i and j share a community."""

    kind: ClassVar[str] = "vertex_indicator"

    def rows(self, n: int, k: int) -> int:
        return n

    def batch(self, codes: np.ndarray, k: int) -> np.ndarray:
        return (codes[:, :, None] == codes[:, None, :]).astype(np.float64)

    def preserves(self, w: np.ndarray, k: int) -> bool:
        return True


@dataclass(frozen=True)
class LabelDifference:
    """p = n; entry (i, j) is ``x(i) - x(j)``."""

    kind: ClassVar[str] = "label_difference"

    def rows(self, n: int, k: int) -> int:
        return n

    def batch(self, codes: np.ndarray, k: int) -> np.ndarray:
        return (codes[:, :, None] - codes[:, None, :]).astype(np.float64)

    def preserves(self, w: np.ndarray, k: int) -> bool:
        # x(i) - a = w(x(i)) - w(a) for every pair forces w to be a translation
        return bool(np.all(w == np.arange(k)))


@dataclass(frozen=True, eq=False)
class TableDriven:
    """Entry (i, j) is ``table[i, x(j)]``: each community has a fixed p-vector."""

    table: np.ndarray
    kind: ClassVar[str] = "table"

    def __post_init__(self):
        table = np.array(self.table, dtype=np.float64, ndmin=2)
        if table.ndim != 2 or table.shape[0] < 1:
            raise ModelError("signal table must be a non-empty p x k array")
        if not np.all(np.isfinite(table)):
            raise ModelError("signal table entries must be finite")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    def rows(self, n: int, k: int) -> int:
        return self.table.shape[0]

    def batch(self, codes: np.ndarray, k: int) -> np.ndarray:
        if codes.size and codes.max() >= self.table.shape[1]:
            raise ModelError(
                f"signal table has {self.table.shape[1]} columns, no entry for "
                f"community {int(codes.max()) + 1}"
            )
        return np.moveaxis(self.table[:, codes], 0, 1)

    def preserves(self, w: np.ndarray, k: int) -> bool:
        if self.table.shape[1] < k:
            raise ModelError(f"signal table has {self.table.shape[1]} columns, k={k}")
        return bool(np.array_equal(self.table[:, :k], self.table[:, w]))


ThetaSpec = Union[CommunityIndicator, VertexIndicator, LabelDifference, TableDriven]


# -- hypergraph signal ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HypergraphPhi:
    """Weights for ordered hyperedges of arity s1..s2.

    With ``table=None`` the weight is ``2**s`` on tuples whose labels all
    agree and 0 otherwise. Otherwise ``table`` maps label tuples (1-based)
    to nonnegative weights and must cover ``[k]^s`` for every arity used.
    """

    s1: int
    s2: int
    table: Mapping[tuple[int, ...], float] | None = None
    kind: ClassVar[str] = "hypergraph"

    def __post_init__(self):
        if not 2 <= self.s1 <= self.s2:
            raise ModelError(f"arities need 2 <= s1 <= s2, got s1={self.s1}, s2={self.s2}")
        if self.s2 > 4:
            raise ModelError(f"arity {self.s2} above the supported maximum of 4")
        if self.table is not None:
            table = {tuple(int(v) for v in key): float(val) for key, val in self.table.items()}
            neg = [key for key, val in table.items() if not val >= 0]
            if neg:
                raise ModelError(f"phi must be nonnegative, phi{neg[0]} is not")
            object.__setattr__(self, "table", table)

    @property
    def arities(self) -> range:
        return range(self.s1, self.s2 + 1)

    def dense(self, s: int, k: int) -> np.ndarray:
        if self.table is None:
            arr = np.zeros((k,) * s)
            for a in range(k):
                arr[(a,) * s] = 2.0 ** s
            return arr
        arr = np.empty((k,) * s)
        for idx in itertools.product(range(k), repeat=s):
            labels = tuple(i + 1 for i in idx)
            try:
                arr[idx] = self.table[labels]
            except KeyError:
                raise ModelError(f"phi table has no entry for {_key(labels)!r}") from None
        return arr


# -- noise fields ---------------------------------------------------------------


@dataclass(frozen=True)
class ConstantSigma:
    """The same noise intensity on every entry."""

    sigma: float
    b1: float | None = None
    kind: ClassVar[str] = "constant"

    def __post_init__(self):
        if not self.sigma > 0 or not math.isfinite(self.sigma):
            raise ModelError(f"sigma must be positive and finite, got {self.sigma}")
        _check_b1(self.b1, self.sigma)

    def scaled(self, t: float) -> "ConstantSigma":
        return ConstantSigma(self.sigma * t, None if self.b1 is None else self.b1 * t)


@dataclass(frozen=True, eq=False)
class MatrixSigma:
    """Explicit per-entry intensities in canonical observation order."""

    values: np.ndarray
    b1: float | None = None
    kind: ClassVar[str] = "matrix"

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if not np.all(values > 0) or not np.all(np.isfinite(values)):
            raise ModelError("every sigma entry must be positive and finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        _check_b1(self.b1, float(values.max()))

    def scaled(self, t: float) -> "MatrixSigma":
        return MatrixSigma(self.values * t, None if self.b1 is None else self.b1 * t)


@dataclass(frozen=True, eq=False)
class CommunitySigma:
    """Hypergraph intensities that depend only on the true communities.

    ``sigma(a_1..a_s) = sigma_bar(y(a_1), ..., y(a_s))`` for the true
    assignment ``truth``; label tuples missing from ``table`` take ``default``.
    """

    truth: Assignment
    table: Mapping[tuple[int, ...], float] = field(default_factory=dict)
    default: float | None = 1.0
    b1: float | None = None
    kind: ClassVar[str] = "community"

    def __post_init__(self):
        table = {tuple(int(v) for v in key): float(val) for key, val in self.table.items()}
        vals = list(table.values()) + ([] if self.default is None else [self.default])
        if any(not v > 0 or not math.isfinite(v) for v in vals):
            raise ModelError("every sigma_bar entry must be positive and finite")
        object.__setattr__(self, "table", table)
        if vals:
            _check_b1(self.b1, max(vals))

    def dense(self, s: int, k: int) -> np.ndarray:
        arr = np.empty((k,) * s)
        for idx in itertools.product(range(k), repeat=s):
            labels = tuple(i + 1 for i in idx)
            val = self.table.get(labels, self.default)
            if val is None:
                raise ModelError(f"sigma_bar has no entry for {_key(labels)!r} and no default")
            arr[idx] = val
        return arr

    def scaled(self, t: float) -> "CommunitySigma":
        return CommunitySigma(
            self.truth,
            {key: val * t for key, val in self.table.items()},
            None if self.default is None else self.default * t,
            None if self.b1 is None else self.b1 * t,
        )


NoiseField = Union[ConstantSigma, MatrixSigma, CommunitySigma]


def _check_b1(b1, largest):
    if b1 is None:
        return
    if not b1 > 0:
        raise ModelError(f"B1 must be positive, got {b1}")
    if largest > b1 * (1 + 1e-12):
        raise ModelError(f"sigma entry {largest} exceeds the declared bound B1={b1}")


# -- model ------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ModelSpec:
    n: int
    k: int
    signal: ThetaSpec | HypergraphPhi
    noise: NoiseField
    c: float = 0.5

    def __post_init__(self):
        if not self.n >= self.k >= 2:
            raise ModelError(f"need n >= k >= 2, got n={self.n}, k={self.k}")
        if not 0 < self.c < 1:
            raise ModelError(f"c must lie in (0, 1), got {self.c}")
        try:
            shape = self.shape
        except ValueError as exc:
            raise ModelError(str(exc)) from None
        noise = self.noise
        if isinstance(noise, MatrixSigma) and noise.values.size != shape.size:
            raise ModelError(
                f"sigma has {noise.values.size} entries, observation has {shape.size}"
            )
        if isinstance(noise, CommunitySigma):
            if not self.is_tensor:
                raise ModelError("community sigma_bar applies to hypergraph models only")
            if noise.truth.n != self.n or noise.truth.k != self.k:
                raise ModelError("sigma_bar truth assignment does not match n, k")

    @property
    def is_tensor(self) -> bool:
        return isinstance(self.signal, HypergraphPhi)

    @cached_property
    def shape(self) -> ObservationShape:
        if self.is_tensor:
            return ObservationShape.tensor(self.n, self.signal.s1, self.signal.s2, k=self.k)
        return ObservationShape.matrix(self.signal.rows(self.n, self.k), self.n)

    @property
    def b1(self) -> float | None:
        return self.noise.b1

    @cached_property
    def _phi_tables(self) -> dict[int, np.ndarray]:
        return {s: self.signal.dense(s, self.k) for s in self.signal.arities}

    def phi_table(self, s: int) -> np.ndarray:
        """Dense ``(k,) * s`` weight table for arity s (hypergraph mode)."""
        if not self.is_tensor:
            raise ModelError("phi tables exist only in hypergraph mode")
        return self._phi_tables[s]

    def sigma_bar_table(self, s: int) -> np.ndarray:
        """Dense ``(k,) * s`` community noise table (hypergraph mode)."""
        if isinstance(self.noise, ConstantSigma):
            return np.full((self.k,) * s, self.noise.sigma)
        if isinstance(self.noise, CommunitySigma):
            return self.noise.dense(s, self.k)
        raise ModelError("per-entry sigma has no community-level table")

    @cached_property
    def sigma(self) -> np.ndarray:
        """Flat sigma field in canonical order."""
        noise = self.noise
        if isinstance(noise, ConstantSigma):
            out = np.full(self.shape.size, noise.sigma)
        elif isinstance(noise, MatrixSigma):
            out = noise.values.copy()
        else:
            codes = noise.truth.codes
            parts = []
            for s in self.signal.arities:
                tab = noise.dense(s, self.k)
                parts.append(tab[np.ix_(*([codes] * s))].reshape(-1))
            out = np.concatenate(parts)
        out.setflags(write=False)
        return out

    @cached_property
    def weights(self) -> np.ndarray:
        """Flat ``Phi * Phi`` (reciprocal variances)."""
        w = 1.0 / (self.sigma * self.sigma)
        w.setflags(write=False)
        return w

    def scaled(self, t: float) -> "ModelSpec":
        """Same model with every sigma (and B1) multiplied by t."""
        if not t > 0:
            raise ModelError(f"sigma scale must be positive, got {t}")
        return ModelSpec(self.n, self.k, self.signal, self.noise.scaled(t), self.c)

    def check(self, x: Assignment) -> None:
        if x.n != self.n or x.k != self.k:
            raise DimensionMismatch(
                f"assignment has (n={x.n}, k={x.k}), model has (n={self.n}, k={self.k})"
            )


def batch_signal(model: ModelSpec, codes: np.ndarray) -> np.ndarray:
    """Flat signal rows for a batch of 0-based label vectors, shape ``(m, size)``."""
    codes = np.asarray(codes, dtype=np.intp)
    if codes.ndim == 1:
        codes = codes[None, :]
    m, n = codes.shape
    if not model.is_tensor:
        return model.signal.batch(codes, model.k).reshape(m, -1)
    parts = []
    for s in model.signal.arities:
        tab = model.phi_table(s)
        index = tuple(
            codes.reshape((m,) + (1,) * r + (n,) + (1,) * (s - r - 1)) for r in range(s)
        )
        parts.append(tab[index].reshape(m, -1))
    return np.concatenate(parts, axis=1)


def build_signal(model: ModelSpec, x: Assignment) -> ObservationMatrix:
    model.check(x)
    return ObservationMatrix(model.shape, batch_signal(model, x.codes)[0])


def phi_field(model: ModelSpec) -> ObservationMatrix:
    """Entrywise reciprocal of the noise field."""
    sigma = model.sigma
    if not np.all(sigma > 0):
        raise ModelError("sigma must be strictly positive everywhere")
    return ObservationMatrix(model.shape, 1.0 / sigma)


def is_theta_preserving(model: ModelSpec, w: Sequence[int]) -> bool:
    """Relabelling ``w`` (1-based images of 1..k) leaves the signal function unchanged."""
    w0 = np.asarray(w, dtype=np.intp) - 1
    if sorted(w0.tolist()) != list(range(model.k)):
        return False
    if not model.is_tensor:
        return model.signal.preserves(w0, model.k)
    for s in model.signal.arities:
        tab = model.phi_table(s)
        if not np.array_equal(tab[np.ix_(*([w0] * s))], tab):
            return False
    return True


# -- JSON documents -------------------------------------------------------------


def signal_to_dict(signal) -> dict:
    if isinstance(signal, HypergraphPhi):
        phi = "block" if signal.table is None else {_key(k): v for k, v in signal.table.items()}
        return {"kind": "hypergraph", "s1": signal.s1, "s2": signal.s2, "phi": phi}
    if isinstance(signal, TableDriven):
        return {"kind": "table", "table": signal.table.tolist()}
    return {"kind": signal.kind}


def signal_from_dict(doc: Mapping) -> ThetaSpec | HypergraphPhi:
    kind = doc.get("kind")
    if kind == "community_indicator":
        return CommunityIndicator()
    if kind == "vertex_indicator":
        return VertexIndicator()
    if kind == "label_difference":
        return LabelDifference()
    if kind == "table":
        return TableDriven(np.asarray(doc["table"], dtype=np.float64))
    if kind == "hypergraph":
        phi = doc.get("phi", "block")
        if phi == "block":
            table = None
        elif isinstance(phi, Mapping):
            table = {_parse_key(key): val for key, val in phi.items()}
        else:
            raise ModelError(f"phi must be 'block' or a table, got {phi!r}")
        return HypergraphPhi(int(doc["s1"]), int(doc["s2"]), table)
    raise ModelError(f"unknown signal kind {kind!r}")


def noise_to_dict(noise) -> dict:
    if isinstance(noise, ConstantSigma):
        doc = {"kind": "constant", "sigma": noise.sigma}
    elif isinstance(noise, MatrixSigma):
        doc = {"kind": "matrix", "values": noise.values.tolist()}
    else:
        doc = {
            "kind": "community",
            "truth": list(noise.truth.labels),
            "sigma_bar": {_key(k): v for k, v in noise.table.items()},
            "default": noise.default,
        }
    if noise.b1 is not None:
        doc["B1"] = noise.b1
    return doc


def noise_from_dict(doc: Mapping, k: int, truth: Assignment | None = None) -> NoiseField:
    kind = doc.get("kind")
    b1 = doc.get("B1")
    if kind == "constant":
        return ConstantSigma(float(doc["sigma"]), b1)
    if kind == "matrix":
        return MatrixSigma(np.asarray(doc["values"], dtype=np.float64), b1)
    if kind == "community":
        if "truth" in doc:
            truth = Assignment(doc["truth"], k)
        if truth is None:
            raise ModelError("community sigma_bar needs the true assignment")
        table = {_parse_key(key): val for key, val in doc.get("sigma_bar", {}).items()}
        return CommunitySigma(truth, table, doc.get("default", 1.0), b1)
    raise ModelError(f"unknown noise kind {kind!r}")


def model_to_dict(model: ModelSpec) -> dict:
    return {
        "n": model.n,
        "k": model.k,
        "c": float(model.c),
        "signal": signal_to_dict(model.signal),
        "noise": noise_to_dict(model.noise),
    }


def model_from_dict(doc: Mapping, truth: Assignment | None = None) -> ModelSpec:
    """Parse a model document; ``truth`` fills a community noise field lacking one."""
    try:
        n, k = int(doc["n"]), int(doc["k"])
        signal = signal_from_dict(doc["signal"])
        noise = noise_from_dict(doc["noise"], k, truth)
        return ModelSpec(n, k, signal, noise, float(doc.get("c", 0.5)))
    except KeyError as exc:
        raise ModelError(f"model document is missing {exc.args[0]!r}") from None

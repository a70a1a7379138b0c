"""Exact maximum-likelihood assignment by exhaustive enumeration.

Candidates are enumerated in lexicographic order of their label sequences
(base-k counting with vertex 1 most significant), skipping branches that
can no longer meet the per-community size bounds. Ties within ``TIE_TOL``
of the minimum resolve to the first candidate in that order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .arrays import ObservationMatrix
from .assignment import Assignment, as_fraction, is_equivalent
from .errors import BudgetExceeded, DimensionMismatch
from .model import ModelSpec, batch_signal

DEFAULT_BUDGET = 3 ** 10
TIE_TOL = 1e-12
IDENTITY_RTOL = 1e-9
_CACHE_ENTRIES = 20_000_000
_BLOCK_ROWS = 4096


@dataclass(frozen=True)
class FractionFloor:
    """Assignments whose every community holds at least ``c_eff * n`` vertices."""

    c_eff: Fraction

    def bounds(self, n: int, k: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        lo = math.ceil(as_fraction(self.c_eff) * n)
        return (lo,) * k, (n - (k - 1) * lo,) * k

    def required(self, n: int, k: int) -> int:
        return k ** n

    def contains(self, x: Assignment) -> bool:
        c = as_fraction(self.c_eff)
        return all(Fraction(m, x.n) >= c for m in x.community_sizes())


@dataclass(frozen=True)
class FixedSizes:
    """Assignments with exactly ``sizes[i]`` vertices in community i + 1."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(m) for m in self.sizes))
        if any(m < 0 for m in self.sizes):
            raise ValueError(f"community sizes must be nonnegative, got {self.sizes}")

    def bounds(self, n: int, k: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        if len(self.sizes) != k or sum(self.sizes) != n:
            raise DimensionMismatch(f"sizes {self.sizes} do not partition n={n} into k={k}")
        return self.sizes, self.sizes

    def required(self, n: int, k: int) -> int:
        self.bounds(n, k)
        count = math.factorial(n)
        for m in self.sizes:
            count //= math.factorial(m)
        return count

    def contains(self, x: Assignment) -> bool:
        return x.community_sizes() == self.sizes


SearchSpace = FractionFloor | FixedSizes


@lru_cache(maxsize=16)
def _enumerate(n: int, k: int, lower: tuple, upper: tuple) -> np.ndarray:
    out: list[tuple[int, ...]] = []
    counts = [0] * k
    labels = [0] * n

    def rec(v: int, deficit: int) -> None:
        if n - v < deficit:
            return
        if v == n:
            out.append(tuple(labels))
            return
        for a in range(k):
            if counts[a] < upper[a]:
                counts[a] += 1
                labels[v] = a
                rec(v + 1, deficit - (counts[a] <= lower[a]))
                counts[a] -= 1

    rec(0, sum(lower))
    arr = np.array(out, dtype=np.intp).reshape(len(out), n)
    arr.setflags(write=False)
    return arr


def enumerate_space(space: SearchSpace, n: int, k: int) -> np.ndarray:
    """All members of the space as 0-based label rows, in lexicographic order."""
    lower, upper = space.bounds(n, k)
    return _enumerate(n, k, tuple(lower), tuple(upper))


@dataclass(frozen=True)
class MleResult:
    argmin: Assignment
    objective: float
    margin: float
    tie: bool
    runner_up: Assignment | None
    evaluated: int
    identity_error: float = 0.0


class MleSolver:
    """Exhaustive minimiser of the objective over one search space.

    Candidate signals are computed once and reused across observations, so a
    Monte Carlo loop over many ``K`` at a fixed model costs one matrix-vector
    product per observation.
    """

    def __init__(self, model: ModelSpec, space: SearchSpace,
                 budget: int = DEFAULT_BUDGET, verify: bool = True):
        required = space.required(model.n, model.k)
        if required > budget:
            raise BudgetExceeded(required, budget)
        self.model = model
        self.space = space
        self.verify = verify
        self.codes = enumerate_space(space, model.n, model.k)
        if len(self.codes) == 0:
            raise ValueError(f"search space {space} is empty for n={model.n}, k={model.k}")
        size = model.shape.size
        self._rows = None
        if len(self.codes) * size <= _CACHE_ENTRIES:
            self._rows = batch_signal(model, self.codes)
            self._norms = (self._rows * self._rows) @ model.weights
        else:
            self._norms = np.concatenate(
                [(rows * rows) @ model.weights for _, rows in self._blocks()]
            )

    def __len__(self) -> int:
        return len(self.codes)

    def _blocks(self):
        if self._rows is not None:
            yield 0, self._rows
            return
        for start in range(0, len(self.codes), _BLOCK_ROWS):
            yield start, batch_signal(self.model, self.codes[start:start + _BLOCK_ROWS])

    def candidate(self, index: int) -> Assignment:
        return Assignment.from_codes(self.codes[index], self.model.k)

    def objectives(self, K: ObservationMatrix) -> np.ndarray:
        K.check_shape(self.model.shape)
        wk = self.model.weights * K.values
        f = np.empty(len(self.codes))
        for start, rows in self._blocks():
            f[start:start + len(rows)] = self._norms[start:start + len(rows)] - 2.0 * (rows @ wk)
        return f

    def _identity_error(self, K: ObservationMatrix, f: np.ndarray) -> float:
        w = self.model.weights
        k_norm = float(np.sum(w * K.values * K.values))
        worst = 0.0
        for start, rows in self._blocks():
            r = ((K.values - rows) ** 2) @ w
            err = np.abs(r - (f[start:start + len(rows)] + k_norm)) / np.maximum(r, k_norm)
            worst = max(worst, float(err.max()))
        return worst

    def solve(self, K: ObservationMatrix) -> MleResult:
        f = self.objectives(K)
        err = 0.0
        if self.verify:
            err = self._identity_error(K, f)
            if err > IDENTITY_RTOL:
                raise RuntimeError(
                    f"objective and residual norm disagree (relative error {err:.3g})"
                )
        fmin = f.min()
        best = int(np.flatnonzero(f <= fmin + TIE_TOL)[0])
        argmin = self.candidate(best)
        runner_up = None
        margin = math.inf
        for idx in np.argsort(f, kind="stable"):
            if idx == best:
                continue
            cand = self.candidate(int(idx))
            if not is_equivalent(cand, argmin, self.model):
                runner_up = cand
                margin = float(f[idx] - f[best])
                break
        return MleResult(
            argmin=argmin,
            objective=float(f[best]),
            margin=max(margin, 0.0),
            tie=margin <= TIE_TOL,
            runner_up=runner_up,
            evaluated=len(f),
            identity_error=err,
        )


def hat_space(model: ModelSpec) -> FractionFloor:
    """Search space of the size-agnostic estimator: fractions at least 2c/3."""
    return FractionFloor(as_fraction(model.c) * 2 / 3)


def solve_hat(model: ModelSpec, K: ObservationMatrix,
              budget: int = DEFAULT_BUDGET, verify: bool = True) -> MleResult:
    return MleSolver(model, hat_space(model), budget, verify).solve(K)


def solve_check(model: ModelSpec, K: ObservationMatrix, sizes,
                budget: int = DEFAULT_BUDGET, verify: bool = True) -> MleResult:
    return MleSolver(model, FixedSizes(tuple(sizes)), budget, verify).solve(K)


def recovered(result: MleResult, y: Assignment, model: ModelSpec) -> bool:
    """Exact recovery: the winner is equivalent to y and not tied with another class."""
    return not result.tie and is_equivalent(result.argmin, y, model)

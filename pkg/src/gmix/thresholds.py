"""Closed-form recovery thresholds and finite-n checkers for their assumptions.

Logarithms are natural throughout.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .assignment import (
    Assignment,
    ConfusionMatrix,
    as_fraction,
    confusion,
    cycle_swap,
    distance,
    find_cycle,
    greedy_move_path,
    in_omega_c,
)
from .errors import DimensionMismatch, ModelError
from .model import ModelSpec, batch_signal, is_theta_preserving
from .observation import l_phi

DEFAULT_SLACK = 0.8


# -- closed forms ---------------------------------------------------------------


def delta_hypergraph(model: ModelSpec, sizes: Sequence[int]) -> float:
    """Smallest weighted single-move drop near the truth (hypergraph models).

    For every ordered pair of distinct communities (i, j), every arity s and
    every slot g, sums over the other s - 1 labels ``b`` the squared change
    of phi when slot g switches from i to j, weighted by ``1/sigma_bar^2``
    at the i-tuple and by the product of the community sizes of ``b``.
    """
    if not model.is_tensor:
        raise ModelError("the single-move constant is defined for hypergraph models only")
    k = model.k
    sizes = np.asarray(sizes, dtype=np.float64)
    if sizes.shape != (k,):
        raise DimensionMismatch(f"need {k} community sizes, got {sizes.size}")
    per_pair = np.zeros((k, k))
    for s in model.signal.arities:
        phi = model.phi_table(s)
        inv_var = 1.0 / model.sigma_bar_table(s) ** 2
        weight = np.ones((k,) * (s - 1))
        for r in range(s - 1):
            shape = [1] * (s - 1)
            shape[r] = k
            weight = weight * sizes.reshape(shape)
        for g in range(s):
            for i in range(k):
                phi_i = np.take(phi, i, axis=g)
                w_i = np.take(inv_var, i, axis=g)
                for j in range(k):
                    if i != j:
                        diff = phi_i - np.take(phi, j, axis=g)
                        per_pair[i, j] += float(np.sum(w_i * diff * diff * weight))
    return float(min(per_pair[i, j] for i in range(k) for j in range(k) if i != j))


def epsilon_upper(c, k: int) -> Fraction:
    """Exclusive upper end ``2c / (3k)`` of the admissible epsilon range."""
    return as_fraction(c) * 2 / (3 * k)


def _check_epsilon(epsilon: float, c, k: int) -> None:
    if not 0 < epsilon or not as_fraction(epsilon) < epsilon_upper(c, k):
        raise ValueError(
            f"epsilon must lie in (0, 2c/(3k)) = (0, {float(epsilon_upper(c, k)):.6g}), "
            f"got {epsilon}"
        )


def t_n_hypergraph(n: int, k: int, c: float, epsilon: float, s1: int, s2: int) -> float:
    """Raw separation floor outside B_eps for the hypergraph family."""
    if n < 1 or k < 2 or not 0 < c < 1:
        raise ValueError(f"need n >= 1, k >= 2, 0 < c < 1; got n={n}, k={k}, c={c}")
    if not 1 <= s1 <= s2:
        raise ValueError(f"need 1 <= s1 <= s2, got {s1}, {s2}")
    _check_epsilon(epsilon, c, k)
    ck = c * k
    denom_tail = max(ck, (k - 1) / epsilon)
    return float(sum(4.0 ** s * s * float(n) ** s / (ck ** (s - 1) * denom_tail)
                     for s in range(s1, s2 + 1)))


@dataclass(frozen=True)
class ThresholdReport:
    delta: float
    t_n: float
    far_margin: float
    near_margin: float
    delta_param: float
    epsilon: float
    b1: float

    @property
    def recovery_predicted(self) -> bool:
        return self.far_margin < 0 and self.near_margin < 0

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["recovery_predicted"] = self.recovery_predicted
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "ThresholdReport":
        return cls(**{f: doc[f] for f in cls.__dataclass_fields__})


def recovery_report(model: ModelSpec, sizes: Sequence[int], epsilon: float,
                    delta_param: float, t_n: float | None = None) -> ThresholdReport:
    """Both sufficient-condition margins; recovery is predicted when both are negative.

    ``t_n`` overrides the built-in hypergraph separation floor.
    """
    if model.b1 is None:
        raise ModelError("the noise field declares no bound B1")
    if not 0 < delta_param < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta_param}")
    n, k = model.n, model.k
    if sum(sizes) != n:
        raise DimensionMismatch(f"sizes {tuple(sizes)} do not sum to n={n}")
    delta = delta_hypergraph(model, sizes)
    if t_n is None:
        t_n = t_n_hypergraph(n, k, model.c, epsilon, model.signal.s1, model.signal.s2)
    else:
        _check_epsilon(epsilon, model.c, k)
    b1 = float(model.b1)
    far = n * math.log(k) - t_n / (8 * b1 * b1)
    near = math.log(k) + math.log(n) - delta * (1 - delta_param) / 8
    return ThresholdReport(delta, float(t_n), far, near, delta_param, epsilon, b1)


# -- perturbations of the truth and impossibility margins -------------------------


@dataclass(frozen=True)
class PerturbedAssignment:
    """The truth with one vertex moved, or two vertices from distinct communities swapped."""

    base: Assignment
    a: int
    b: int | None = None
    target: int | None = None

    def __post_init__(self):
        n = self.base.n
        for v in (self.a, self.b):
            if v is not None and not 1 <= v <= n:
                raise ValueError(f"vertex {v} outside 1..{n}")
        if self.b is None:
            if self.target is None or not 1 <= self.target <= self.base.k:
                raise ValueError(f"single move needs a target in 1..{self.base.k}")
            if self.target == self.base.labels[self.a - 1]:
                raise ValueError(f"vertex {self.a} already sits in community {self.target}")
        elif self.base.labels[self.a - 1] == self.base.labels[self.b - 1]:
            raise ValueError(f"vertices {self.a} and {self.b} share a community")

    @classmethod
    def single_move(cls, base: Assignment, a: int, target: int) -> "PerturbedAssignment":
        return cls(base, a, target=target)

    @classmethod
    def swap(cls, base: Assignment, a: int, b: int) -> "PerturbedAssignment":
        return cls(base, a, b)

    @property
    def kind(self) -> str:
        return "single_move" if self.b is None else "swap"

    @property
    def assignment(self) -> Assignment:
        if self.b is None:
            return self.base.with_label(self.a, self.target)
        la, lb = self.base.labels[self.a - 1], self.base.labels[self.b - 1]
        return self.base.with_label(self.a, lb).with_label(self.b, la)


def _move_values(model: ModelSpec, y: Assignment, vertices: Sequence[int]) -> np.ndarray:
    """``L_Phi(y^(a), y)`` for each vertex (row) and target community (column); inf on the diagonal."""
    codes = np.repeat(y.codes[None, :], len(vertices) * model.k, axis=0)
    for r, a in enumerate(vertices):
        codes[r * model.k:(r + 1) * model.k, a - 1] = np.arange(model.k)
    base = batch_signal(model, y.codes)[0]
    d = batch_signal(model, codes) - base
    vals = (d * d) @ model.weights
    vals = vals.reshape(len(vertices), model.k)
    for r, a in enumerate(vertices):
        vals[r, y.labels[a - 1] - 1] = math.inf
    return vals


def minimizing_move(model: ModelSpec, y: Assignment) -> tuple[int, int, float]:
    """``(r0, r1, value)``: moving a vertex of r0 to r1 gives the smallest ``L_Phi``.

    Every vertex is tried; ties go to the smallest ``(r0, r1)``.
    """
    model.check(y)
    vals = _move_values(model, y, range(1, y.n + 1))
    best = None
    for a in range(1, y.n + 1):
        r0 = y.labels[a - 1]
        for r1 in range(1, model.k + 1):
            v = vals[a - 1, r1 - 1]
            if r1 != r0 and (best is None or (v, r0, r1) < best):
                best = (v, r0, r1)
    v, r0, r1 = best
    return r0, r1, float(v)


def default_h_size(community_size: int, n: int) -> int:
    return max(1, math.ceil(community_size / math.log(n)))


def default_h(model: ModelSpec, y: Assignment) -> tuple[int, ...]:
    """The ``ceil(n_r0 / log n)`` smallest vertices of the community r0."""
    r0, _, _ = minimizing_move(model, y)
    members = [v for v in range(1, y.n + 1) if y.labels[v - 1] == r0]
    return tuple(members[:default_h_size(len(members), y.n)])


def default_h_pair(model: ModelSpec, y: Assignment) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Vertex sets from r0 and r1, each of size ``ceil(n_r0 / log n)`` (capped by the community)."""
    r0, r1, _ = minimizing_move(model, y)
    first = [v for v in range(1, y.n + 1) if y.labels[v - 1] == r0]
    second = [v for v in range(1, y.n + 1) if y.labels[v - 1] == r1]
    h = default_h_size(len(first), y.n)
    return tuple(first[:h]), tuple(second[:h])


def impossibility_margin_hat(model: ModelSpec, y: Assignment, H: Sequence[int],
                             delta_param: float) -> float:
    """``max_{a in H} L_Phi(y^(a), y) - 8 (1 - delta) log n``.

    Vertices of r0 move to r1; any other vertex moves to its own minimizing
    target. A negative margin is the regime where exact recovery fails.
    """
    H = sorted(set(int(a) for a in H))
    if not H:
        raise ValueError("the vertex set H is empty")
    model.check(y)
    if H[0] < 1 or H[-1] > y.n:
        raise ValueError(f"vertices of H must lie in 1..{y.n}")
    r0, r1, _ = minimizing_move(model, y)
    vals = _move_values(model, y, H)
    worst = -math.inf
    for row, a in enumerate(H):
        v = vals[row, r1 - 1] if y.labels[a - 1] == r0 else vals[row].min()
        worst = max(worst, float(v))
    return worst - 8 * (1 - delta_param) * math.log(y.n)


def impossibility_margin_check(model: ModelSpec, y: Assignment, H1: Sequence[int],
                               H2: Sequence[int], delta_param: float) -> float:
    """``max_{u in H1, v in H2} L_Phi(y^(uv), y) - 16 (1 - delta) log n``."""
    H1 = sorted(set(int(a) for a in H1))
    H2 = sorted(set(int(a) for a in H2))
    if not H1 or not H2:
        raise ValueError("H1 and H2 must be non-empty")
    model.check(y)
    if set(H1) & set(H2):
        raise ValueError("H1 and H2 must be disjoint")
    if min(H1 + H2) < 1 or max(H1 + H2) > y.n:
        raise ValueError(f"vertices must lie in 1..{y.n}")
    c1 = {y.labels[a - 1] for a in H1}
    c2 = {y.labels[a - 1] for a in H2}
    if len(c1) != 1 or len(c2) != 1:
        raise ValueError("H1 and H2 must each lie inside a single community")
    if c1 == c2:
        raise ValueError("H1 and H2 must come from different communities")
    base = batch_signal(model, y.codes)[0]
    codes = np.repeat(y.codes[None, :], len(H1) * len(H2), axis=0)
    row = 0
    for u in H1:
        for v in H2:
            codes[row, u - 1], codes[row, v - 1] = y.codes[v - 1], y.codes[u - 1]
            row += 1
    d = batch_signal(model, codes) - base
    worst = float(((d * d) @ model.weights).max())
    return worst - 16 * (1 - delta_param) * math.log(y.n)


# -- B_eps membership ---------------------------------------------------------------


@dataclass(frozen=True)
class BEpsilonParams:
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class BEpsilonResult:
    member: bool
    w: tuple[int, ...] | None
    violated: tuple[str, ...] = field(default_factory=tuple)

    def __bool__(self) -> bool:
        return self.member


COLUMN_FLOOR = "column maximum below n_i - n*epsilon"
NOT_BIJECTIVE = "column-max map w is not a bijection"
NOT_PRESERVING = "column-max map w is not signal-preserving"


def b_epsilon_membership(t: ConfusionMatrix, params: BEpsilonParams,
                         model: ModelSpec | None = None) -> BEpsilonResult:
    """Evaluate the three B_eps conditions on a confusion table ``t(x, y)``.

    Columns index the communities of y. ``w(i)`` is the row of the largest
    entry in column i, the smallest such row on ties. Without a model the
    preservation condition is skipped.
    """
    arr = t.t
    k = t.k
    eps = as_fraction(params.epsilon)
    col = arr.sum(axis=0)
    violated = []
    if any(Fraction(int(arr[:, i].max())) < int(col[i]) - t.n * eps for i in range(k)):
        violated.append(COLUMN_FLOOR)
    w = tuple(int(np.argmax(arr[:, i])) + 1 for i in range(k))
    bijective = len(set(w)) == k
    if not bijective:
        violated.append(NOT_BIJECTIVE)
    elif model is not None and not is_theta_preserving(model, w):
        violated.append(NOT_PRESERVING)
    return BEpsilonResult(not violated, w if bijective else None, tuple(violated))


# -- finite-n checkers ----------------------------------------------------------------


def single_move_drops(model: ModelSpec, x: Assignment, y_star: Assignment,
                         epsilon: float) -> list[float]:
    """``L_Phi(x, y_r) - L_Phi(x, y_{r+1})`` along the greedy path from y_star to x.

    Requires ``t(x, y_star)`` in B_eps with the identity as column-max map.
    Compare the drops against the single-move constant times a finite-n
    slack such as ``DEFAULT_SLACK``.
    """
    model.check(x)
    model.check(y_star)
    res = b_epsilon_membership(confusion(x, y_star), BEpsilonParams(epsilon), model)
    if not res.member:
        raise ValueError("t(x, y_star) is not in B_eps: " + "; ".join(res.violated))
    if res.w != tuple(range(1, model.k + 1)):
        raise ValueError(f"column-max map of t(x, y_star) is {res.w}, not the identity")
    path = greedy_move_path(x, y_star)
    values = [l_phi(model, x, z) for z in path]
    return [a - b for a, b in zip(values, values[1:])]


def cycle_swap_drops(model: ModelSpec, x: Assignment, z: Assignment) -> list[tuple[int, float]]:
    """Repeated cycle swaps from z toward x; ``(cycle length, L_Phi drop)`` per swap."""
    model.check(x)
    model.check(z)
    out = []
    current = z
    before = l_phi(model, x, current)
    while (cycle := find_cycle(x, current)) is not None:
        current = cycle_swap(current, x, cycle)
        after = l_phi(model, x, current)
        out.append((len(cycle), before - after))
        before = after
    if distance(x, current) != 0:
        raise AssertionError("cycle swaps stopped before reaching x")
    return out


@dataclass(frozen=True)
class SeparationDiagnostic:
    """Pairs outside B_eps versus the separation floor ``T(n)``."""

    n: int
    t_n: float
    b1: float
    outside: int
    raw_violations: int
    weighted_violations: int
    min_raw: float
    min_weighted: float

    @property
    def holds(self) -> bool:
        return self.raw_violations == 0 and self.weighted_violations == 0

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["holds"] = self.holds
        return doc


def separation_outside_b_epsilon(model: ModelSpec, y: Assignment, epsilon: float,
                                 t_n: float | None = None) -> SeparationDiagnostic:
    """Check the separation floor on every x in the 2c/3 space with ``t(x, y)`` outside B_eps.

    The raw sum of squared signal differences is compared with ``T(n)`` and
    the weighted ``L_Phi`` with ``T(n) / B1^2``. The floor is asymptotic, so
    violations at small n are reported rather than raised.
    """
    from .mle import enumerate_space, hat_space

    model.check(y)
    if not in_omega_c(y, model.c):
        raise ValueError(f"the truth must have every community at least c*n, c={model.c}")
    if model.b1 is None:
        raise ModelError("the noise field declares no bound B1")
    if t_n is None:
        t_n = t_n_hypergraph(model.n, model.k, model.c, epsilon, model.signal.s1, model.signal.s2)
    b1 = float(model.b1)
    params = BEpsilonParams(epsilon)
    codes = enumerate_space(hat_space(model), model.n, model.k)
    base = batch_signal(model, y.codes)[0]
    outside = raw_bad = w_bad = 0
    min_raw = min_w = math.inf
    for start in range(0, len(codes), 4096):
        block = codes[start:start + 4096]
        d = batch_signal(model, block) - base
        raw = np.sum(d * d, axis=1)
        weighted = (d * d) @ model.weights
        for row, xc in enumerate(block):
            x = Assignment.from_codes(xc, model.k)
            if b_epsilon_membership(confusion(x, y), params, model).member:
                continue
            outside += 1
            min_raw = min(min_raw, float(raw[row]))
            min_w = min(min_w, float(weighted[row]))
            raw_bad += raw[row] < t_n
            w_bad += weighted[row] < t_n / (b1 * b1)
    return SeparationDiagnostic(model.n, float(t_n), b1, outside, int(raw_bad), int(w_bad),
                                min_raw, min_w)

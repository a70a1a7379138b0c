"""Community assignment mappings and their combinatorics.

Labels are 1-based everywhere in the public API (``[1, 1, 2]`` puts vertices
1 and 2 in community 1). Vertex indices that appear in the API are also
1-based. The ``codes`` property exposes a 0-based numpy view for internal
vectorised code.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import DimensionMismatch

if TYPE_CHECKING:
    from .model import ModelSpec


@dataclass(frozen=True)
class Assignment:
    """A map from vertices ``1..n`` to communities ``1..k``."""

    labels: tuple[int, ...]
    k: int

    def __init__(self, labels: Sequence[int], k: int | None = None):
        labels = tuple(int(v) for v in labels)
        if not labels:
            raise ValueError("an assignment needs at least one vertex")
        if k is None:
            k = max(labels)
        k = int(k)
        if k < 1:
            raise ValueError(f"k must be positive, got {k}")
        bad = [v for v in labels if v < 1 or v > k]
        if bad:
            raise ValueError(f"labels must lie in 1..{k}, got {bad[0]}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "k", k)

    @classmethod
    def from_codes(cls, codes, k: int) -> "Assignment":
        """Build from 0-based community codes."""
        return cls([int(c) + 1 for c in codes], k)

    @classmethod
    def balanced(cls, n: int, k: int) -> "Assignment":
        """Blocks of size n // k, remainder going to the lowest ids."""
        base, extra = divmod(n, k)
        labels: list[int] = []
        for i in range(k):
            labels += [i + 1] * (base + (1 if i < extra else 0))
        return cls(labels, k)

    @property
    def n(self) -> int:
        return len(self.labels)

    @cached_property
    def codes(self) -> np.ndarray:
        arr = np.asarray(self.labels, dtype=np.intp) - 1
        arr.setflags(write=False)
        return arr

    def community_sizes(self) -> tuple[int, ...]:
        counts = [0] * self.k
        for v in self.labels:
            counts[v - 1] += 1
        return tuple(counts)

    def relabel(self, eta: Sequence[int]) -> "Assignment":
        """Return ``eta ∘ self`` where ``eta[i - 1]`` is the image of label i."""
        if len(eta) != self.k:
            raise DimensionMismatch(f"relabelling has {len(eta)} entries, k={self.k}")
        return Assignment([eta[v - 1] for v in self.labels], self.k)

    def with_label(self, vertex: int, label: int) -> "Assignment":
        """Copy with 1-based ``vertex`` moved to ``label``."""
        labels = list(self.labels)
        labels[vertex - 1] = label
        return Assignment(labels, self.k)

    def to_json(self) -> str:
        return json.dumps(list(self.labels))

    @classmethod
    def from_json(cls, text: str, k: int | None = None) -> "Assignment":
        data = json.loads(text)
        if not isinstance(data, list) or not all(isinstance(v, int) for v in data):
            raise ValueError("an assignment must be a JSON array of integers")
        return cls(data, k)

    def __len__(self) -> int:
        return len(self.labels)

    def __repr__(self) -> str:
        return f"Assignment({list(self.labels)}, k={self.k})"


def _check_compatible(*xs: Assignment) -> None:
    n, k = xs[0].n, xs[0].k
    for x in xs[1:]:
        if x.n != n or x.k != k:
            raise DimensionMismatch(
                f"assignments disagree on dimensions: (n={n}, k={k}) vs (n={x.n}, k={x.k})"
            )


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Counts ``t[i][j]`` of vertices labelled i by x and j by z (0-based indices)."""

    t: np.ndarray
    n: int

    @property
    def k(self) -> int:
        return self.t.shape[0]

    @property
    def row_sums(self) -> np.ndarray:
        return self.t.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.t.sum(axis=0)

    @property
    def trace(self) -> int:
        return int(np.trace(self.t))

    def is_diagonal(self) -> bool:
        return self.trace == self.n

    def tolist(self) -> list[list[int]]:
        return self.t.tolist()

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.t, other.t)


def confusion(x: Assignment, z: Assignment) -> ConfusionMatrix:
    _check_compatible(x, z)
    t = np.zeros((x.k, x.k), dtype=np.int64)
    np.add.at(t, (x.codes, z.codes), 1)
    t.setflags(write=False)
    return ConfusionMatrix(t, x.n)


def triple_confusion(x: Assignment, y: Assignment, z: Assignment) -> np.ndarray:
    """Counts of vertices with labels (j, p, q) under (x, y, z), 0-based axes."""
    _check_compatible(x, y, z)
    t = np.zeros((x.k,) * 3, dtype=np.int64)
    np.add.at(t, (x.codes, y.codes, z.codes), 1)
    return t


def distance(x: Assignment, z: Assignment) -> int:
    """Sum of off-diagonal confusion counts, i.e. ``n - trace``."""
    return x.n - confusion(x, z).trace


def as_fraction(c) -> Fraction:
    """Exact rational for a balancedness parameter.

    Floats are snapped to the nearest fraction with denominator at most 10^6,
    so ``1/3`` written as a float compares exactly.
    """
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    return Fraction(c).limit_denominator(1_000_000)


def in_omega_c(x: Assignment, c) -> bool:
    """Every community holds at least a fraction ``c`` of the vertices."""
    c = as_fraction(c)
    if not 0 < c < 1:
        raise ValueError(f"c must lie in (0, 1), got {c}")
    return all(Fraction(size, x.n) >= c for size in x.community_sizes())


def label_bijection(x: Assignment, z: Assignment) -> tuple[int, ...] | None:
    """A bijection eta with ``x = eta ∘ z``, or None if none exists.

    Labels unused by z are paired with labels unused by x in increasing order.
    """
    _check_compatible(x, z)
    fwd: dict[int, int] = {}
    back: dict[int, int] = {}
    for a, b in zip(x.labels, z.labels):
        if fwd.setdefault(b, a) != a or back.setdefault(a, b) != b:
            return None
    free = iter(sorted(set(range(1, x.k + 1)) - set(back)))
    return tuple(fwd[b] if b in fwd else next(free) for b in range(1, x.k + 1))


def is_equivalent(x: Assignment, z: Assignment, model: "ModelSpec") -> bool:
    """x lies in the class of z: a label bijection exists and the signals agree."""
    from .model import build_signal

    if label_bijection(x, z) is None:
        return False
    if x.labels == z.labels:
        return True
    return np.array_equal(build_signal(model, x).values, build_signal(model, z).values)


def greedy_move_path(x: Assignment, y_star: Assignment) -> list[Assignment]:
    """Single-vertex moves from ``y_star`` to ``x``.

    Each step takes the lexicographically least (j, i), j != i, with vertices
    labelled j by x and i by the current assignment, and moves the smallest
    such vertex to j.
    """
    _check_compatible(x, y_star)
    target = x.labels
    cur = list(y_star.labels)
    path = [y_star]
    while True:
        best = None
        for v, (a, b) in enumerate(zip(target, cur)):
            if a != b and (best is None or (a, b) < best[0]):
                best = ((a, b), v)
        if best is None:
            return path
        (j, _), u = best
        cur[u] = j
        path.append(Assignment(cur, x.k))


def find_cycle(x: Assignment, z: Assignment) -> tuple[int, ...] | None:
    """An l-cycle ``(i_1, ..., i_l)`` with ``t[i_{s-1}, i_s](x, z) > 0`` cyclically.

    Depth-first search over off-diagonal confusion edges, starting at the
    smallest community id; the first cycle closed is returned. None iff the
    confusion matrix is diagonal.
    """
    _check_compatible(x, z)
    if x.community_sizes() != z.community_sizes():
        raise ValueError(
            f"community sizes differ: {x.community_sizes()} vs {z.community_sizes()}"
        )
    t = confusion(x, z).t
    k = x.k
    adj = [[j for j in range(k) if j != i and t[i, j] > 0] for i in range(k)]
    done = [False] * k
    for start in range(k):
        if done[start] or not adj[start]:
            continue
        path = [start]
        pos = {start: 0}
        iters = [iter(adj[start])]
        while iters:
            nxt = next(iters[-1], None)
            if nxt is None:
                done[path.pop()] = True
                pos = {v: i for i, v in enumerate(path)}
                iters.pop()
            elif nxt in pos:
                return tuple(v + 1 for v in path[pos[nxt]:])
            elif not done[nxt]:
                pos[nxt] = len(path)
                path.append(nxt)
                iters.append(iter(adj[nxt]))
    return None


def cycle_swap(z: Assignment, x: Assignment, cycle: Sequence[int]) -> Assignment:
    """Move one vertex per cycle edge of (x, z) to its x label.

    For each edge ``(a, b)`` of the cycle the smallest vertex u with
    ``x(u) = a`` and ``z(u) = b`` is relabelled a. Community sizes of z are
    preserved and the distance to x drops by ``len(cycle)``.
    """
    _check_compatible(x, z)
    cycle = [int(c) for c in cycle]
    if len(cycle) < 2 or len(set(cycle)) != len(cycle):
        raise ValueError(f"a cycle needs at least 2 distinct communities, got {cycle}")
    if any(c < 1 or c > z.k for c in cycle):
        raise ValueError(f"cycle labels must lie in 1..{z.k}, got {cycle}")
    labels = list(z.labels)
    for a, b in zip(cycle, cycle[1:] + cycle[:1]):
        u = next((v for v in range(z.n) if x.labels[v] == a and z.labels[v] == b), None)
        if u is None:
            raise ValueError(f"invalid cycle {tuple(cycle)}: no vertex with x={a}, z={b}")
        labels[u] = a
    return Assignment(labels, z.k)

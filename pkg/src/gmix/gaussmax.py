"""Tail bounds for the maximum of N Gaussians, with a Monte Carlo check."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .rng import standard_normals

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)


def normal_sf(x: float) -> float:
    """Standard normal upper tail ``Pr(G > x)``.

    Uses the C library's ``erfc``, whose rational approximations keep the
    relative error near one ulp across the range the tests pin (|x| <= 8).
    """
    return 0.5 * math.erfc(x / _SQRT2)


def tail_bounds(x: float) -> tuple[float, float]:
    """Lower and upper closed-form bounds on ``Pr(G > x)`` for x > 0."""
    if not x > 0:
        raise ValueError(f"tail bounds need x > 0, got {x}")
    dens = math.exp(-0.5 * x * x) / _SQRT2PI
    return x * dens / (1.0 + x * x), dens / x


def lower_condition_holds(N: float, epsilon: float) -> bool:
    """Side condition under which the lower-tail bound applies."""
    return lower_condition_ratio(N, epsilon) > 1.0


def lower_condition_ratio(N: float, epsilon: float) -> float:
    log_n = math.log(N)
    one_m = 1.0 - epsilon
    num = N ** (epsilon - epsilon * epsilon) * one_m * math.sqrt(2.0 * log_n)
    return num / (_SQRT2PI * (1.0 + 2.0 * one_m * one_m * log_n))


@dataclass(frozen=True)
class GaussMaxBound:
    n_vars: int
    epsilon: float
    upper_level: float
    lower_level: float
    upper_prob_bound: float
    lower_prob_bound: float
    lower_condition_met: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _levels(N: int, epsilon: float, max_var: float, min_var: float) -> GaussMaxBound:
    log_n = math.log(N)
    return GaussMaxBound(
        n_vars=N,
        epsilon=epsilon,
        upper_level=(1 + epsilon) * math.sqrt(2 * max_var * log_n),
        lower_level=(1 - epsilon) * math.sqrt(2 * min_var * log_n),
        upper_prob_bound=float(N) ** (-epsilon),
        lower_prob_bound=math.exp(-float(N) ** epsilon),
        lower_condition_met=N >= 2 and lower_condition_holds(N, epsilon),
    )


def bound(N: int, epsilon: float, variances: Sequence[float] | float = 1.0) -> GaussMaxBound:
    """Levels the maximum exceeds (or stays below) with controlled probability."""
    if N < 2:
        raise ValueError(f"need N >= 2, got {N}")
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    var = np.atleast_1d(np.asarray(variances, dtype=np.float64))
    if var.size not in (1, N):
        raise ValueError(f"need 1 or {N} variances, got {var.size}")
    if not np.all(var > 0) or not np.all(np.isfinite(var)):
        raise ValueError("variances must be positive and finite")
    return _levels(N, epsilon, float(var.max()), float(var.min()))


@dataclass(frozen=True)
class MonteCarloCheck:
    bound: GaussMaxBound
    trials: int
    seed: int
    upper_freq: float
    lower_freq: float
    upper_se: float
    lower_se: float

    @property
    def upper_ok(self) -> bool:
        return self.upper_freq <= self.bound.upper_prob_bound + 3 * self.upper_se

    @property
    def lower_ok(self) -> bool | None:
        """None when N = 1, where the lower bound has no content."""
        if self.bound.n_vars < 2:
            return None
        return self.lower_freq <= self.bound.lower_prob_bound + 3 * self.lower_se

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["upper_ok"] = self.upper_ok
        doc["lower_ok"] = self.lower_ok
        return doc


def _binomial_se(p: float, trials: int) -> float:
    p = min(max(p, 0.0), 1.0)
    return math.sqrt(p * (1 - p) / trials)


def verify_mc(N: int, epsilon: float, trials: int, seed: int,
              block_entries: int = 1 << 21) -> MonteCarloCheck:
    """Empirical frequencies of the maximum of N i.i.d. standard normals crossing each level.

    Trial t uses entries ``t*N .. t*N + N - 1`` of stream 0 under ``seed``.
    Standard errors are binomial at the bound probability. N = 1 is outside
    the range of the bound; it is allowed and only the upper check is meaningful.
    """
    if N < 1:
        raise ValueError(f"need N >= 1, got {N}")
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    b = _levels(N, epsilon, 1.0, 1.0)
    per_block = max(1, block_entries // N)
    above = below = 0
    for t0 in range(0, trials, per_block):
        m = min(per_block, trials - t0)
        g = standard_normals(seed, 0, m * N, start=t0 * N).reshape(m, N)
        mx = g.max(axis=1)
        above += int(np.count_nonzero(mx > b.upper_level))
        below += int(np.count_nonzero(mx < b.lower_level))
    return MonteCarloCheck(
        bound=b,
        trials=trials,
        seed=seed,
        upper_freq=above / trials,
        lower_freq=below / trials,
        upper_se=_binomial_se(b.upper_prob_bound, trials),
        lower_se=_binomial_se(b.lower_prob_bound, trials),
    )

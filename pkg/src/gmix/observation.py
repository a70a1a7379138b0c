"""Noisy observations, weighted norms, the MLE objective and ``L_Phi``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arrays import ObservationMatrix, ObservationShape
from .assignment import Assignment
from .errors import DimensionMismatch
from .model import CommunitySigma, ModelSpec, build_signal
from .rng import U64_MAX, standard_normals

__all__ = [
    "ObservationMatrix",
    "ObservationShape",
    "RngSeed",
    "sample_noise",
    "observe",
    "l_phi",
    "objective",
    "residual_norm",
    "objective_gap",
]


@dataclass(frozen=True)
class RngSeed:
    """Master seed plus stream id; the pair fixes the sampled noise."""

    seed: int
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            value = getattr(self, name)
            if not 0 <= int(value) <= U64_MAX:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value}")


def sample_noise(model: ModelSpec, seed: RngSeed) -> ObservationMatrix:
    """Standard normal array with the model's observation shape."""
    values = standard_normals(seed.seed, seed.stream, model.shape.size)
    return ObservationMatrix(model.shape, values)


def observe(model: ModelSpec, y: Assignment, W: ObservationMatrix) -> ObservationMatrix:
    """``K = A_y + Sigma * W``."""
    W.check_shape(model.shape)
    if isinstance(model.noise, CommunitySigma) and model.noise.truth.labels != y.labels:
        raise DimensionMismatch("observation truth differs from the truth the noise field uses")
    A = build_signal(model, y)
    return ObservationMatrix(model.shape, A.values + model.sigma * W.values)


def _weighted_diff(model: ModelSpec, x: Assignment, y: Assignment) -> np.ndarray:
    return (build_signal(model, x).values - build_signal(model, y).values) / model.sigma


def l_phi(model: ModelSpec, x: Assignment, y: Assignment) -> float:
    """``||Phi * (A_x - A_y)||^2``."""
    if x.labels == y.labels:
        return 0.0
    d = _weighted_diff(model, x, y)
    return float(np.sum(d * d))


def objective(model: ModelSpec, K: ObservationMatrix, x: Assignment) -> float:
    """``f(x) = -2 <Phi*K, Phi*A_x> + ||Phi*A_x||^2``."""
    K.check_shape(model.shape)
    A = build_signal(model, x).values
    w = model.weights
    return float(np.sum(w * A * (A - 2.0 * K.values)))


def residual_norm(model: ModelSpec, K: ObservationMatrix, x: Assignment) -> float:
    """``||Phi * (K - A_x)||^2``; equals ``objective + ||Phi*K||^2``."""
    K.check_shape(model.shape)
    r = (K.values - build_signal(model, x).values) / model.sigma
    return float(np.sum(r * r))


def objective_gap(model: ModelSpec, W: ObservationMatrix, x: Assignment, y: Assignment) -> float:
    """``f(x) - f(y)`` written through the noise: ``L_Phi(x, y) - 2 <W, Phi*(A_x - A_y)>``."""
    W.check_shape(model.shape)
    d = _weighted_diff(model, x, y)
    return float(np.sum(d * d) - 2.0 * np.sum(W.values * d))

"""Forward noising process and the analytical identity prediction.

Convention: rectified-flow interpolation z_t = (1-t)x + t*eps with velocity
target v = eps - x and noise scale sigma_t := t. Under it the identity
instruction's conditional velocity has the closed form (z_t - c_I)/t, which
is exact (z_t - c_I = t*(eps - c_I) when the generation target equals c_I),
so it doubles as an oracle for the learned prediction. All guidance
combinations are linear, so applying them to velocities is algebraically
the same as applying them to noise predictions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TimePoint:
    """A time in (0, 1]; the noise scale equals t under this convention."""

    t: float

    def __post_init__(self):
        if not 0.0 < self.t <= 1.0:
            raise ValueError(f"time must lie in (0, 1], got {self.t}")

    @property
    def sigma(self) -> float:
        return self.t


@dataclass
class LatentState:
    z: np.ndarray
    t: float


def noise_forward(x: np.ndarray, t: float, eps: np.ndarray) -> np.ndarray:
    """z_t = (1-t)*x + t*eps."""
    x = np.asarray(x, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    if x.shape != eps.shape:
        raise ValueError(f"noise_forward: x shape {x.shape} != eps shape {eps.shape}")
    return (1.0 - t) * x + t * eps


def velocity_target(x: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """Regression target for flow-matching training: eps - x."""
    x = np.asarray(x, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    if x.shape != eps.shape:
        raise ValueError(f"velocity_target: x shape {x.shape} != eps shape {eps.shape}")
    return eps - x


def analytical_id_prediction(z: np.ndarray, c_i: np.ndarray, t: float) -> np.ndarray:
    """Closed-form identity-conditioned velocity (z - c_I)/t; diverges as t -> 0."""
    if t <= 0.0:
        raise ValueError(f"analytical identity prediction needs t > 0, got t={t}")
    z = np.asarray(z, dtype=np.float64)
    c_i = np.asarray(c_i, dtype=np.float64)
    if z.shape != c_i.shape:
        raise ValueError(f"analytical_id_prediction: z shape {z.shape} != c_I shape {c_i.shape}")
    return (z - c_i) / t


def timestep_grid(k: int) -> np.ndarray:
    """K+1 uniform times descending 1 -> 0; the net is never queried at 0."""
    if k < 2:
        raise ValueError(f"timestep grid needs at least 2 steps, got {k}")
    return np.linspace(1.0, 0.0, k + 1)

"""Deterministic Euler ODE sampling from noise to data under guidance.

A sweep integrates one case at several edit strengths, reusing a single
initial noise draw so that strength is the only thing that varies. Per-alpha
traces record the largest guided-velocity norm seen along the trajectory;
they are the instability diagnostic for the cfg-id ablation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .flow import timestep_grid
from .guidance import GuidanceConfig, apply_guidance, resolve_predictions
from .model import DenoiserNet
from .rng import stream


# Data coordinates are O(1); a state this far out is a numerical blow-up even
# though float64 can still represent it, so it is treated as divergence.
DIVERGENCE_LIMIT = 1e9


class DivergenceError(RuntimeError):
    """Sampling state blew up (expected under cfg-id at large w)."""

    def __init__(self, variant: str, step: int, alpha: float, max_norm: float):
        super().__init__(
            f"sampling diverged: variant={variant} step={step} alpha={alpha} max_norm={max_norm:.3e}"
        )
        self.variant = variant
        self.step = step
        self.alpha = alpha
        self.max_norm = max_norm


@dataclass(frozen=True)
class SweepConfig:
    alphas: tuple[float, ...] = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
    steps: int = 64
    seed: int = 0
    guidance: GuidanceConfig = field(default_factory=GuidanceConfig)

    def __post_init__(self):
        if len(self.alphas) < 1:
            raise ValueError("sweep needs at least one alpha")
        if any(not 0.0 <= a <= 1.0 for a in self.alphas):
            raise ValueError(f"alphas must lie in [0, 1], got {self.alphas}")
        if self.steps < 2:
            raise ValueError(f"integration needs at least 2 steps, got {self.steps}")


@dataclass
class Sweep:
    source: np.ndarray
    instruction: int
    alphas: tuple[float, ...]
    outputs: list[np.ndarray]
    norm_traces: list[float]


def initial_noise(seed: int, dim: int) -> np.ndarray:
    return stream(seed, "init-noise").standard_normal(dim)


def _integrate(net: DenoiserNet, c_i: np.ndarray, token: int, cfg: GuidanceConfig,
               z0: np.ndarray, steps: int) -> tuple[np.ndarray, float]:
    grid = timestep_grid(steps)
    z = z0.copy()
    max_norm = 0.0
    for k in range(steps):
        t_hi = float(grid[k])
        t_lo = float(grid[k + 1])
        preds = resolve_predictions(net, z, t_hi, c_i, token, cfg)
        v = apply_guidance(preds, cfg)
        max_norm = max(max_norm, float(np.linalg.norm(v)))
        z = z - (t_hi - t_lo) * v
        if not np.all(np.isfinite(z)) or np.abs(z).max() > DIVERGENCE_LIMIT:
            raise DivergenceError(cfg.variant, step=k, alpha=cfg.alpha, max_norm=max_norm)
    return z, max_norm


def sample_one(net: DenoiserNet, c_i: np.ndarray, token: int, cfg: GuidanceConfig,
               seed: int, steps: int = 64, return_trace: bool = False):
    """Integrate one case from seed noise; fully deterministic given inputs."""
    if token not in net.task.edit_tokens:
        raise ValueError(f"sampling needs an edit instruction, got token {token}")
    z0 = initial_noise(seed, net.task.dim)
    out, max_norm = _integrate(net, c_i, token, cfg, z0, steps)
    return (out, max_norm) if return_trace else out


def sweep(net: DenoiserNet, c_i: np.ndarray, token: int, cfg: SweepConfig) -> Sweep:
    """Sample every alpha with one shared initial noise draw."""
    if token not in net.task.edit_tokens:
        raise ValueError(f"sampling needs an edit instruction, got token {token}")
    z0 = initial_noise(cfg.seed, net.task.dim)
    outputs = []
    traces = []
    for alpha in cfg.alphas:
        out, max_norm = _integrate(net, c_i, token, replace(cfg.guidance, alpha=alpha), z0, cfg.steps)
        outputs.append(out)
        traces.append(max_norm)
    return Sweep(source=np.asarray(c_i, dtype=np.float64).copy(), instruction=token,
                 alphas=tuple(cfg.alphas), outputs=outputs, norm_traces=traces)

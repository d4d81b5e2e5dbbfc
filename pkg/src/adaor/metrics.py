"""Trajectory metrics for edit-strength sweeps.

Embedded sweeps are scored for second-order smoothness (normalized second
differences), pacing uniformity (coefficient of variation of step lengths),
semantic direction alignment (stepwise cosine against an instruction
direction, normalized by the global alignment) and trajectory consistency
(stepwise cosine against the global edit direction). Real perceptual
embedding models are out of scope; a pixel embedding and a frozen random
projection stand in for them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import stream
from .sampler import Sweep

RANDPROJ_DIM = 64
RANDPROJ_SEED = 1234
TEXT_DIR_SEED = 1234
_EPS_STEP = 1e-12


class Embedding:
    """PIXEL is the identity on flattened samples; RANDPROJ is a frozen
    64 x D projection with entries N(0, 1/D) drawn from a fixed seed."""

    def __init__(self, kind: str, matrix: np.ndarray | None = None):
        if kind not in ("pixel", "randproj"):
            raise ValueError(f"unknown embedding kind {kind!r}")
        self.kind = kind
        self.matrix = matrix

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        if self.kind == "pixel":
            return x
        return self.matrix @ x


_PIXEL = Embedding("pixel")
_RANDPROJ_CACHE: dict[int, Embedding] = {}


def pixel_embedding() -> Embedding:
    return _PIXEL


def randproj_embedding(dim: int) -> Embedding:
    if dim not in _RANDPROJ_CACHE:
        rng = stream(RANDPROJ_SEED, "randproj", dim)
        matrix = rng.standard_normal((RANDPROJ_DIM, dim)) / math.sqrt(dim)
        _RANDPROJ_CACHE[dim] = Embedding("randproj", matrix)
    return _RANDPROJ_CACHE[dim]


def get_embedding(kind: str, dim: int) -> Embedding:
    return pixel_embedding() if kind == "pixel" else randproj_embedding(dim)


@dataclass
class MetricsReport:
    delta_smooth: float
    linearity_cv: float
    norm_dir: float
    traj_consistency: float
    mean_step: float
    manifold_residual_per_alpha: list[float] | None = None
    degenerate: bool = False

    @property
    def mean_residual(self) -> float:
        if not self.manifold_residual_per_alpha:
            return float("nan")
        return float(np.mean(self.manifold_residual_per_alpha))


def _embed_all(outputs, emb: Embedding) -> np.ndarray:
    if len(outputs) < 2:
        raise ValueError(f"need at least 2 outputs, got {len(outputs)}")
    return np.stack([emb(o) for o in outputs])


def stepwise_distances(outputs, emb: Embedding) -> np.ndarray:
    """S_i = ||E(o_{i+1}) - E(o_i)||_2, length N-1."""
    e = _embed_all(outputs, emb)
    return np.linalg.norm(np.diff(e, axis=0), axis=1)


def linearity_cv(outputs, emb: Embedding) -> float:
    """Population std of stepwise distances over their mean; lower is more uniform."""
    if len(outputs) < 3:
        raise ValueError(f"linearity needs at least 3 outputs, got {len(outputs)}")
    s = stepwise_distances(outputs, emb)
    mu = float(np.mean(s))
    if mu <= _EPS_STEP:
        return float("nan")
    return float(np.std(s) / mu)


def delta_smooth(outputs, emb: Embedding) -> float:
    """Mean second-difference magnitude over the mean step; 0 means perfectly even."""
    if len(outputs) < 3:
        raise ValueError(f"smoothness needs at least 3 outputs, got {len(outputs)}")
    e = _embed_all(outputs, emb)
    second = e[2:] - 2.0 * e[1:-1] + e[:-2]
    mu = float(np.mean(stepwise_distances(outputs, emb)))
    if mu <= _EPS_STEP:
        return float("nan")
    return float(np.mean(np.linalg.norm(second, axis=1)) / mu)


def _cos(a: np.ndarray, b: np.ndarray) -> float:
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


def normalized_dir(outputs, dir_text: np.ndarray, emb: Embedding) -> float:
    """Mean stepwise cosine to the instruction direction over the global cosine."""
    e = _embed_all(outputs, emb)
    dir_text = np.asarray(dir_text, dtype=np.float64).reshape(-1)
    if np.linalg.norm(dir_text) <= _EPS_STEP:
        raise ValueError("instruction direction has zero norm")
    global_dir = e[-1] - e[0]
    if np.linalg.norm(global_dir) <= _EPS_STEP:
        raise ValueError("global edit direction has zero norm")
    denom = _cos(global_dir, dir_text)
    if abs(denom) <= _EPS_STEP:
        raise ValueError("instruction direction is orthogonal to the global edit direction")
    terms = []
    for local in np.diff(e, axis=0):
        if np.linalg.norm(local) <= _EPS_STEP:
            continue  # exact duplicates carry no direction
        terms.append(_cos(local, dir_text) / denom)
    if not terms:
        return float("nan")
    return float(np.mean(terms))


def traj_consistency(outputs, emb: Embedding) -> float:
    """Mean cosine between each step and the global edit direction."""
    e = _embed_all(outputs, emb)
    global_dir = e[-1] - e[0]
    if np.linalg.norm(global_dir) <= _EPS_STEP:
        raise ValueError("global edit direction has zero norm")
    terms = []
    for local in np.diff(e, axis=0):
        if np.linalg.norm(local) <= _EPS_STEP:
            continue
        terms.append(_cos(local, global_dir))
    if not terms:
        return float("nan")
    return float(np.mean(terms))


def text_direction_proxy(task, instruction: int, emb: Embedding, m: int = 64,
                         seed: int = TEXT_DIR_SEED) -> np.ndarray:
    """Unit mean embedded displacement of the full edit over m sampled cases."""
    if instruction not in task.edit_tokens:
        raise ValueError(f"instruction {instruction} is not an edit token")
    if m < 16:
        raise ValueError(f"direction proxy needs at least 16 cases, got {m}")
    rng = stream(seed, "text-dir", task.name, instruction)
    acc = None
    for _ in range(m):
        case = task.sample_case(rng)
        diff = emb(task.reference(case, instruction, 1.0)) - emb(task.render_case(case))
        acc = diff if acc is None else acc + diff
    acc /= m
    norm = np.linalg.norm(acc)
    if norm <= _EPS_STEP:
        raise ValueError("degenerate instruction direction")
    return acc / norm


def evaluate_sweep(sw: Sweep, emb: Embedding, dir_text: np.ndarray,
                   task=None, with_residuals: bool = False) -> MetricsReport:
    """Full report for one sweep; residuals need the disc task object."""
    if len(sw.outputs) < 3:
        raise ValueError(f"sweep evaluation needs at least 3 outputs, got {len(sw.outputs)}")
    s = stepwise_distances(sw.outputs, emb)
    mean_step = float(np.mean(s))
    e = _embed_all(sw.outputs, emb)
    global_norm = float(np.linalg.norm(e[-1] - e[0]))

    residuals = None
    if with_residuals and task is not None:
        residuals = [task.manifold_residual(o) for o in sw.outputs]
        if any(r is None for r in residuals):
            residuals = None

    if mean_step <= _EPS_STEP or global_norm <= _EPS_STEP:
        nan = float("nan")
        return MetricsReport(nan, nan, nan, nan, mean_step,
                             manifold_residual_per_alpha=residuals, degenerate=True)

    return MetricsReport(
        delta_smooth=delta_smooth(sw.outputs, emb),
        linearity_cv=linearity_cv(sw.outputs, emb),
        norm_dir=normalized_dir(sw.outputs, dir_text, emb),
        traj_consistency=traj_consistency(sw.outputs, emb),
        mean_step=mean_step,
        manifold_residual_per_alpha=residuals,
        degenerate=False,
    )


# ---- report rows ----------------------------------------------------------

CSV_HEADER = ("case_id,variant,scheduler,w,alpha_count,delta_smooth,linearity_cv,"
              "norm_dir,traj_consistency,mean_step,mean_residual")


def csv_row(case_id: str, variant: str, scheduler: str, w: float,
            alpha_count: int, report: MetricsReport) -> str:
    vals = [report.delta_smooth, report.linearity_cv, report.norm_dir,
            report.traj_consistency, report.mean_step, report.mean_residual]
    body = ",".join(f"{v:.6g}" for v in vals)
    return f"{case_id},{variant},{scheduler},{w:g},{alpha_count},{body}"

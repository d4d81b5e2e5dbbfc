"""Synthetic paired-edit task families with closed-form ground truth.

Two tasks share one instruction vocabulary: `disc` renders 16x16 grayscale
discs from five parameters, `vec` applies fixed affine maps to 8-dim
vectors. Edits are continuous in a strength lambda, so partial edits have
exact references; training only ever sees lambda=1 targets.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import least_squares

TOKENS = ("SHIFT_RIGHT", "GROW", "BRIGHTEN", "HOLLOW", "NULL", "ID")
EDIT_TOKENS = (0, 1, 2, 3)
NULL_TOKEN = 4
ID_TOKEN = 5


def token_id(name: str) -> int:
    try:
        return TOKENS.index(name)
    except ValueError:
        raise ValueError(f"unknown instruction {name!r}; vocabulary: {', '.join(TOKENS)}") from None


def token_name(tok: int) -> str:
    return TOKENS[tok]


def _require_edit_token(tok: int) -> None:
    if tok not in EDIT_TOKENS:
        raise ValueError(f"instruction {TOKENS[tok] if 0 <= tok < len(TOKENS) else tok} is not an edit token")


@dataclass(frozen=True)
class DiscParams:
    cx: float  # center x, pixels
    cy: float  # center y, pixels
    r: float  # radius, pixels
    b: float  # peak intensity
    hollow: float = 0.0  # carve fraction, 0 = solid

    def as_array(self) -> np.ndarray:
        return np.array([self.cx, self.cy, self.r, self.b, self.hollow])


@dataclass
class EditTriplet:
    source: np.ndarray
    target: np.ndarray
    instruction: int


# ---- disc task ---------------------------------------------------------

SIZE = 16
_YS, _XS = np.mgrid[0:SIZE, 0:SIZE]
_XS = _XS.reshape(-1).astype(np.float64)
_YS = _YS.reshape(-1).astype(np.float64)

# sampling ranges (edits can leave them; the fitter searches a wider box)
PARAM_RANGES = {"cx": (4.0, 8.0), "cy": (5.0, 11.0), "r": (2.5, 4.5), "b": (0.4, 0.8)}


def sample_params(rng: np.random.Generator) -> DiscParams:
    return DiscParams(
        cx=rng.uniform(*PARAM_RANGES["cx"]),
        cy=rng.uniform(*PARAM_RANGES["cy"]),
        r=rng.uniform(*PARAM_RANGES["r"]),
        b=rng.uniform(*PARAM_RANGES["b"]),
        hollow=0.0,
    )


def _smoothstep01(x: np.ndarray) -> np.ndarray:
    u = np.clip(x, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def render_batch(params: np.ndarray) -> np.ndarray:
    """Render [N,5] parameter rows (cx, cy, r, b, hollow) to [N,256] images.

    Pixel value is b * coverage with coverage a smoothstep over a 1-pixel
    band at the disc boundary; hollow carves a fraction `hollow` of the
    intensity inside the inner radius (1 - 0.4*hollow)*r.
    """
    p = np.atleast_2d(np.asarray(params, dtype=np.float64))
    cx, cy, r, b, hollow = (p[:, i : i + 1] for i in range(5))
    dx = _XS[None, :] - cx
    dy = _YS[None, :] - cy
    d = np.sqrt(dx * dx + dy * dy)
    cover = _smoothstep01(r + 0.5 - d)
    r_in = (1.0 - 0.4 * hollow) * r
    inner = _smoothstep01(r_in + 0.5 - d)
    return np.clip(b * (cover - hollow * inner), 0.0, 1.0)


def render(params: DiscParams) -> np.ndarray:
    return render_batch(params.as_array()[None, :])[0]


def apply_edit(params: DiscParams, instruction: int, lam: float) -> DiscParams:
    """Lambda-partial ground-truth transform of the disc parameters."""
    _require_edit_token(instruction)
    if instruction == 0:  # SHIFT_RIGHT
        return replace(params, cx=params.cx + 4.0 * lam)
    if instruction == 1:  # GROW
        return replace(params, r=params.r * (1.0 + 0.6 * lam))
    if instruction == 2:  # BRIGHTEN
        return replace(params, b=min(1.0, params.b + 0.4 * lam))
    return replace(params, hollow=lam)  # HOLLOW


def make_triplet(rng: np.random.Generator, instruction: int | None = None) -> EditTriplet:
    params = sample_params(rng)
    if instruction is None:
        instruction = int(rng.integers(0, len(EDIT_TOKENS)))
    source = render(params)
    if instruction == ID_TOKEN:
        return EditTriplet(source=source, target=source.copy(), instruction=ID_TOKEN)
    target = render(apply_edit(params, instruction, 1.0))
    return EditTriplet(source=source, target=target, instruction=instruction)


# ---- parametric fit (manifold-residual proxy) ---------------------------

_FIT_BOUNDS = ((2.0, 14.0), (3.0, 13.0), (2.0, 7.5), (0.4, 1.0), (0.0, 1.0))
# coarse-to-fine grid steps; the last level is the finest grid
_FIT_STEPS = (
    (1.5, 1.5, 0.6, 0.1, 0.25),
    (0.5, 0.5, 0.2, 0.04, 0.1),
    (0.25, 0.25, 0.1, 0.02, 0.05),
)
def _axis(lo: float, hi: float, step: float) -> np.ndarray:
    n = max(1, int(round((hi - lo) / step)) + 1)
    return np.linspace(lo, hi, n)


def _best_on_grid(image: np.ndarray, axes: list[np.ndarray]) -> tuple[np.ndarray, float]:
    """Exhaustive search of the axis product, factored for speed.

    The image model is b * C(cx, cy, r, hollow) with C in [0, 1] and b <= 1,
    so the clip in render_batch is inactive inside the search box and the
    squared residual is the quadratic |I|^2 - 2b<I,C> + b^2|C|^2, evaluated
    for every b on the b-axis from two precomputed dot products.
    """
    cxs, cys, rs, bs, hs = axes
    cxy = np.stack(np.meshgrid(cxs, cys, indexing="ij"), axis=-1).reshape(-1, 2)
    dx = _XS[None, :] - cxy[:, 0:1]
    dy = _YS[None, :] - cxy[:, 1:2]
    d = np.sqrt(dx * dx + dy * dy)  # [Ng, 256]
    rh = np.stack(np.meshgrid(rs, hs, indexing="ij"), axis=-1).reshape(-1, 2)
    r = rh[:, 0][None, :, None]
    h = rh[:, 1][None, :, None]
    dd = d[:, None, :]
    cover = _smoothstep01(r + 0.5 - dd) - h * _smoothstep01((1.0 - 0.4 * h) * r + 0.5 - dd)
    s1 = cover @ image  # [Ng, Nrh]
    s2 = np.einsum("gkp,gkp->gk", cover, cover)
    i_sq = float(image @ image)
    sq = i_sq - 2.0 * bs[None, None, :] * s1[:, :, None] + (bs**2)[None, None, :] * s2[:, :, None]
    gi, ki, bi = np.unravel_index(int(np.argmin(sq)), sq.shape)
    best = np.array([cxy[gi, 0], cxy[gi, 1], rh[ki, 0], bs[bi], rh[ki, 1]])
    return best, float(sq[gi, ki, bi])


def fit_params(image: np.ndarray) -> tuple[DiscParams, float]:
    """Best parametric re-render of `image` and its L2 residual.

    Coarse-to-fine grid search down to the finest grid, then a local
    least-squares polish so exact renders fit to numerical precision.
    Always returns a result; degenerate inputs just get a large residual.
    """
    image = np.asarray(image, dtype=np.float64).reshape(-1)
    if image.shape[0] != SIZE * SIZE:
        raise ValueError(f"fit_params expects a {SIZE * SIZE}-dim sample, got {image.shape[0]}")

    axes = [_axis(lo, hi, st) for (lo, hi), st in zip(_FIT_BOUNDS, _FIT_STEPS[0])]
    best, _ = _best_on_grid(image, axes)
    for prev_steps, steps in zip(_FIT_STEPS[:-1], _FIT_STEPS[1:]):
        axes = [
            _axis(max(lo, c - pst), min(hi, c + pst), st)
            for c, (lo, hi), pst, st in zip(best, _FIT_BOUNDS, prev_steps, steps)
        ]
        best, _ = _best_on_grid(image, axes)

    lo = np.array([b[0] for b in _FIT_BOUNDS])
    hi = np.array([b[1] for b in _FIT_BOUNDS])

    def residual_vec(theta: np.ndarray) -> np.ndarray:
        return render_batch(theta[None, :])[0] - image

    res = least_squares(residual_vec, np.clip(best, lo, hi), bounds=(lo, hi),
                        method="trf", xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=400)
    theta = np.clip(res.x, lo, hi)
    residual = float(np.linalg.norm(residual_vec(theta)))
    fitted = DiscParams(cx=theta[0], cy=theta[1], r=theta[2], b=theta[3], hollow=theta[4])
    return fitted, residual


# ---- vec task ----------------------------------------------------------

VEC_DIM = 8
_VEC_SHIFT = np.array([1.5, 0.75, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
_VEC_BRIGHT = np.full(VEC_DIM, 0.5)
_VEC_FLIP = np.array([1.0, 1.0, 1.0, 1.0, -0.5, -0.5, -0.5, -0.5])


def vec_sample(rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, VEC_DIM)


def _vec_full_edit(x: np.ndarray, instruction: int) -> np.ndarray:
    if instruction == 0:  # SHIFT_RIGHT
        return x + _VEC_SHIFT
    if instruction == 1:  # GROW
        return 1.6 * x
    if instruction == 2:  # BRIGHTEN
        return x + _VEC_BRIGHT
    return x * _VEC_FLIP  # HOLLOW analogue


def vec_apply_edit(x: np.ndarray, instruction: int, lam: float) -> np.ndarray:
    """Lambda-lerp between the vector and its full affine edit."""
    _require_edit_token(instruction)
    return (1.0 - lam) * x + lam * _vec_full_edit(x, instruction)


def vec_make_triplet(rng: np.random.Generator, instruction: int | None = None) -> EditTriplet:
    x = vec_sample(rng)
    if instruction is None:
        instruction = int(rng.integers(0, len(EDIT_TOKENS)))
    if instruction == ID_TOKEN:
        return EditTriplet(source=x, target=x.copy(), instruction=ID_TOKEN)
    return EditTriplet(source=x, target=vec_apply_edit(x, instruction, 1.0), instruction=instruction)


# ---- task objects -------------------------------------------------------


class DiscTask:
    name = "disc"
    dim = SIZE * SIZE
    image_shape = (SIZE, SIZE)
    vocab = TOKENS
    edit_tokens = EDIT_TOKENS
    null_token = NULL_TOKEN
    id_token = ID_TOKEN

    def sample_case(self, rng):
        return sample_params(rng)

    def render_case(self, case: DiscParams) -> np.ndarray:
        return render(case)

    def reference(self, case: DiscParams, instruction: int, alpha: float) -> np.ndarray:
        if instruction == ID_TOKEN:
            return render(case)
        return render(apply_edit(case, instruction, alpha))

    def make_triplet(self, rng, instruction=None):
        return make_triplet(rng, instruction)

    def make_triplet_batch(self, rng, n: int):
        """n full-strength edit triplets as (sources, targets, tokens) arrays."""
        cols = [rng.uniform(*PARAM_RANGES[k], n) for k in ("cx", "cy", "r", "b")]
        src = np.stack(cols + [np.zeros(n)], axis=1)
        tokens = rng.integers(0, len(EDIT_TOKENS), n)
        edited = src.copy()
        edited[tokens == 0, 0] += 4.0
        edited[tokens == 1, 2] *= 1.6
        edited[tokens == 2, 3] = np.minimum(1.0, edited[tokens == 2, 3] + 0.4)
        edited[tokens == 3, 4] = 1.0
        return render_batch(src), render_batch(edited), tokens

    def manifold_residual(self, sample: np.ndarray) -> float:
        return fit_params(sample)[1]

    def to_grayscale(self, sample: np.ndarray) -> np.ndarray:
        return np.clip(sample.reshape(self.image_shape), 0.0, 1.0)


class VecTask:
    name = "vec"
    dim = VEC_DIM
    image_shape = (1, VEC_DIM)
    vocab = TOKENS
    edit_tokens = EDIT_TOKENS
    null_token = NULL_TOKEN
    id_token = ID_TOKEN

    def sample_case(self, rng):
        return vec_sample(rng)

    def render_case(self, case: np.ndarray) -> np.ndarray:
        return case.copy()

    def reference(self, case: np.ndarray, instruction: int, alpha: float) -> np.ndarray:
        if instruction == ID_TOKEN:
            return case.copy()
        return vec_apply_edit(case, instruction, alpha)

    def make_triplet(self, rng, instruction=None):
        return vec_make_triplet(rng, instruction)

    def make_triplet_batch(self, rng, n: int):
        xs = rng.uniform(-1.0, 1.0, (n, VEC_DIM))
        tokens = rng.integers(0, len(EDIT_TOKENS), n)
        targets = np.empty_like(xs)
        for tok in EDIT_TOKENS:
            rows = tokens == tok
            if rows.any():
                targets[rows] = _vec_full_edit(xs[rows], tok)
        return xs, targets, tokens

    def manifold_residual(self, sample: np.ndarray) -> float | None:
        return None  # no parametric manifold proxy for raw vectors

    def to_grayscale(self, sample: np.ndarray) -> np.ndarray:
        # vectors live roughly in [-2, 2]; map affinely for display
        return np.clip((sample.reshape(self.image_shape) + 2.0) / 4.0, 0.0, 1.0)


_TASKS = {"disc": DiscTask(), "vec": VecTask()}


def get_task(name: str):
    try:
        return _TASKS[name]
    except KeyError:
        raise ValueError(f"unknown task {name!r}; available: disc, vec") from None

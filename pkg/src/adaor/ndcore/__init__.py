"""Minimal dense float64 tensors with taped reverse-mode autodiff and Adam.

The op set is exactly what a small conditional MLP needs: linear, SiLU,
embedding lookup, column concat and mean-squared-error. Each forward op is
recorded on a Graph (a tape in execution order, which is topological by
construction); Graph.backward walks it in reverse. Compute-heavy inner
kernels live behind `adaor.ndcore.kernels` and can run either as a compiled
extension or as plain NumPy.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from . import kernels


class NonFiniteGradient(RuntimeError):
    """Raised by adam_step when a parameter gradient contains NaN or inf."""


class Tensor:
    """A dense float64 array plus an optional accumulated gradient.

    `param=True` marks trainable leaves; `produced` is set when an op on a
    Graph created this tensor (such tensors need gradients to continue the
    chain even when they are not parameters).
    """

    __slots__ = ("data", "grad", "param", "name", "produced")

    def __init__(self, data, param: bool = False, name: str = ""):
        arr = np.ascontiguousarray(data, dtype=np.float64)
        if arr.size == 0:
            raise ValueError(f"empty tensor {name!r}: shape {arr.shape}")
        self.data = arr
        self.grad: np.ndarray | None = None
        self.param = param
        self.name = name
        self.produced = False

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def item(self) -> float:
        if self.data.size != 1:
            raise ValueError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def needs_grad(self) -> bool:
        return self.param or self.produced

    def __repr__(self) -> str:
        tag = self.name or ("param" if self.param else "tensor")
        return f"<Tensor {tag} shape={self.data.shape}>"


def _accum(t: Tensor, g: np.ndarray | None) -> None:
    if g is None or not t.needs_grad():
        return
    t.grad = g if t.grad is None else t.grad + g


class _Node:
    __slots__ = ("op", "inputs", "output", "backward")

    def __init__(self, op, inputs, output, backward):
        self.op = op
        self.inputs = inputs
        self.output = output
        self.backward = backward


class Graph:
    """Recorded primitive tape. Nodes are appended in execution order."""

    def __init__(self):
        self.nodes: list[_Node] = []

    def _record(self, op: str, inputs: Sequence[Tensor], output: Tensor, backward) -> Tensor:
        output.produced = True
        self.nodes.append(_Node(op, tuple(inputs), output, backward))
        return output

    def reset(self) -> None:
        """Drop all recorded nodes; intermediate grads die with them."""
        self.nodes.clear()

    # ---- primitives -------------------------------------------------

    def linear(self, x: Tensor, w: Tensor, b: Tensor) -> Tensor:
        if x.data.ndim != 2 or w.data.ndim != 2 or x.shape[1] != w.shape[0]:
            raise ValueError(f"linear: input shape {x.shape} incompatible with weight shape {w.shape}")
        if b.data.ndim != 1 or b.shape[0] != w.shape[1]:
            raise ValueError(f"linear: bias shape {b.shape} incompatible with weight shape {w.shape}")
        y = Tensor(kernels.linear_forward(x.data, w.data, b.data))

        def backward(gy):
            gx, gw, gb = kernels.linear_backward(x.data, w.data, gy, need_gx=x.needs_grad())
            _accum(x, gx)
            _accum(w, gw)
            _accum(b, gb)

        return self._record("linear", (x, w, b), y, backward)

    def silu(self, x: Tensor) -> Tensor:
        y = Tensor(kernels.silu_forward(x.data))

        def backward(gy):
            _accum(x, kernels.silu_backward(x.data, gy))

        return self._record("silu", (x,), y, backward)

    def embed(self, table: Tensor, ids: np.ndarray) -> Tensor:
        ids = np.asarray(ids, dtype=np.int64)
        if ids.ndim != 1:
            raise ValueError(f"embed: ids must be 1-D, got shape {ids.shape}")
        if ids.min() < 0 or ids.max() >= table.shape[0]:
            raise ValueError(f"embed: id out of range for table with {table.shape[0]} rows")
        y = Tensor(table.data[ids])

        def backward(gy):
            gt = np.zeros_like(table.data)
            np.add.at(gt, ids, gy)
            _accum(table, gt)

        return self._record("embed", (table,), y, backward)

    def concat(self, parts: Sequence[Tensor]) -> Tensor:
        rows = {p.shape[0] for p in parts}
        if len(rows) != 1:
            raise ValueError(f"concat: mismatched batch sizes {[p.shape for p in parts]}")
        y = Tensor(np.concatenate([p.data for p in parts], axis=1))
        widths = [p.shape[1] for p in parts]

        def backward(gy):
            off = 0
            for p, wd in zip(parts, widths):
                _accum(p, np.ascontiguousarray(gy[:, off : off + wd]))
                off += wd

        return self._record("concat", tuple(parts), y, backward)

    def mse_loss(self, pred: Tensor, target: Tensor) -> Tensor:
        if pred.shape != target.shape:
            raise ValueError(f"mse_loss: pred shape {pred.shape} != target shape {target.shape}")
        diff = pred.data - target.data
        y = Tensor(np.mean(diff * diff))

        def backward(gy):
            scale = 2.0 / diff.size
            g = (float(gy.reshape(-1)[0]) * scale) * diff
            _accum(pred, g)
            _accum(target, -g)

        return self._record("mse_loss", (pred, target), y, backward)

    # ---- reverse pass -----------------------------------------------

    def backward(self, loss: Tensor) -> None:
        """Populate grads for every tensor reachable from the scalar loss."""
        if loss.data.size != 1:
            raise ValueError(f"backward needs a scalar loss, got shape {loss.shape}")
        loss.grad = np.ones_like(loss.data)
        for node in reversed(self.nodes):
            g = node.output.grad
            if g is None:
                continue  # branch detached from the loss
            node.backward(g)


# ---- optimizer -------------------------------------------------------


class AdamState:
    """Per-parameter moment accumulators plus the shared step counter."""

    def __init__(self, params: Sequence[Tensor], lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]


def adam_step(state: AdamState) -> None:
    """One bias-corrected Adam update over state.params, in place.

    Parameters whose grad is None are treated as zero-gradient (their
    moments stay zero, so their values are untouched bit-exactly).
    """
    state.step_count += 1
    for p, m, v in zip(state.params, state.m, state.v):
        g = p.grad
        if g is None:
            continue
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient(f"non-finite gradient for parameter {p.name or '<unnamed>'}")
        kernels.adam_update(p.data, g, m, v, state.step_count,
                            state.lr, state.beta1, state.beta2, state.eps)


def zero_grads(params: Sequence[Tensor]) -> None:
    for p in params:
        p.grad = None


# ---- verification ----------------------------------------------------


def gradcheck(build_loss: Callable[[Graph], Tensor], params: Sequence[Tensor],
              h: float = 1e-5, max_coords_per_param: int | None = None,
              rng: np.random.Generator | None = None) -> float:
    """Max relative error between taped gradients and central differences.

    `build_loss` must construct the scalar loss on the given graph from the
    current parameter values. When `max_coords_per_param` is set, only that
    many randomly chosen coordinates per parameter are probed (the full
    denoiser has too many for exhaustive probing).
    """
    g = Graph()
    loss = build_loss(g)
    zero_grads(params)
    g.backward(loss)
    autos = [None if p.grad is None else p.grad.copy() for p in params]
    zero_grads(params)

    worst = 0.0
    for p, auto in zip(params, autos):
        flat = p.data.reshape(-1)
        n = flat.size
        if max_coords_per_param is not None and n > max_coords_per_param:
            if rng is None:
                rng = np.random.default_rng(0)
            idxs = rng.choice(n, size=max_coords_per_param, replace=False)
        else:
            idxs = np.arange(n)
        aflat = None if auto is None else auto.reshape(-1)
        for i in idxs:
            orig = flat[i]
            flat[i] = orig + h
            lp = build_loss(Graph()).item()
            flat[i] = orig - h
            lm = build_loss(Graph()).item()
            flat[i] = orig
            fd = (lp - lm) / (2.0 * h)
            a = 0.0 if aflat is None else float(aflat[i])
            worst = max(worst, abs(a - fd) / (abs(fd) + 1e-12))
    return worst

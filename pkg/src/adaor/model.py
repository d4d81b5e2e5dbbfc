"""Conditional velocity network and its checkpoint format.

The MLP maps concat(z_t, c_I, instruction embedding, time embedding) to a
prediction of the clean target; the exposed velocity is (z_t - target_hat)/t.
Keeping the raw head bounded while the formula supplies the 1/t gain is what
lets a small MLP track the steep late-time velocities (a direct velocity
head saturates there and reconstruction stalls). NULL and ID are ordinary
trained rows of the embedding table. Checkpoints are a magic string, a JSON
header (task, vocabulary, shapes, training-config echo) and the raw
little-endian float64 parameters in declaration order.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from . import ndcore
from .ndcore import Tensor, kernels
from .rng import stream
from .task import get_task

EMBED_DIM = 16
TIME_DIM = 8
N_HIDDEN = 3
HIDDEN_WIDTH = {"disc": 256, "vec": 128}
MAGIC = b"ADAOR1"

_TIME_FREQS = (2.0 ** np.arange(TIME_DIM // 2)) * np.pi


class CheckpointError(RuntimeError):
    pass


def time_embedding(ts: np.ndarray) -> np.ndarray:
    """[B] times -> [B, 8] interleaved sin/cos at frequencies 2^k * pi, k=0..3."""
    ang = np.asarray(ts, dtype=np.float64)[:, None] * _TIME_FREQS[None, :]
    out = np.empty((ang.shape[0], TIME_DIM))
    out[:, 0::2] = np.sin(ang)
    out[:, 1::2] = np.cos(ang)
    return out


class DenoiserNet:
    """Velocity model v(z_t, c_I, c_T, t); immutable outside training."""

    def __init__(self, task_name: str, params: list[Tensor], train_config: dict | None = None):
        self.task = get_task(task_name)
        self.params = params
        self.train_config = train_config
        expected = 1 + 2 * (N_HIDDEN + 1)
        if len(params) != expected:
            raise ValueError(f"expected {expected} parameter tensors, got {len(params)}")

    @property
    def embedding(self) -> Tensor:
        return self.params[0]

    @property
    def layers(self) -> list[tuple[Tensor, Tensor]]:
        it = iter(self.params[1:])
        return list(zip(it, it))

    @property
    def null_token(self) -> int:
        return self.task.null_token

    @property
    def id_token(self) -> int:
        return self.task.id_token

    # ---- forward passes ---------------------------------------------

    def forward_tape(self, g: ndcore.Graph, z: np.ndarray, c_i: np.ndarray,
                     ids: np.ndarray, ts: np.ndarray) -> Tensor:
        """Recorded target-prediction forward for training; [B, D] / [B] arrays."""
        h = g.concat([
            Tensor(z),
            Tensor(c_i),
            g.embed(self.embedding, ids),
            Tensor(time_embedding(ts)),
        ])
        layers = self.layers
        for w, b in layers[:-1]:
            h = g.silu(g.linear(h, w, b))
        w_out, b_out = layers[-1]
        return g.linear(h, w_out, b_out)

    def forward(self, z: np.ndarray, c_i: np.ndarray, ids: np.ndarray, ts: np.ndarray) -> np.ndarray:
        """Plain inference forward (no tape); returns the target prediction."""
        x = np.concatenate([z, c_i, self.embedding.data[ids], time_embedding(ts)], axis=1)
        layers = self.layers
        for w, b in layers[:-1]:
            x = kernels.silu_forward(kernels.linear_forward(x, w.data, b.data))
        w_out, b_out = layers[-1]
        return kernels.linear_forward(x, w_out.data, b_out.data)

    def predict(self, z: np.ndarray, c_i: np.ndarray, token: int, t: float) -> np.ndarray:
        """Single-sample velocity prediction (z - target_hat)/t, with validation."""
        z = np.asarray(z, dtype=np.float64).reshape(-1)
        c_i = np.asarray(c_i, dtype=np.float64).reshape(-1)
        dim = self.task.dim
        if z.shape[0] != dim or c_i.shape[0] != dim:
            raise ValueError(f"predict: expected dim {dim}, got z {z.shape[0]}, c_I {c_i.shape[0]}")
        if not 0 <= token < len(self.task.vocab):
            raise ValueError(f"predict: unknown token id {token}; vocabulary size {len(self.task.vocab)}")
        if not 0.0 < t <= 1.0:
            raise ValueError(f"predict: t must lie in (0, 1], got {t}")
        target_hat = self.forward(z[None, :], c_i[None, :], np.array([token]), np.array([t]))[0]
        return (z - target_hat) / t


def init_net(seed: int, task_name: str) -> DenoiserNet:
    """Fresh net: weights N(0, 1/fan_in), biases zero, embeddings N(0, 0.02^2)."""
    task = get_task(task_name)
    rng = stream(seed, "init", task_name)
    width = HIDDEN_WIDTH[task_name]
    dims = [2 * task.dim + EMBED_DIM + TIME_DIM] + [width] * N_HIDDEN + [task.dim]
    params = [Tensor(rng.normal(0.0, 0.02, size=(len(task.vocab), EMBED_DIM)), param=True, name="embedding")]
    for i, (din, dout) in enumerate(zip(dims[:-1], dims[1:])):
        params.append(Tensor(rng.normal(size=(din, dout)) / np.sqrt(din), param=True, name=f"layer{i}.weight"))
        params.append(Tensor(np.zeros(dout), param=True, name=f"layer{i}.bias"))
    return DenoiserNet(task_name, params)


# ---- checkpoint io -------------------------------------------------------


def save_net(net: DenoiserNet, path: str) -> None:
    header = {
        "task": net.task.name,
        "vocab": list(net.task.vocab),
        "dim": net.task.dim,
        "hidden": HIDDEN_WIDTH[net.task.name],
        "head": "target",
        "embed_dim": EMBED_DIM,
        "time_dim": TIME_DIM,
        "param_names": [p.name for p in net.params],
        "shapes": [list(p.shape) for p in net.params],
        "train": net.train_config,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(blob)))
        f.write(blob)
        for p in net.params:
            f.write(np.ascontiguousarray(p.data, dtype="<f8").tobytes())


def load_net(path: str) -> DenoiserNet:
    with open(path, "rb") as f:
        raw = f.read()
    if raw[: len(MAGIC)] != MAGIC:
        raise CheckpointError(f"bad magic in {path}: expected {MAGIC!r}")
    off = len(MAGIC)
    if len(raw) < off + 4:
        raise CheckpointError(f"truncated checkpoint {path}: missing header length")
    (hlen,) = struct.unpack_from("<I", raw, off)
    off += 4
    if len(raw) < off + hlen:
        raise CheckpointError(f"truncated checkpoint {path}: header cut short")
    header = json.loads(raw[off : off + hlen].decode("utf-8"))
    off += hlen
    shapes = [tuple(s) for s in header["shapes"]]
    expected = sum(int(np.prod(s)) for s in shapes) * 8
    payload = raw[off:]
    if len(payload) != expected:
        raise CheckpointError(
            f"checkpoint {path}: payload is {len(payload)} bytes, header implies {expected}"
        )
    params = []
    pos = 0
    for name, shape in zip(header["param_names"], shapes):
        n = int(np.prod(shape)) * 8
        arr = np.frombuffer(payload[pos : pos + n], dtype="<f8").reshape(shape)
        params.append(Tensor(arr.copy(), param=True, name=name))
        pos += n
    return DenoiserNet(header["task"], params, train_config=header.get("train"))


# ---- verification --------------------------------------------------------


def gradcheck_denoiser(net: DenoiserNet, seed: int, coords_per_param: int = 25) -> float:
    """Gradcheck the full denoiser graph on a random batch; returns max rel error."""
    task = net.task
    rng = stream(seed, "gradcheck")
    batch = 2
    z = rng.normal(size=(batch, task.dim))
    c_i = rng.normal(size=(batch, task.dim))
    ids = rng.integers(0, len(task.vocab), size=batch)
    ts = rng.uniform(0.1, 1.0, size=batch)
    target = rng.normal(size=(batch, task.dim))

    def build(g: ndcore.Graph):
        pred = net.forward_tape(g, z, c_i, ids, ts)
        return g.mse_loss(pred, Tensor(target))

    return ndcore.gradcheck(build, net.params, max_coords_per_param=coords_per_param,
                            rng=stream(seed, "gradcheck-coords"))

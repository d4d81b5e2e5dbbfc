import time
from pathlib import Path

import pytest

from adaor.model import CheckpointError, load_net, save_net
from adaor.train import MixConfig, TrainConfig, train

CACHE = Path(__file__).resolve().parent.parent / ".cache"

# acceptance-suite training configs; changing them invalidates the cache names
VEC_5K = TrainConfig(task="vec", steps=5000, batch=64, lr=1e-3, seed=0)
DISC_30K = TrainConfig(task="disc", steps=30000, batch=64, lr=1e-3, seed=0)


def cached_checkpoint(name: str, cfg: TrainConfig) -> str:
    """Train once per machine; later runs load the cached checkpoint."""
    CACHE.mkdir(exist_ok=True)
    path = CACHE / f"{name}.ckpt"
    if path.exists():
        try:
            net = load_net(str(path))
            if net.train_config == cfg.echo():
                return str(path)
        except CheckpointError:
            pass
        path.unlink()
    started = time.perf_counter()
    net, _ = train(cfg)
    (CACHE / f"{name}.seconds").write_text(f"{time.perf_counter() - started:.1f}")
    save_net(net, str(path))
    return str(path)


def train_seconds(name: str) -> float:
    sidecar = CACHE / f"{name}.seconds"
    return float(sidecar.read_text()) if sidecar.exists() else 0.0


@pytest.fixture(scope="session")
def vec5k_ckpt():
    return cached_checkpoint("vec5k", VEC_5K)


@pytest.fixture(scope="session")
def disc30k_ckpt():
    return cached_checkpoint("disc30k", DISC_30K)


@pytest.fixture(scope="session")
def quick_vec_ckpt(tmp_path_factory):
    """A lightly trained vec checkpoint for CLI/service plumbing tests."""
    cfg = TrainConfig(task="vec", steps=800, batch=32, lr=3e-3, seed=0,
                      mix=MixConfig(p_null=0.1, p_id=0.1))
    net, _ = train(cfg)
    path = tmp_path_factory.mktemp("ckpt") / "vec.ckpt"
    save_net(net, str(path))
    return str(path)

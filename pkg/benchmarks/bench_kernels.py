"""Throughput comparison of the kernel backends.

Runs the training step and the sweep sampler with both the compiled
extension and the NumPy fallback in subprocesses (the backend is fixed at
import time), then prints steps/s side by side.

    python benchmarks/bench_kernels.py [--task disc] [--steps 300]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

_WORKER = r"""
import json, time
import numpy as np
from adaor.ndcore import kernels
from adaor.train import TrainConfig, MixConfig, train_step, _make_batch
from adaor.model import init_net
from adaor.ndcore import AdamState
from adaor.guidance import GuidanceConfig
from adaor import sampler
from adaor.rng import stream
from adaor.task import get_task

task_name, steps = json.loads(input())
task = get_task(task_name)
net = init_net(0, task_name)
opt = AdamState(net.params, lr=1e-3)
data_rng = stream(0, "bench-data")
mix_rng = stream(0, "bench-mix")
noise_rng = stream(0, "bench-noise")
mix = MixConfig()

# warmup
for _ in range(10):
    train_step(net, _make_batch(task, data_rng, mix_rng, mix, 64), noise_rng, opt)

t0 = time.perf_counter()
for _ in range(steps):
    train_step(net, _make_batch(task, data_rng, mix_rng, mix, 64), noise_rng, opt)
train_rate = steps / (time.perf_counter() - t0)

src = task.render_case(task.sample_case(stream(1, "bench-case")))
cfg = sampler.SweepConfig(steps=64, seed=0, guidance=GuidanceConfig(variant="adaor"))
sampler.sweep(net, src, 0, cfg)  # warmup
n_sweeps = 3
t0 = time.perf_counter()
for _ in range(n_sweeps):
    sampler.sweep(net, src, 0, cfg)
sweep_rate = n_sweeps / (time.perf_counter() - t0)

print(json.dumps({"backend": kernels.BACKEND, "train_steps_per_s": train_rate,
                  "sweeps_per_s": sweep_rate}))
"""


def run_backend(backend: str, task: str, steps: int) -> dict:
    env = dict(os.environ, ADAOR_KERNELS=backend)
    proc = subprocess.run([sys.executable, "-c", _WORKER], input=json.dumps([task, steps]),
                          capture_output=True, text=True, env=env, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--task", choices=("vec", "disc"), default="disc")
    ap.add_argument("--steps", type=int, default=300)
    args = ap.parse_args()

    results = [run_backend(b, args.task, args.steps) for b in ("py", "ext")]
    print(f"task={args.task} batch=64 train-steps={args.steps}")
    print(f"{'backend':<10}{'train steps/s':>16}{'sweeps/s':>12}")
    for r in results:
        print(f"{r['backend']:<10}{r['train_steps_per_s']:>16.1f}{r['sweeps_per_s']:>12.2f}")
    speedup = results[1]["train_steps_per_s"] / results[0]["train_steps_per_s"]
    print(f"ext/py train speedup: {speedup:.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())

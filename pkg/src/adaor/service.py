"""Stateless HTTP service exposing sweep generation over one checkpoint.

Request validation failures return 400 with field-level messages; a
diverging sample returns 422 with the failing step, because the cfg-id
instability is something to demonstrate, not hide. Identical requests
produce byte-identical responses.
"""

from __future__ import annotations

import hashlib
import math
import time
from dataclasses import asdict

import numpy as np
from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import metrics as mx
from .guidance import DEFAULT_W, SCHEDULERS, VARIANTS, GuidanceConfig
from .model import load_net
from .pngio import sample_png_base64
from .rng import stream
from .sampler import DivergenceError, SweepConfig, sweep
from .task import token_name

DEFAULT_ALPHAS = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
LATENCY_BUDGET_S = 2.0


class SweepRequest(BaseModel):
    instruction: str
    variant: str = "adaor"
    w: float = DEFAULT_W
    scheduler: str = "sqrt"
    alphas: list[float] = list(DEFAULT_ALPHAS)
    seed: int = 0
    case_seed: int = 0
    steps: int = 64


def _clean(value):
    """JSON-safe floats: NaN/inf become null (FastAPI forbids them)."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def _validate(req: SweepRequest, task) -> list[dict]:
    errors = []
    edit_names = [token_name(t) for t in task.edit_tokens]
    if req.instruction not in edit_names:
        errors.append({"field": "instruction",
                       "message": f"unknown edit instruction {req.instruction!r}; options: {edit_names}"})
    if req.variant not in VARIANTS:
        errors.append({"field": "variant", "message": f"must be one of {list(VARIANTS)}"})
    if req.scheduler not in SCHEDULERS:
        errors.append({"field": "scheduler", "message": f"must be one of {list(SCHEDULERS)}"})
    if req.w < 0:
        errors.append({"field": "w", "message": "guidance scale must be >= 0"})
    if not req.alphas or any(not 0.0 <= a <= 1.0 for a in req.alphas):
        errors.append({"field": "alphas", "message": "alphas must be a non-empty list within [0, 1]"})
    if req.steps < 2:
        errors.append({"field": "steps", "message": "integration needs at least 2 steps"})
    return errors


def create_app(ckpt_path: str) -> FastAPI:
    net = load_net(ckpt_path)
    task = net.task
    with open(ckpt_path, "rb") as f:
        checkpoint_id = hashlib.sha256(f.read()).hexdigest()[:16]
    emb = mx.randproj_embedding(task.dim)
    dir_texts = {tok: mx.text_direction_proxy(task, tok, emb) for tok in task.edit_tokens}

    app = FastAPI(title="adaor sweep service")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(RequestValidationError)
    async def validation_as_400(request, exc):
        errors = [{"field": ".".join(str(p) for p in e["loc"] if p != "body"),
                   "message": e["msg"]} for e in exc.errors()]
        return JSONResponse(status_code=400, content={"errors": errors})

    @app.get("/api/health")
    def health():
        return {"status": "ok", "checkpoint_id": checkpoint_id, "task": task.name}

    @app.get("/api/meta")
    def meta():
        return {
            "task": task.name,
            "dim": task.dim,
            "image_shape": list(task.image_shape),
            "vocabulary": list(task.vocab),
            "instructions": [token_name(t) for t in task.edit_tokens],
            "variants": list(VARIANTS),
            "schedulers": list(SCHEDULERS),
            "defaults": {"w": DEFAULT_W, "scheduler": "sqrt", "variant": "adaor",
                         "alphas": list(DEFAULT_ALPHAS), "steps": 64},
            "checkpoint_id": checkpoint_id,
        }

    @app.post("/api/sweep")
    def run_sweep(req: SweepRequest):
        errors = _validate(req, task)
        if errors:
            return JSONResponse(status_code=400, content={"errors": errors})
        token = task.vocab.index(req.instruction)
        case = task.sample_case(stream(req.case_seed, "case", task.name))
        source = task.render_case(case)
        cfg = SweepConfig(
            alphas=tuple(req.alphas), steps=req.steps, seed=req.seed,
            guidance=GuidanceConfig(variant=req.variant, w=req.w, scheduler=req.scheduler),
        )
        started = time.perf_counter()
        try:
            sw = sweep(net, source, token, cfg)
        except DivergenceError as exc:
            return JSONResponse(status_code=422, content={
                "error": "divergence", "variant": exc.variant, "step": exc.step,
                "alpha": exc.alpha, "max_norm": _clean(exc.max_norm),
            })

        metrics_dict = None
        if len(sw.outputs) >= 3:
            report = mx.evaluate_sweep(sw, emb, dir_texts[token], task=task,
                                       with_residuals=task.name == "disc")
            metrics_dict = _clean(asdict(report))

        def encode(sample: np.ndarray) -> dict:
            return {"values": [float(v) for v in sample], "png": sample_png_base64(task, sample)}

        body = {
            "source": encode(source),
            "outputs": [dict(alpha=float(a), **encode(o)) for a, o in zip(sw.alphas, sw.outputs)],
            "references": [dict(alpha=float(a), **encode(task.reference(case, token, a)))
                           for a in sw.alphas],
            "norm_traces": [_clean(float(v)) for v in sw.norm_traces],
            "metrics": metrics_dict,
            "config": req.model_dump(),
            "checkpoint_id": checkpoint_id,
        }
        elapsed = time.perf_counter() - started
        if elapsed > LATENCY_BUDGET_S:
            print(f"warning: sweep took {elapsed:.2f}s (budget {LATENCY_BUDGET_S:.0f}s)")
        return JSONResponse(content=body)

    return app

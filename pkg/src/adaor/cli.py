"""Command-line entry point: train, sweep, eval, oracle-id, gradcheck, serve.

Every command prints its full effective config up front and writes it as
`#`-prefixed comment lines into any CSV it produces, so outputs are
reproducible from their own headers. Exit codes: 0 success, 1 usage,
2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import metrics as mx
from . import model, sampler, train
from .guidance import DEFAULT_W, SCHEDULERS, VARIANTS, GuidanceConfig
from .pngio import write_grid_png
from .rng import stream
from .task import token_id, token_name

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

DEFAULT_ALPHAS = "0:1:6"
DEFAULT_ODE_STEPS = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        raise SystemExit((EXIT_USAGE, f"{self.prog}: error: {message}"))


def parse_alphas(text: str) -> tuple[float, ...]:
    """`START:END:COUNT` for a uniform grid, or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"alpha range must be START:END:COUNT, got {text!r}")
        start, end, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ValueError(f"alpha count must be >= 1, got {count}")
        vals = np.linspace(start, end, count)
    else:
        vals = np.array([float(v) for v in text.split(",") if v != ""])
    if vals.size == 0 or np.any(vals < 0.0) or np.any(vals > 1.0):
        raise ValueError(f"alphas must lie in [0, 1], got {text!r}")
    return tuple(float(v) for v in vals)


def _echo_config(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    print(f"# config: {json.dumps(cfg, sort_keys=True)}")
    return cfg


def _config_comments(cfg: dict) -> str:
    return "".join(f"# {k}={v}\n" for k, v in sorted(cfg.items()))


def _edit_token(task, name: str) -> int:
    tok = token_id(name)
    if tok not in task.edit_tokens:
        editable = ", ".join(token_name(t) for t in task.edit_tokens)
        raise ValueError(f"{name} is not an edit instruction; choose one of: {editable}")
    return tok


def _case_noise_seed(seed: int, index: int) -> int:
    return int(stream(seed, "noise-seed", index).integers(2**31 - 1))


# ---- train ----------------------------------------------------------------


def cmd_train(args) -> int:
    _echo_config(args)
    steps = args.steps if args.steps is not None else train.DEFAULT_STEPS[args.task]
    tcfg = train.TrainConfig(
        task=args.task, steps=steps, batch=args.batch, lr=args.lr, seed=args.seed,
        mix=train.MixConfig(p_null=args.p_null, p_id=args.p_id),
    )
    net, losses = train.train(tcfg, loss_csv=args.out + ".loss.csv")
    model.save_net(net, args.out)
    print(f"trained {args.task} for {steps} steps; final loss {losses[-1]:.5f}")
    print(f"checkpoint: {args.out}")
    print(f"loss curve: {args.out}.loss.csv")
    return EXIT_OK


# ---- sweep ----------------------------------------------------------------


def cmd_sweep(args) -> int:
    cfg = _echo_config(args)
    net = model.load_net(args.ckpt)
    task = net.task
    token = _edit_token(task, args.instruction)
    alphas = parse_alphas(args.alphas)
    scfg = sampler.SweepConfig(
        alphas=alphas, steps=args.ode_steps, seed=args.seed,
        guidance=GuidanceConfig(variant=args.variant, w=args.w, scheduler=args.scheduler),
    )
    case = task.sample_case(stream(args.case_seed, "case", task.name))
    source = task.render_case(case)
    sw = sampler.sweep(net, source, token, scfg)

    if args.png:
        write_grid_png(task, [source] + sw.outputs, args.png)
        print(f"grid: {args.png}")
    if args.csv:
        emb = mx.get_embedding(args.embedding, task.dim)
        with_res = task.name == "disc" and not args.no_residuals
        report = None
        residuals = None
        if len(sw.outputs) >= 3:
            dir_text = mx.text_direction_proxy(task, token, emb)
            report = mx.evaluate_sweep(sw, emb, dir_text, task=task, with_residuals=with_res)
            residuals = report.manifold_residual_per_alpha
        elif with_res:
            residuals = [task.manifold_residual(o) for o in sw.outputs]
        src_norm = float(np.linalg.norm(source))
        lines = [_config_comments(cfg)]
        lines.append("alpha,rel_l2_to_source,max_pred_norm" + (",residual" if residuals else "") + "\n")
        for i, alpha in enumerate(sw.alphas):
            rel = float(np.linalg.norm(sw.outputs[i] - source)) / max(src_norm, 1e-12)
            row = f"{alpha:.6g},{rel:.8g},{sw.norm_traces[i]:.8g}"
            if residuals:
                row += f",{residuals[i]:.8g}"
            lines.append(row + "\n")
        if report is not None:
            lines.append(f"# {mx.CSV_HEADER}\n")
            lines.append(mx.csv_row(f"case{args.case_seed}", args.variant, args.scheduler,
                                    args.w, len(alphas), report) + "\n")
        with open(args.csv, "w") as f:
            f.writelines(lines)
        print(f"csv: {args.csv}")
    return EXIT_OK


# ---- eval -----------------------------------------------------------------


def cmd_eval(args) -> int:
    cfg = _echo_config(args)
    net = model.load_net(args.ckpt)
    task = net.task
    variants = tuple(v for v in args.variants.split(",") if v)
    for v in variants:
        if v not in VARIANTS:
            raise ValueError(f"unknown variant {v!r}; options: {', '.join(VARIANTS)}")
    emb = mx.get_embedding(args.embedding, task.dim)
    dir_texts = {tok: mx.text_direction_proxy(task, tok, emb) for tok in task.edit_tokens}
    alphas = parse_alphas(args.alphas)

    rows = []
    per_variant: dict[str, list[mx.MetricsReport]] = {v: [] for v in variants}
    for i in range(args.n_cases):
        case = task.sample_case(stream(args.seed, "eval-case", i))
        source = task.render_case(case)
        noise_seed = _case_noise_seed(args.seed, i)
        for tok in task.edit_tokens:
            for variant in variants:
                case_id = f"case{i}_{token_name(tok)}"
                scfg = sampler.SweepConfig(
                    alphas=alphas, steps=args.ode_steps, seed=noise_seed,
                    guidance=GuidanceConfig(variant=variant, w=args.w, scheduler=args.scheduler),
                )
                try:
                    sw = sampler.sweep(net, source, tok, scfg)
                except sampler.DivergenceError as exc:
                    rows.append(f"{case_id},{variant},{args.scheduler},{args.w:g},"
                                f"{len(alphas)},nan,nan,nan,nan,nan,nan  # diverged at step {exc.step}")
                    continue
                report = mx.evaluate_sweep(sw, emb, dir_texts[tok], task=task,
                                           with_residuals=args.residuals)
                per_variant[variant].append(report)
                rows.append(mx.csv_row(case_id, variant, args.scheduler, args.w, len(alphas), report))

    agg_rows = []
    summary = []
    for variant in variants:
        reps = per_variant[variant]
        fields = ["delta_smooth", "linearity_cv", "norm_dir", "traj_consistency", "mean_step"]
        med = {f: float(np.median([getattr(r, f) for r in reps])) if reps else float("nan")
               for f in fields}
        med_res = (float(np.median([r.mean_residual for r in reps]))
                   if reps and args.residuals else float("nan"))
        body = ",".join(f"{med[f]:.6g}" for f in fields)
        agg_rows.append(f"median,{variant},{args.scheduler},{args.w:g},{len(alphas)},{body},{med_res:.6g}")
        summary.append((variant, med, len(reps)))

    with open(args.report, "w") as f:
        f.write(_config_comments(cfg))
        f.write(mx.CSV_HEADER + "\n")
        for r in rows:
            f.write(r + "\n")
        for r in agg_rows:
            f.write(r + "\n")

    print(f"report: {args.report}")
    print(f"{'variant':<16}{'delta_smooth':>14}{'linearity':>12}{'norm_dir':>10}{'consistency':>13}{'sweeps':>8}")
    meds = {}
    for variant, med, n in summary:
        meds[variant] = med
        print(f"{variant:<16}{med['delta_smooth']:>14.4f}{med['linearity_cv']:>12.4f}"
              f"{med['norm_dir']:>10.4f}{med['traj_consistency']:>13.4f}{n:>8}")
    if "adaor" in meds and "cfgid" in meds:
        # informational only: at paper scale cfg-id pairs good linearity with
        # poor second-order smoothness
        a, c = meds["adaor"], meds["cfgid"]
        print(f"note: cfgid linearity {c['linearity_cv']:.4f} vs adaor {a['linearity_cv']:.4f}; "
              f"cfgid delta_smooth {c['delta_smooth']:.4f} vs adaor {a['delta_smooth']:.4f}")
    return EXIT_OK


# ---- oracle-id -------------------------------------------------------------


def cmd_oracle_id(args) -> int:
    cfg = _echo_config(args)
    net = model.load_net(args.ckpt)
    task = net.task
    t_grid = tuple(float(v) for v in args.t_grid.split(",") if v)
    if any(not 0.0 < t <= 1.0 for t in t_grid):
        raise ValueError(f"t grid values must lie in (0, 1], got {args.t_grid!r}")

    rows = []
    by_t: dict[float, list[float]] = {t: [] for t in t_grid}
    for i in range(args.n_cases):
        source = task.render_case(task.sample_case(stream(args.seed, "oracle-case", i)))
        eps = stream(args.seed, "oracle-noise", i).standard_normal(task.dim)
        for t in t_grid:
            z = (1.0 - t) * source + t * eps
            learned = net.predict(z, source, task.id_token, t)
            analytic = (z - source) / t
            cosine = float(learned @ analytic / (np.linalg.norm(learned) * np.linalg.norm(analytic)))
            rel_l2 = float(np.linalg.norm(learned - analytic) / np.linalg.norm(analytic))
            # divergence law check on the analytical branch, exact by construction
            law_err = abs(float(np.linalg.norm(analytic)) * t - float(np.linalg.norm(z - source)))
            by_t[t].append(cosine)
            rows.append(f"{i},{t:.6g},{cosine:.8g},{rel_l2:.8g},{law_err:.3e}")

    with open(args.report, "w") as f:
        f.write(_config_comments(cfg))
        f.write("case,t,cosine,rel_l2,norm_law_abs_err\n")
        for r in rows:
            f.write(r + "\n")
        for t in t_grid:
            f.write(f"median,{t:.6g},{np.median(by_t[t]):.8g},nan,nan\n")

    print(f"report: {args.report}")
    for t in t_grid:
        print(f"t={t:<6g} median cosine {np.median(by_t[t]):.4f}")
    return EXIT_OK


# ---- gradcheck / serve ------------------------------------------------------


def cmd_gradcheck(args) -> int:
    _echo_config(args)
    worst = 0.0
    for task_name in ("vec", "disc"):
        net = model.init_net(args.seed, task_name)
        err = model.gradcheck_denoiser(net, seed=args.seed, coords_per_param=args.coords)
        print(f"{task_name}: max relative gradient error {err:.3e}")
        worst = max(worst, err)
    if worst >= 1e-5:
        print(f"gradcheck FAILED: {worst:.3e} >= 1e-5", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"gradcheck passed: {worst:.3e} < 1e-5")
    return EXIT_OK


def cmd_serve(args) -> int:
    _echo_config(args)
    import uvicorn

    from .service import create_app

    app = create_app(args.ckpt)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except (OSError, SystemExit) as exc:
        print(f"serve failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


# ---- parser -----------------------------------------------------------------


def build_parser() -> _Parser:
    p = _Parser(prog="adaor", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a checkpoint")
    t.add_argument("--task", choices=("vec", "disc"), required=True)
    t.add_argument("--steps", type=int, default=None, help="default: 5000 vec / 30000 disc")
    t.add_argument("--batch", type=int, default=64)
    t.add_argument("--lr", type=float, default=1e-3)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--p-null", type=float, default=0.10, dest="p_null")
    t.add_argument("--p-id", type=float, default=0.10, dest="p_id")
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train)

    s = sub.add_parser("sweep", help="generate an edit-strength sweep")
    s.add_argument("--ckpt", required=True)
    s.add_argument("--instruction", required=True)
    s.add_argument("--alphas", default=DEFAULT_ALPHAS)
    s.add_argument("--w", type=float, default=DEFAULT_W)
    s.add_argument("--scheduler", choices=SCHEDULERS, default="sqrt")
    s.add_argument("--variant", choices=VARIANTS, default="adaor")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--case-seed", type=int, default=0, dest="case_seed")
    s.add_argument("--ode-steps", type=int, default=DEFAULT_ODE_STEPS, dest="ode_steps")
    s.add_argument("--embedding", choices=("pixel", "randproj"), default="randproj")
    s.add_argument("--no-residuals", action="store_true", dest="no_residuals")
    s.add_argument("--png", default=None)
    s.add_argument("--csv", default=None)
    s.set_defaults(func=cmd_sweep)

    e = sub.add_parser("eval", help="metric table over cases x instructions x variants")
    e.add_argument("--ckpt", required=True)
    e.add_argument("--n-cases", type=int, default=32, dest="n_cases")
    e.add_argument("--variants", default=",".join(VARIANTS))
    e.add_argument("--report", required=True)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--w", type=float, default=DEFAULT_W)
    e.add_argument("--scheduler", choices=SCHEDULERS, default="sqrt")
    e.add_argument("--alphas", default=DEFAULT_ALPHAS)
    e.add_argument("--ode-steps", type=int, default=DEFAULT_ODE_STEPS, dest="ode_steps")
    e.add_argument("--embedding", choices=("pixel", "randproj"), default="randproj")
    e.add_argument("--residuals", action="store_true",
                   help="include manifold residuals (slow; disc task only)")
    e.set_defaults(func=cmd_eval)

    o = sub.add_parser("oracle-id", help="learned vs analytical identity prediction")
    o.add_argument("--ckpt", required=True)
    o.add_argument("--report", required=True)
    o.add_argument("--t-grid", default="0.3,0.5,0.7,0.9", dest="t_grid")
    o.add_argument("--n-cases", type=int, default=64, dest="n_cases")
    o.add_argument("--seed", type=int, default=0)
    o.set_defaults(func=cmd_oracle_id)

    g = sub.add_parser("gradcheck", help="autodiff vs central differences on the denoiser")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--coords", type=int, default=20, help="probed coordinates per parameter")
    g.set_defaults(func=cmd_gradcheck)

    v = sub.add_parser("serve", help="run the sweep HTTP service")
    v.add_argument("--ckpt", required=True)
    v.add_argument("--host", default="127.0.0.1")
    v.add_argument("--port", type=int, default=8000)
    v.set_defaults(func=cmd_serve)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if isinstance(exc.code, tuple):
            code, message = exc.code
            print(message, file=sys.stderr)
            return code
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

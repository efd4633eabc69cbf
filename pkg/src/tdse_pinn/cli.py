"""Command-line entry point: ``tdse-pinn {train,eval,sweep,oracle,export,show-config}``.

``--config`` takes a path, or ``preset:NAME`` for a shipped preset (see
``tdse-pinn show-config --list``).
"""
from __future__ import annotations

import argparse
import contextlib
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import evaluator, network, physics
from .config import ExperimentConfig, format_config, load_config, preset_path
from .errors import CheckpointError, ConfigError, TrainingDiverged
from .trainer import train

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_CHECKPOINT = 4

log = logging.getLogger("tdse_pinn")


def resolve_config(spec: str, desk: bool = False, seed=None) -> ExperimentConfig:
    if spec.startswith("preset:"):
        name = spec.split(":", 1)[1]
        path = preset_path(name)
        if not path.exists():
            raise ConfigError(f"unknown preset {name!r}")
    else:
        path = Path(spec)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
    cfg = load_config(path)
    if desk:
        cfg = cfg.desk_scale()
    if seed is not None:
        cfg = cfg.with_overrides(seed=seed)
    return cfg


def write_report(path, values: dict) -> None:
    lines = []
    for k, v in values.items():
        if isinstance(v, float):
            v = repr(v)
        lines.append(f"{k} = {v}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_report(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        if "=" in line:
            k, v = (p.strip() for p in line.split("=", 1))
            out[k] = v
    return out


@contextlib.contextmanager
def thread_limit():
    """Cap BLAS threads at ``TDSE_PINN_THREADS`` when set."""
    n = os.environ.get("TDSE_PINN_THREADS")
    if not n:
        yield
        return
    from threadpoolctl import threadpool_limits

    with threadpool_limits(limits=max(1, int(n))):
        yield


def _out_dir(args, cfg) -> Path:
    out = Path(args.out or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _evaluation_outputs(params, cfg, out: Path) -> dict:
    report = evaluator.evaluate_grid(params, cfg.state, cfg.domain, cfg.eval_dx, cfg.eval_dt)
    evaluator.write_per_time_csv(out / "per_time_mse.csv", report, cfg.domain.t_min)
    values = {"experiment": cfg.kind, **report.as_dict()}
    if params.config.input_width == 3:
        m, n = cfg.state.m, cfg.state.n
        rows = evaluator.omega_sweep(params, m, n, evaluator.default_sweep_omegas(), cfg.domain,
                                     cfg.eval_dx, cfg.eval_dt)
        evaluator.write_sweep_csv(out / "omega_sweep.csv", rows)
        inside = [r.mse for r in rows if r.in_training_range]
        outside = [r.mse for r in rows if not r.in_training_range]
        values["sweep_median_mse_in_range"] = float(np.median(inside))
        values["sweep_median_mse_out_of_range"] = float(np.median(outside))
    return values


def _load_matching_checkpoint(path, cfg) -> network.NetworkParams:
    params = network.load_checkpoint(path)
    if params.config.input_width != cfg.network.input_width:
        raise ConfigError(
            f"checkpoint input width {params.config.input_width} does not match "
            f"config ({cfg.network.input_width})"
        )
    return params


def cmd_train(args) -> int:
    cfg = resolve_config(args.config, args.desk_scale, args.seed)
    out = _out_dir(args, cfg)
    (out / "config.cfg").write_text(format_config(cfg))
    start = time.perf_counter()

    def progress(step, row):
        log.info("step %d lr %.3e total %.4e L_f %.3e L_BC %.3e L_IC %.3e",
                 step, row["lr"], row["total"], row["L_f"], row["L_BC"], row["L_IC"])

    try:
        result = train(cfg, out_dir=out, callback=progress, final_eval=False)
    except TrainingDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    elapsed = time.perf_counter() - start
    values = _evaluation_outputs(result.params, cfg, out)
    values.update({"steps": result.steps, "converged": result.converged,
                   "training_time_s": elapsed, "n_params": result.params.flat.size})
    write_report(out / "report.txt", values)
    print(f"final grid MSE |phi|^2 = {values['global_mse']:.6e} ({result.steps} steps)")
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = resolve_config(args.config, args.desk_scale)
    params = _load_matching_checkpoint(args.checkpoint, cfg)
    out = _out_dir(args, cfg)
    values = _evaluation_outputs(params, cfg, out)
    write_report(out / "eval_report.txt", values)
    print(f"grid {values['grid_nt']}x{values['grid_nx']}  MSE |phi|^2 = {values['global_mse']:.6e}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = resolve_config(args.config, args.desk_scale)
    params = _load_matching_checkpoint(args.checkpoint, cfg)
    out = _out_dir(args, cfg)
    omegas = args.omegas if args.omegas else evaluator.default_sweep_omegas()
    rows = evaluator.omega_sweep(params, cfg.state.m, cfg.state.n, omegas, cfg.domain,
                                 cfg.eval_dx, cfg.eval_dt)
    evaluator.write_sweep_csv(out / "omega_sweep.csv", rows)
    for r in rows:
        print(f"omega={r.omega:.3f}  mse={r.mse:.4e}  {'in' if r.in_training_range else 'out'}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    cfg = resolve_config(args.config)
    out = _out_dir(args, cfg)
    exact = physics.analytical_field(cfg.state, cfg.domain, cfg.eval_dx, cfg.eval_dt)
    cn = physics.crank_nicolson_state(cfg.state, cfg.domain, cfg.eval_dx, cfg.eval_dt,
                                      margin=cfg.oracle_margin)
    exact.to_csv(out / "analytical.csv")
    cn.to_csv(out / "crank_nicolson.csv")
    (out / "analytical.wave").write_bytes(exact.to_bytes())
    (out / "crank_nicolson.wave").write_bytes(cn.to_bytes())
    mse = float(np.mean((exact.density - cn.density) ** 2))
    write_report(out / "oracle_report.txt", {
        "experiment": cfg.kind, "grid_nt": exact.nt, "grid_nx": exact.nx,
        "oracle_margin": cfg.oracle_margin, "mse_analytical_vs_crank_nicolson": mse,
    })
    print(f"analytical vs Crank-Nicolson MSE |phi|^2 = {mse:.3e}")
    return EXIT_OK


def cmd_export(args) -> int:
    cfg = resolve_config(args.config, args.desk_scale)
    params = _load_matching_checkpoint(args.checkpoint, cfg)
    out = _out_dir(args, cfg)
    field = evaluator.predict_field(params, cfg.domain, cfg.eval_dx, cfg.eval_dt, cfg.state.omega)
    if args.format == "csv":
        field.to_csv(out / "prediction.csv")
    else:
        (out / "prediction.wave").write_bytes(field.to_bytes())
    return EXIT_OK


def cmd_show_config(args) -> int:
    if args.list:
        for p in sorted(preset_path("x").parent.glob("*.cfg")):
            print(p.stem)
        return EXIT_OK
    if not args.config:
        raise ConfigError("show-config needs --config or --list")
    sys.stdout.write(format_config(resolve_config(args.config, args.desk_scale, args.seed)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tdse-pinn", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, checkpoint=False, desk=True, seed=False, help=None):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", required=name != "show-config")
        p.add_argument("--out")
        if checkpoint:
            p.add_argument("--checkpoint", required=True)
        if desk:
            p.add_argument("--desk-scale", action="store_true",
                           help="apply the desk-scale overrides (4x64 network, 5000 steps, "
                                "short-budget schedule)")
        if seed:
            p.add_argument("--seed", type=int, help="override the config seed")
        p.set_defaults(func=fn)
        return p

    add("train", cmd_train, seed=True, help="train a surrogate")
    add("eval", cmd_eval, checkpoint=True, help="evaluate a checkpoint on the grid")
    sw = add("sweep", cmd_sweep, checkpoint=True, help="omega sweep of a conditioned model")
    sw.add_argument("--omegas", type=float, nargs="+")
    add("oracle", cmd_oracle, desk=False, help="analytical and Crank-Nicolson fields")
    ex = add("export", cmd_export, checkpoint=True, help="export the predicted field")
    ex.add_argument("--format", choices=("csv", "binary"), default="csv")
    sc = add("show-config", cmd_show_config, seed=True, help="print a resolved config")
    sc.add_argument("--list", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        with thread_limit():
            return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CheckpointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECKPOINT


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands: ``simulate`` (write a synthetic dataset + truth file), ``fit``
(CSV in, model JSON out), ``predict`` (model + feature CSV in, prediction
CSV out), ``select-dim`` (bootstrap dimension scores), and ``benchmark``
(replicate study against the linear baseline).  Every command is
deterministic given identical inputs and --seed.

Exit codes: 0 success; 1 benchmark with no surviving replicates; 2 invalid
input (bad flag, bad column, malformed data); 3 hard numerical failure
inside fitting.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .benchmark import run_benchmark
from .core import FitConfig, OptimizerSettings, dataset_from_csv
from .dimension import select_dimension
from .errors import ConstantColumn, NonFinite, SemifitError, ShapeMismatch
from .estimator import fit, load_model, save_model
from .prediction import decompose
from .simulate import SimSpec, generate

__all__ = ["entrypoint", "main"]

# Failures of these kinds mean the inputs were bad (exit 2); any other
# SemifitError means the inputs were accepted but fitting broke (exit 3).
_VALIDATION_ERRORS = (ValueError, ShapeMismatch, ConstantColumn, NonFinite, OSError)


def _csv_names(text: str) -> list[str]:
    names = [part.strip() for part in text.split(",") if part.strip()]
    if not names:
        raise argparse.ArgumentTypeError("expected a comma-separated column list")
    return names


def _add_role_flags(sub: argparse.ArgumentParser, with_outcome: bool = True) -> None:
    if with_outcome:
        sub.add_argument("--outcome", required=True, help="outcome column name")
    sub.add_argument("--int", dest="int_cols", required=True, type=_csv_names,
                     metavar="COLS", help="interpretable columns, comma-separated")
    sub.add_argument("--uint", dest="uint_cols", required=True, type=_csv_names,
                     metavar="COLS", help="remaining feature columns, comma-separated")


def _add_fit_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--dim", type=int, default=1, help="structural dimension d")
    sub.add_argument("--delta", type=float, default=0.05,
                     help="box radius around the linear-regression coefficients")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--max-evals", type=int, default=20000,
                     help="objective evaluations per simplex run")
    sub.add_argument("--restarts", type=int, default=3,
                     help="perturbed re-initializations beyond the seeded start")
    sub.add_argument("--bandwidth", type=str, default=None, metavar="H1,H2,...",
                     help="fixed per-dimension kernel bandwidths (default: adaptive)")


def _fit_config(args: argparse.Namespace) -> FitConfig:
    bandwidth = None
    if args.bandwidth is not None:
        bandwidth = np.array([float(v) for v in args.bandwidth.split(",")])
    return FitConfig(
        d=args.dim,
        delta=args.delta,
        bandwidth_override=bandwidth,
        optimizer=OptimizerSettings(max_evals=args.max_evals, restarts=args.restarts),
        seed=args.seed,
    )


def cmd_simulate(args: argparse.Namespace) -> int:
    spec = SimSpec(case=args.case, model=args.model, n=args.n, seed=args.seed)
    data, truth = generate(spec)
    frame = pd.DataFrame({"y": data.y})
    for j, name in enumerate(data.names_int):
        frame[name] = data.x_int[:, j]
    for j, name in enumerate(data.names_uint):
        frame[name] = data.x_uint[:, j]
    frame.to_csv(args.out, index=False)
    print(f"wrote {args.out} ({data.n} rows)")
    if args.truth_out:
        doc = {
            "psi": truth.psi.tolist(),
            "gamma": [col.tolist() for col in truth.gamma.T],
        }
        Path(args.truth_out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        print(f"wrote {args.truth_out}")
    return 0


def cmd_fit(args: argparse.Namespace) -> int:
    roles = {"outcome": args.outcome, "int": args.int_cols, "uint": args.uint_cols}
    data = dataset_from_csv(args.data, roles)
    model = fit(data, _fit_config(args))
    save_model(model, args.out)
    dev = float(np.max(np.abs(model.params.psi - model.psi_init)))
    print(f"objective: {model.objective_value:.6e}")
    print(f"max |psi - psi_init|: {dev:.6g} (delta {model.config.delta:g})")
    print(f"gamma orthonormality residual: {model.params.orthonormality_residual():.3e}")
    if not model.converged:
        print("warning: optimizer stalled; model is best-so-far", file=sys.stderr)
    print(f"wrote {args.out}")
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    frame = pd.read_csv(args.data)
    missing = [c for c in args.int_cols + args.uint_cols if c not in frame.columns]
    if missing:
        raise ShapeMismatch(f"columns not found in CSV header: {missing}")
    x_int = frame[args.int_cols].to_numpy(dtype=np.float64)
    x_uint = frame[args.uint_cols].to_numpy(dtype=np.float64)
    h_part, r_part = decompose(model, x_int, x_uint)
    out = pd.DataFrame({
        "row_id": np.arange(len(frame)),
        "h_part": h_part,
        "r_part": r_part,
        "prediction": h_part + r_part,
    })
    out.to_csv(args.out, index=False)
    print(f"wrote {args.out} ({len(out)} rows)")
    return 0


def cmd_select_dim(args: argparse.Namespace) -> int:
    roles = {"outcome": args.outcome, "int": args.int_cols, "uint": args.uint_cols}
    data = dataset_from_csv(args.data, roles)
    d_hat, scores = select_dimension(data, _fit_config(args), args.k_max, args.bootstrap)
    print(f"{'k':>3}  {'score':>8}")
    for k, score in enumerate(scores, start=1):
        print(f"{k:>3}  {score:>8.4f}")
    print(f"chosen d: {d_hat}")
    if args.out:
        doc = {"d_hat": d_hat, "scores": scores.tolist()}
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    return 0


def cmd_benchmark(args: argparse.Namespace) -> int:
    config = FitConfig(
        d=args.dim,
        delta=args.delta,
        optimizer=OptimizerSettings(max_evals=args.max_evals, restarts=args.restarts),
    )
    report = run_benchmark(
        case=args.case, model=args.model, n=args.n,
        replicates=args.replicates, seed=args.seed, config=config,
    )
    if args.out:
        Path(args.out).write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    s = report["summary"]
    print(f"case {args.case} model {args.model}  n={args.n}  "
          f"replicates={args.replicates}  seed={args.seed}")
    if s["rmse_iml_mean"] is None:
        for row in report["per_replicate"]:
            print(f"  replicate {row['replicate']}: {row['error']}", file=sys.stderr)
        print("all replicates failed", file=sys.stderr)
        return 1
    print(f"{'method':<8}{'mean rmse':>12}{'sd':>10}")
    print(f"{'iml':<8}{s['rmse_iml_mean']:>12.4f}{s['rmse_iml_sd']:>10.4f}")
    print(f"{'ols':<8}{s['rmse_ols_mean']:>12.4f}{s['rmse_ols_sd']:>10.4f}")
    print(f"median projection distance  gamma: {s['proj_dist_gamma_median']:.4f}  "
          f"psi: {s['proj_dist_psi_median']:.4f}")
    if s["replicates_failed"]:
        print(f"failed replicates: {s['replicates_failed']}", file=sys.stderr)
    if args.out:
        print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semifit",
        description="Interpretable linear term plus a learned low-dimensional "
                    "kernel-smoothed residual surface.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a synthetic dataset CSV (+ truth JSON)")
    p.add_argument("--case", choices=["I", "II"], required=True)
    p.add_argument("--model", type=int, choices=[1, 2, 3, 4], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output dataset CSV path")
    p.add_argument("--truth-out", default=None, help="optional truth JSON path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a model from a CSV and save it as JSON")
    p.add_argument("--data", required=True, help="input CSV path")
    _add_role_flags(p)
    _add_fit_flags(p)
    p.add_argument("--out", required=True, help="output model JSON path")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict at new rows with a saved model")
    p.add_argument("--model", required=True, help="model JSON path")
    p.add_argument("--data", required=True, help="feature CSV path")
    _add_role_flags(p, with_outcome=False)
    p.add_argument("--out", required=True, help="output prediction CSV path")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("select-dim", help="bootstrap structural-dimension scores")
    p.add_argument("--data", required=True, help="input CSV path")
    _add_role_flags(p)
    _add_fit_flags(p)
    p.add_argument("--k-max", type=int, default=3, help="largest candidate dimension")
    p.add_argument("--bootstrap", type=int, default=10, metavar="B",
                   help="bootstrap replicates per candidate")
    p.add_argument("--out", default=None, help="optional scores JSON path")
    p.set_defaults(func=cmd_select_dim)

    p = sub.add_parser("benchmark", help="replicate study vs. the linear baseline")
    p.add_argument("--case", choices=["I", "II"], required=True)
    p.add_argument("--model", type=int, choices=[1, 2, 3, 4], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--replicates", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--max-evals", type=int, default=5000)
    p.add_argument("--restarts", type=int, default=0)
    p.add_argument("--out", default=None, help="optional report JSON path")
    p.set_defaults(func=cmd_benchmark)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SemifitError as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))

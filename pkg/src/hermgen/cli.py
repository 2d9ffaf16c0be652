"""Command-line interface: ``hermgen <command> [options]``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .errors import HermgenError, SolverError
from .experiment import ExperimentConfig, preset, run_experiment, with_overrides
from .genmodel import (
    build_eval_pair,
    build_train_dataset,
    gaussian_equivalent,
    generate,
    load_params,
    random_generator_params,
    save_params,
    write_samples_csv,
)
from .hermite import ACTIVATIONS, DEFAULT_QUAD_ORDER, HermiteSeries, expand_activation
from .moments import model_mean_cov, sample_cumulants, series_cumulants
from .nn import TrainConfig, format_trace_rows, log_checkpoints, train_online
from .solver import DEFAULT_MAX_RESTARTS, DEFAULT_TOL, solve_coefficients


def _floats(text: str) -> list:
    return [float(v) for v in text.split(",") if v.strip()]


def _info(args, msg: str) -> None:
    if not args.quiet:
        print(msg, file=sys.stderr)


def _emit_json(args, payload) -> None:
    text = json.dumps(payload, indent=1) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        _info(args, f"wrote {args.out}")
    else:
        sys.stdout.write(text)


def _require_out(args) -> Path:
    if not args.out:
        raise SystemExit(f"{args.command}: --out is required")
    return Path(args.out)


def _load_series(args) -> HermiteSeries:
    if args.series:
        return HermiteSeries.from_dict(json.loads(Path(args.series).read_text()))
    if args.coeffs:
        return HermiteSeries(tuple(_floats(args.coeffs)))
    raise SystemExit("give --series FILE or --coeffs c0,c1,...")


def cmd_expand(args):
    series = expand_activation(ACTIVATIONS[args.activation], args.degree, args.quad_order)
    _emit_json(args, series.to_dict())


def cmd_solve(args):
    try:
        rep = solve_coefficients(
            _floats(args.targets), args.degree, tol=args.tol,
            max_restarts=args.max_restarts, seed=args.seed,
        )
    except SolverError as exc:
        print(f"solve failed: best residual {exc.best_residual:.6e}", file=sys.stderr)
        return 1
    _info(args, f"residual {rep.residual_norm:.3e} after {rep.iterations} iterations, "
                f"{rep.restarts_used} restarts")
    _emit_json(args, rep.series.to_dict())
    return 0


def cmd_cumulants(args):
    if args.data:
        with open(args.data, newline="") as fh:
            rows = list(csv.DictReader(fh))
        column = args.column or next(iter(rows[0]))
        values = np.array([float(r[column]) for r in rows])
        cv = sample_cumulants(values, min(args.order, 4))
    else:
        cv = series_cumulants(_load_series(args), args.order)
    _emit_json(args, cv.to_dict())


def cmd_generate(args):
    params = load_params(args.params)
    out = _require_out(args)
    if args.kind == "model":
        write_samples_csv(generate(params, args.n, args.seed), out)
    elif args.kind == "equivalent":
        write_samples_csv(gaussian_equivalent(params, args.n, args.seed), out)
    elif args.kind == "train":
        build_train_dataset(params, args.n, args.seed).to_csv(out)
    else:
        ng, ge = build_eval_pair(params, args.n, args.seed)
        ng.to_csv(out)
        ge.to_csv(out.with_name(out.stem + "_gauss_equiv" + out.suffix))
    _info(args, f"wrote {out}")


def cmd_mean_cov(args):
    _emit_json(args, model_mean_cov(load_params(args.params)).to_dict())


def cmd_train(args):
    params = load_params(args.params)
    cfg = TrainConfig(
        learning_rate=args.lr,
        steps=args.steps,
        checkpoints=log_checkpoints(args.steps, args.checkpoints),
        n_test=args.n_test,
        seeds=(args.seed,),
        hidden=args.hidden,
        init_scale=args.init_scale,
        lr_normalization=args.lr_normalization,
    )
    trace = train_online(params, cfg, args.seed)
    text = format_trace_rows([trace])
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    _info(args, f"effective learning rate {trace.effective_lr:g} ({trace.backend} kernel)")


def _experiment_config(args) -> ExperimentConfig:
    if getattr(args, "config", None):
        return ExperimentConfig.from_dict(json.loads(Path(args.config).read_text()))
    if not args.preset:
        raise SystemExit("give --preset NAME or --config FILE")
    cfg = preset(args.preset, scale=args.scale, seed=args.seed, params_path=args.params, panel=args.panel)
    return with_overrides(cfg, steps=args.steps, learning_rate=args.lr)


def cmd_experiment(args):
    out = _require_out(args)
    cfg = _experiment_config(args)
    cfg = ExperimentConfig(cfg.model, cfg.train, cfg.label, cfg.name, str(out))
    result = run_experiment(cfg, jobs=args.jobs, plot=not args.no_plot)
    _info(args, f"{cfg.name}: final gap (gaussEq - nonGauss) = {result.final_gap():.4f}; "
                f"outputs in {out}")


def cmd_preset(args):
    args.config = None
    args.preset = args.name
    _emit_json(args, _experiment_config(args).to_dict())


def cmd_random_params(args):
    params = random_generator_params(args.k, args.p, args.row_scale, args.bias_scale, args.seed)
    out = _require_out(args)
    save_params(params, out)
    _info(args, f"wrote {out}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="root seed for all randomness")
    common.add_argument("-o", "--out", help="output file or directory")
    common.add_argument("--quiet", action="store_true", help="suppress progress messages")

    parser = argparse.ArgumentParser(prog="hermgen", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand", parents=[common], help="Hermite coefficients of an activation")
    p.add_argument("--activation", choices=sorted(ACTIVATIONS), default="tanh")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--quad-order", type=int, default=DEFAULT_QUAD_ORDER)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("solve", parents=[common], help="coefficients matching target cumulants")
    p.add_argument("--targets", required=True, help="kappa_1,...,kappa_{degree+1}")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-restarts", type=int, default=DEFAULT_MAX_RESTARTS)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("cumulants", parents=[common], help="exact or sample cumulants")
    p.add_argument("--series", help="series JSON file")
    p.add_argument("--coeffs", help="c0,c1,... inline")
    p.add_argument("--data", help="CSV file for k-statistics")
    p.add_argument("--column", help="CSV column (default: first)")
    p.add_argument("--order", type=int, default=4)
    p.set_defaults(func=cmd_cumulants)

    p = sub.add_parser("generate", parents=[common], help="sample the model or build datasets")
    p.add_argument("--params", required=True)
    p.add_argument("-n", type=int, required=True, help="rows (per class for train/eval)")
    p.add_argument("--kind", choices=["model", "equivalent", "train", "eval"], default="model")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("mean-cov", parents=[common], help="exact mean and covariance")
    p.add_argument("--params", required=True)
    p.set_defaults(func=cmd_mean_cov)

    p = sub.add_parser("train", parents=[common], help="one online-SGD run, trace CSV")
    p.add_argument("--params", required=True)
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--lr-normalization", choices=["none", "fan_in"], default="fan_in")
    p.add_argument("--hidden", type=int, default=512)
    p.add_argument("--n-test", type=int, default=2000)
    p.add_argument("--init-scale", type=float, default=1.0)
    p.add_argument("--checkpoints", type=int, default=25)
    p.set_defaults(func=cmd_train)

    def experiment_opts(p):
        p.add_argument("--scale", choices=["full", "desk"], default="full")
        p.add_argument("--params", help="parameter file (fig2-template)")
        p.add_argument("--panel", choices=list("abcd"), default="d", help="fig2-template panel")

    p = sub.add_parser("experiment", parents=[common], help="multi-seed run with CSV/SVG output")
    p.add_argument("--preset")
    p.add_argument("--config", help="config.json echo from an earlier run")
    experiment_opts(p)
    p.add_argument("--steps", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("preset", parents=[common], help="print a preset configuration")
    p.add_argument("name")
    experiment_opts(p)
    p.set_defaults(func=cmd_preset, steps=None, lr=None)

    p = sub.add_parser("random-params", parents=[common], help="random W=I generator parameter file")
    p.add_argument("--k", type=int, default=32)
    p.add_argument("--p", type=int, default=100)
    p.add_argument("--row-scale", type=float, default=1.4)
    p.add_argument("--bias-scale", type=float, default=1.0)
    p.set_defaults(func=cmd_random_params)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rc = args.func(args)
    except HermgenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())

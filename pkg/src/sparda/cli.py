"""Batch command-line front end.

Subcommands: ``simulate`` (write train/test dataset files), ``screen``
(per-variable F statistics), ``fit`` (model JSON plus a lambda/df/train
error path table), ``cv`` (cross-validation report JSON) and ``predict``
(per-lambda labels, plus an error table when the data carries labels).
stdout gets exactly one machine-readable JSON summary line per run; human
logs go to stderr.  Exit codes: 0 success, 2 usage/validation error,
1 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

METHODS = ("dsda", "road", "sos", "sesda", "msda", "catch")


def _log(msg):
    print(msg, file=sys.stderr)


def _emit(payload):
    print(json.dumps(payload))


def _default_seed(value):
    if value is not None:
        return value
    env = os.environ.get("SPARDA_SEED")
    return int(env) if env else 0


def _parse_lambdas(s):
    try:
        return [float(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad lambda list: {s!r}")


def _add_grid_args(p):
    p.add_argument("--lambdas", type=_parse_lambdas, default=None,
                   help="comma-separated penalty values (default: auto grid)")
    p.add_argument("--nlambda", type=int, default=100)
    p.add_argument("--lambda-min-ratio", type=float, default=0.05)


def _add_method_args(p):
    p.add_argument("--method", required=True, choices=METHODS)
    _add_grid_args(p)
    p.add_argument("--dfmax", type=int, default=None,
                   help="truncate the path once more variables are selected")
    p.add_argument("--model-option", default=None,
                   choices=("binary", "multi.original", "multi.modified"),
                   help="msda implementation choice")
    p.add_argument("--variant", default="pooled", choices=("naive", "pooled"),
                   help="sesda transform estimator")


class ValidationError(Exception):
    """Validation failure mapped to exit code 2."""


def _validate_method(args, data):
    if args.method in ("road", "sos", "sesda", "dsda"):
        if len(np.unique(data.y)) != 2:
            raise ValidationError(f"method {args.method} requires binary data")
    if args.model_option is not None and args.method != "msda":
        raise ValidationError("--model-option only applies to --method msda")
    if args.method == "catch" and not data.is_tensor:
        raise ValidationError("catch requires tensor data (dims in the sidecar)")
    if args.method != "catch" and data.is_tensor:
        raise ValidationError(f"method {args.method} requires vector data")


def _fit_kwargs(args):
    kw = {"nlambda": args.nlambda, "lambda_min_ratio": args.lambda_min_ratio}
    if args.method in ("msda", "catch") and args.dfmax is not None:
        kw["dfmax"] = args.dfmax
    if args.method == "msda" and args.model_option is not None:
        kw["model"] = args.model_option
    if args.method == "sesda":
        kw["variant"] = args.variant
    return kw


def _fit_any(args, data, lambdas):
    from .binary import dsda, road, sos
    from .catch import catch
    from .msda import msda
    from .sesda import sesda

    kw = _fit_kwargs(args)
    if args.method == "dsda":
        return dsda(data.x, data.y, lambdas=lambdas, z=data.u, **kw)
    if args.method == "road":
        return road(data.x, data.y, lambdas=lambdas, **kw)
    if args.method == "sos":
        return sos(data.x, data.y, lambdas=lambdas, **kw)
    if args.method == "sesda":
        return sesda(data.x, data.y, lambdas=lambdas, **kw)
    if args.method == "msda":
        return msda(data.x, data.y, z=data.u, lambdas=lambdas, **kw)
    return catch(data.x, data.y, z=data.u, lambdas=lambdas, **kw)


def cmd_simulate(args):
    from .data import LabeledDataset
    from .io import write_dataset
    from .simulate import (TensorSimSpec, VectorSimSpec, sim_binary_vector,
                           sim_tensor_cov)

    seed = _default_seed(args.seed)
    os.makedirs(args.out, exist_ok=True)
    train_path = os.path.join(args.out, "train.csv")
    test_path = os.path.join(args.out, "test.csv")
    if args.kind == "vector":
        sim = sim_binary_vector(VectorSimSpec(seed=seed, n_test=args.n_test))
    else:
        sim = sim_tensor_cov(TensorSimSpec(seed=seed, n_test=args.n_test))
    write_dataset(train_path, sim.train)
    write_dataset(test_path, sim.test)
    _log(f"simulated {args.kind} data (seed={seed}) -> {args.out}")
    _emit({
        "command": "simulate",
        "kind": args.kind,
        "seed": seed,
        "train": train_path,
        "test": test_path,
        "n_train": int(sim.train.n),
        "n_test": int(sim.test.n),
    })
    return 0


def cmd_screen(args):
    from .io import read_dataset
    from .simulate import f_screen

    data = read_dataset(args.data)
    if data.is_tensor:
        raise SystemExit2("screen requires vector data")
    res = f_screen(data.x, data.y)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variable", "f", "rank"])
        rank = np.empty(len(res.f), dtype=int)
        rank[res.ranking] = np.arange(1, len(res.f) + 1)
        for j, v in enumerate(res.f):
            writer.writerow([j + 1, f"{v:.17g}", int(rank[j])])
    top = res.top(args.top) if args.top else res.ranking
    _emit({
        "command": "screen",
        "out": args.out,
        "p": int(len(res.f)),
        "top": [int(j) + 1 for j in top[: args.top or 10]],
    })
    return 0


def cmd_fit(args):
    from .io import read_dataset, write_model

    data = read_dataset(args.data)
    _validate_method(args, data)
    fit = _fit_any(args, data, args.lambdas)
    write_model(args.model_out, fit)
    train_err = None
    if args.path_out:
        pred = fit.predict(data.x, data.u)
        errs = np.mean(pred != np.asarray(data.y)[:, None], axis=0)
        train_err = errs
        with open(args.path_out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["lambda", "df", "train_error"])
            for lam, df, e in zip(fit.lambdas, fit.df, errs):
                writer.writerow([f"{lam:.17g}", int(df), f"{e:.17g}"])
    summary = {
        "command": "fit",
        "method": args.method,
        "model": args.model_out,
        "nlambda": int(len(fit.lambdas)),
        "lambda_max": float(fit.lambdas[0]),
        "lambda_min": float(fit.lambdas[-1]),
    }
    if train_err is not None:
        summary["path_table"] = args.path_out
        summary["min_train_error"] = float(np.min(train_err))
    _emit(summary)
    return 0


def cmd_cv(args):
    from .io import read_dataset
    from .tuning import kfold_cv

    data = read_dataset(args.data)
    _validate_method(args, data)
    seed = _default_seed(args.seed)
    kw = _fit_kwargs(args)
    kw.pop("nlambda", None)
    kw.pop("lambda_min_ratio", None)
    report = kfold_cv(data.x, data.y, u=data.u, method=args.method,
                      nfolds=args.nfolds, lambdas=args.lambdas,
                      rule=args.rule, seed=seed, nlambda=args.nlambda,
                      lambda_min_ratio=args.lambda_min_ratio,
                      n_jobs=args.threads, **kw)
    payload = {
        "command": "cv",
        "method": args.method,
        "nfolds": report.nfolds,
        "rule": report.rule,
        "seed": report.seed,
        "lambdas": report.lambdas.tolist(),
        "mean_errors": report.mean_errors.tolist(),
        "chosen_lambda": report.chosen_lambda,
        "chosen_index": report.chosen_index,
    }
    with open(args.out, "w") as fh:
        json.dump(payload, fh)
        fh.write("\n")
    _log(f"cv chose lambda={report.chosen_lambda:.6g} "
         f"(mean error {report.mean_errors[report.chosen_index]:.4f})")
    _emit({k: payload[k] for k in
           ("command", "method", "nfolds", "rule", "chosen_lambda", "chosen_index")}
          | {"out": args.out})
    return 0


def cmd_predict(args):
    from .io import read_dataset, read_model

    fit = read_model(args.model)
    data = read_dataset(args.data)
    pred = fit.predict(data.x, data.u)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"lambda_{i + 1}" for i in range(pred.shape[1])])
        for row in pred:
            writer.writerow([str(v) for v in row])
    summary = {
        "command": "predict",
        "model": args.model,
        "out": args.out,
        "n": int(pred.shape[0]),
        "nlambda": int(pred.shape[1]),
    }
    if args.errors_out:
        errs = np.mean(pred != np.asarray(data.y)[:, None], axis=0)
        with open(args.errors_out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["lambda", "error"])
            for lam, e in zip(fit.lambdas, errs):
                writer.writerow([f"{lam:.17g}", f"{e:.17g}"])
        best = int(np.argmin(errs))
        summary.update({
            "errors": args.errors_out,
            "min_error": float(errs[best]),
            "lambda_at_min": float(fit.lambdas[best]),
        })
        _log(f"min error {errs[best]:.4f} at lambda={fit.lambdas[best]:.6g}")
    _emit(summary)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sparda",
        description="Sparse discriminant analysis for vector and tensor data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write simulated train/test datasets")
    p.add_argument("--kind", required=True, choices=("vector", "tensor"))
    p.add_argument("--seed", type=int, default=None,
                   help="RNG seed (default: SPARDA_SEED or 0)")
    p.add_argument("--n-test", type=int, default=1000)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("screen", help="F-statistic variable screen")
    p.add_argument("--data", required=True)
    p.add_argument("--top", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("fit", help="fit a solution path")
    _add_method_args(p)
    p.add_argument("--data", required=True)
    p.add_argument("--model-out", required=True)
    p.add_argument("--path-out", default=None,
                   help="CSV path table (lambda, df, train error)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("cv", help="k-fold cross-validation")
    _add_method_args(p)
    p.add_argument("--data", required=True)
    p.add_argument("--nfolds", type=int, default=5)
    p.add_argument("--rule", default="min", choices=("min", "max"))
    p.add_argument("--seed", type=int, default=None,
                   help="fold seed (default: SPARDA_SEED or 0)")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("predict", help="predict labels per path point")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--errors-out", default=None,
                   help="error-rate table when the data has labels")
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already
        return int(exc.code or 0)
    from .io import DatasetFormatError

    try:
        return args.func(args)
    except (ValidationError, DatasetFormatError) as exc:
        _log(f"error: {exc}")
        return 2
    except (ValueError, OSError) as exc:
        _log(f"error: {exc}")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

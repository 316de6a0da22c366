"""Command-line pipeline: simulate, fit, predict and evaluate survival models.

Flags override values from an optional JSON config file, which in turn
override built-in defaults. Models persist as versioned JSON holding the time
grid, the network parameters and the covariate standardizer. Exit codes:
0 success, 1 validation or schema error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import dataset as ds
from . import grid as grid_
from . import km as km_
from . import metrics as metrics_
from . import net as net_
from . import sim as sim_
from .curves import (
    SurvivalCurve,
    pc_hazard_curve,
    surv_from_hazard,
    surv_from_pmf,
    write_curves_csv,
)
from .errors import NumericalError, SchemaError, SurvnetError, ValidationError
from .losses import nll_logistic_hazard, nll_pc_hazard, nll_pmf, sigmoid, softplus

FORMAT_VERSION = "1"
METHODS = ("pmf", "logistic-hazard", "pc-hazard")
GRID_SCHEMES = ("equidistant", "km-quantile")
INTERPOLATIONS = ("none", "cdi", "chi")

LOSSES = {
    "pmf": nll_pmf,
    "logistic-hazard": nll_logistic_hazard,
    "pc-hazard": nll_pc_hazard,
}

SIMULATE_DEFAULTS = {
    "n": 1000,
    "seed": 0,
    "design_seed": 0,
    "censor_hazard": sim_.DEFAULT_CENSOR_HAZARD,
    "out": None,
    "truth": None,
}

FIT_DEFAULTS = {
    "method": "logistic-hazard",
    "train": None,
    "val": None,
    "grid_scheme": "km-quantile",
    "m": 25,
    "width": 64,
    "depth": 2,
    "dropout": 0.0,
    "batch_size": 256,
    "lr": 0.01,
    "cycle": 1,
    "cycle_mult": 2,
    "lr_decay": 0.8,
    "weight_decay": 0.0,
    "max_epochs": 100,
    "patience": 10,
    "seed": 0,
    "out": None,
    "log": None,
}

PREDICT_DEFAULTS = {
    "model": None,
    "data": None,
    "interp": "none",
    "times": None,
    "num_times": 100,
    "out": None,
}

EVALUATE_DEFAULTS = {
    "model": None,
    "data": None,
    "truth": None,
    "interp": "none",
    "ibs_points": 100,
    "out": None,
}


class _Parser(argparse.ArgumentParser):
    """Argparse with validation failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(message)


def _merge(args: argparse.Namespace, defaults: dict) -> dict:
    cfg = dict(defaults)
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            with open(config_path) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {config_path}: {exc}") from None
        unknown = set(loaded) - set(defaults)
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def save_model(path, method, time_grid, net, standardizer) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "method": method,
        "grid": {"cuts": time_grid.cuts.tolist()},
        "net": net_.net_to_dict(net),
        "standardizer": {
            "means": standardizer.means.tolist(),
            "stds": standardizer.stds.tolist(),
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read model {path}: {exc}") from None
    for key in ("format_version", "method", "grid", "net", "standardizer"):
        if key not in doc:
            raise SchemaError(f"{path}: model file is missing {key!r}")
    if doc["method"] not in METHODS:
        raise SchemaError(f"{path}: unknown method {doc['method']!r}")
    time_grid = grid_.TimeGrid(np.asarray(doc["grid"]["cuts"], dtype=float))
    net = net_.net_from_dict(doc["net"])
    if net.out_dim != time_grid.m:
        raise SchemaError(
            f"{path}: network outputs {net.out_dim} values, grid has {time_grid.m} intervals"
        )
    std = ds.Standardizer(
        np.asarray(doc["standardizer"]["means"], dtype=float),
        np.asarray(doc["standardizer"]["stds"], dtype=float),
    )
    return doc["method"], time_grid, net, std


def predict_curves(method, net, time_grid, covariates, interp: str = "none") -> SurvivalCurve:
    """Survival curves for a covariate matrix under the given method.

    The interpolation flag reinterprets the discrete estimates at evaluation
    time only; the piecewise-constant hazard method ignores it since its curve
    is already continuous.
    """
    if interp not in INTERPOLATIONS:
        raise ValidationError(f"interp must be one of {INTERPOLATIONS}")
    logits = net_.forward(net, covariates)
    if method == "logistic-hazard":
        curve = surv_from_hazard(sigmoid(logits), time_grid)
    elif method == "pmf":
        curve = surv_from_pmf(logits, time_grid)
    elif method == "pc-hazard":
        return pc_hazard_curve(softplus(logits), time_grid)
    else:
        raise ValidationError(f"unknown method {method!r}")
    if interp != "none":
        curve = curve.with_kind(interp)
    return curve


def evaluate_curves(curve, durations, events, ibs_points: int = 100,
                    truth=None, truth_times=None) -> list:
    """Metric reports for predicted curves against observed outcomes.

    This is the evaluation core behind the evaluate subcommand; tests can call
    it directly with hand-built curves.
    """
    n = len(durations)
    concordance = metrics_.td_concordance(curve, durations, events)
    reports = [metrics_.report("td_concordance", concordance, n)]
    eval_grid = metrics_.EvalGrid.equidistant(durations, ibs_points)
    censor_km = km_.fit(durations, 1 - np.asarray(events, dtype=int))
    ibs, dropped = metrics_.integrated_brier_score(
        curve, durations, events, eval_grid, censor_km, details=True
    )
    reports.append(metrics_.report("integrated_brier_score", ibs, n, dropped))
    if truth is not None:
        mse = metrics_.mse_vs_truth(curve, truth, metrics_.EvalGrid(truth_times))
        reports.append(metrics_.report("mse_vs_truth", mse, n))
    return reports


def run_simulate(args) -> int:
    cfg = _merge(args, SIMULATE_DEFAULTS)
    if not cfg["out"]:
        raise ValidationError("simulate needs --out for the dataset file")
    sim_cfg = sim_.SimConfig(
        n=int(cfg["n"]),
        seed=int(cfg["seed"]),
        design_seed=int(cfg["design_seed"]),
        censor_hazard=float(cfg["censor_hazard"]),
    )
    result = sim_.generate_dataset(sim_cfg)
    ds.write_csv(result.data, cfg["out"])
    truth_path = cfg["truth"] or f"{cfg['out']}.truth.csv"
    sim_.write_truth_csv(truth_path, result.times, result.truth)
    print(
        f"simulated n={result.data.n} (censored fraction "
        f"{result.censored_fraction:.4f}) -> {cfg['out']}, truth -> {truth_path}"
    )
    return 0


def _build_grid(scheme, data, m):
    if scheme == "equidistant":
        return grid_.equidistant_grid(float(data.durations.max()), m)
    if scheme == "km-quantile":
        return grid_.km_quantile_grid(data, m)
    raise ValidationError(f"unknown grid scheme {scheme!r}")


def _labels_for(method, data, time_grid):
    if method == "pc-hazard":
        return grid_.continuous_labels(data, time_grid)
    return grid_.discretize(data, time_grid)


def run_fit(args) -> int:
    cfg = _merge(args, FIT_DEFAULTS)
    for key in ("train", "val", "out"):
        if not cfg[key]:
            raise ValidationError(f"fit needs --{key}")
    method = cfg["method"]
    if method not in METHODS:
        raise ValidationError(f"method must be one of {METHODS}")
    train = ds.load_csv(cfg["train"])
    val = ds.load_csv(cfg["val"])
    std = ds.fit_standardizer(train)
    train_s, val_s = std.apply(train), std.apply(val)
    time_grid = _build_grid(cfg["grid_scheme"], train, int(cfg["m"]))
    train_labels = _labels_for(method, train, time_grid)
    val_labels = _labels_for(method, val, time_grid)
    widths = [train.p] + [int(cfg["width"])] * int(cfg["depth"]) + [time_grid.m]
    net = net_.init_mlp(widths, dropout=float(cfg["dropout"]), seed=int(cfg["seed"]))
    train_cfg = net_.TrainConfig(
        batch_size=int(cfg["batch_size"]),
        learning_rate=float(cfg["lr"]),
        cycle_length=int(cfg["cycle"]),
        cycle_mult=int(cfg["cycle_mult"]),
        lr_decay=float(cfg["lr_decay"]),
        max_epochs=int(cfg["max_epochs"]),
        patience=int(cfg["patience"]),
        seed=int(cfg["seed"]),
        weight_decay=float(cfg["weight_decay"]),
    )
    trained, log = net_.fit(
        net, LOSSES[method], train_s.covariates, train_labels,
        val_s.covariates, val_labels, train_cfg,
    )
    save_model(cfg["out"], method, time_grid, trained, std)
    if cfg["log"]:
        with open(cfg["log"], "w") as fh:
            for entry in log:
                fh.write(json.dumps(entry) + "\n")
    best = min(entry["val_loss"] for entry in log)
    print(
        f"fitted {method} with {time_grid.m} intervals in {len(log)} epochs "
        f"(best val loss {best:.6f}) -> {cfg['out']}"
    )
    return 0


def _parse_times(raw: str) -> np.ndarray:
    try:
        times = np.array([float(v) for v in raw.split(",") if v.strip() != ""])
    except ValueError:
        raise ValidationError(f"cannot parse times {raw!r}") from None
    if times.size == 0 or np.any(np.diff(times) <= 0):
        raise ValidationError("times must be increasing and nonempty")
    return times


def run_predict(args) -> int:
    cfg = _merge(args, PREDICT_DEFAULTS)
    for key in ("model", "data", "out"):
        if not cfg[key]:
            raise ValidationError(f"predict needs --{key}")
    method, time_grid, net, std = load_model(cfg["model"])
    data = std.apply(ds.load_csv(cfg["data"]))
    curve = predict_curves(method, net, time_grid, data.covariates, cfg["interp"])
    if cfg["times"]:
        times = _parse_times(cfg["times"])
    else:
        times = np.linspace(0.0, time_grid.t_max, int(cfg["num_times"]))
    write_curves_csv(cfg["out"], times, curve.evaluate(times))
    print(f"wrote {data.n} curves at {times.size} times -> {cfg['out']}")
    return 0


def run_evaluate(args) -> int:
    cfg = _merge(args, EVALUATE_DEFAULTS)
    for key in ("model", "data"):
        if not cfg[key]:
            raise ValidationError(f"evaluate needs --{key}")
    method, time_grid, net, std = load_model(cfg["model"])
    raw = ds.load_csv(cfg["data"])
    data = std.apply(raw)
    curve = predict_curves(method, net, time_grid, data.covariates, cfg["interp"])
    truth = truth_times = None
    if cfg["truth"]:
        truth_times, truth = sim_.load_truth_csv(cfg["truth"])
        if truth.shape[0] != data.n:
            raise ValidationError(
                f"truth has {truth.shape[0]} rows for {data.n} individuals"
            )
    reports = evaluate_curves(
        curve, data.durations, data.events, int(cfg["ibs_points"]), truth, truth_times
    )
    text = json.dumps(reports, indent=2)
    if cfg["out"]:
        with open(cfg["out"], "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="survnet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a synthetic dataset plus truth")
    p_sim.add_argument("--n", type=int)
    p_sim.add_argument("--seed", type=int)
    p_sim.add_argument("--design-seed", dest="design_seed", type=int)
    p_sim.add_argument("--censor-hazard", dest="censor_hazard", type=float)
    p_sim.add_argument("--out")
    p_sim.add_argument("--truth")
    p_sim.add_argument("--config")
    p_sim.set_defaults(func=run_simulate)

    p_fit = sub.add_parser("fit", help="train a survival model")
    p_fit.add_argument("--method", choices=METHODS)
    p_fit.add_argument("--train")
    p_fit.add_argument("--val")
    p_fit.add_argument("--grid-scheme", dest="grid_scheme", choices=GRID_SCHEMES)
    p_fit.add_argument("--m", type=int)
    p_fit.add_argument("--width", type=int)
    p_fit.add_argument("--depth", type=int)
    p_fit.add_argument("--dropout", type=float)
    p_fit.add_argument("--batch-size", dest="batch_size", type=int)
    p_fit.add_argument("--lr", type=float)
    p_fit.add_argument("--cycle", type=int)
    p_fit.add_argument("--cycle-mult", dest="cycle_mult", type=int)
    p_fit.add_argument("--lr-decay", dest="lr_decay", type=float)
    p_fit.add_argument("--weight-decay", dest="weight_decay", type=float)
    p_fit.add_argument("--max-epochs", dest="max_epochs", type=int)
    p_fit.add_argument("--patience", type=int)
    p_fit.add_argument("--seed", type=int)
    p_fit.add_argument("--out")
    p_fit.add_argument("--log")
    p_fit.add_argument("--config")
    p_fit.set_defaults(func=run_fit)

    p_pred = sub.add_parser("predict", help="write survival curves to CSV")
    p_pred.add_argument("--model")
    p_pred.add_argument("--data")
    p_pred.add_argument("--interp", choices=INTERPOLATIONS)
    p_pred.add_argument("--times")
    p_pred.add_argument("--num-times", dest="num_times", type=int)
    p_pred.add_argument("--out")
    p_pred.add_argument("--config")
    p_pred.set_defaults(func=run_predict)

    p_eval = sub.add_parser("evaluate", help="score a model on a dataset")
    p_eval.add_argument("--model")
    p_eval.add_argument("--data")
    p_eval.add_argument("--truth")
    p_eval.add_argument("--interp", choices=INTERPOLATIONS)
    p_eval.add_argument("--ibs-points", dest="ibs_points", type=int)
    p_eval.add_argument("--out")
    p_eval.add_argument("--config")
    p_eval.set_defaults(func=run_evaluate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, SchemaError, SurvnetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()

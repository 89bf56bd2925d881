"""Command-line surface: evaluate | bootstrap | compare | simulate.

Every command writes a manifest.json with the resolved options alongside
its outputs, so a run can be reproduced exactly. Exit codes: 0 success,
1 input/validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .baselines import hand_till_m
from .dataset import ScoredDataset, load_dataset, save_dataset
from .errors import DimensionMismatch, MultirocError, NumericalDegeneracy, UnknownExperiment
from .experiments import (
    SimulationConfig,
    cost_schedule,
    dirichlet_skew,
    fit_multinomial,
    generate_multinomial,
    majority_classifier,
)
from .factorization import CostWeights, cardinality_weights, center, fit, fit_to_json
from .pairs import default_levels, rate_matrices
from .summary import curve, curve_to_csv, curve_to_svg, d_statistic
from .uncertainty import (
    band_to_csv,
    bootstrap,
    bootstrap_to_json,
    ranking_probabilities,
    ranking_to_csv,
)


def _threads() -> int | None:
    raw = os.environ.get("MULTIROC_THREADS")
    if raw is None:
        return None
    return max(1, int(raw))


def _write_manifest(out_dir: str, command: str, inputs, options: dict) -> None:
    manifest = {
        "command": command,
        "inputs": inputs,
        "options": options,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)


def _load_labels(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if str(path).lower().endswith(".json"):
        return np.array(json.loads(text), dtype=int)
    tokens = [t for line in text.splitlines() for t in line.replace(",", " ").split()]
    tokens = [t for t in tokens if t and not t.isalpha()]
    return np.array([int(t) for t in tokens])


def _load_probs_only(path) -> np.ndarray:
    if str(path).lower().endswith(".json"):
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        return np.array(obj["probs"] if isinstance(obj, dict) else obj, dtype=float)
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            if i == 0:
                try:
                    [float(x) for x in row]
                except ValueError:
                    continue  # header row
            rows.append([float(x) for x in row])
    return np.array(rows)


def _load_scored(path, labels_path) -> ScoredDataset:
    if labels_path is None:
        return load_dataset(path)
    return ScoredDataset(_load_probs_only(path), _load_labels(labels_path))


def _resolve_weights(spec: str, rates):
    if spec in ("weighted", "unweighted"):
        return cardinality_weights(rates, spec)
    if spec.startswith("file="):
        path = spec[len("file="):]
        mat = np.loadtxt(path, delimiter=",")
        if mat.shape != (2 * rates.T, rates.K):
            raise DimensionMismatch(
                f"weight file must be {2 * rates.T} x {rates.K}, got {mat.shape}"
            )
        return cardinality_weights(
            rates, "custom", CostWeights(mat[: rates.T], mat[rates.T:])
        )
    raise MultirocError(f"unknown --weights value {spec!r}")


def _evaluate_pipeline(dataset: ScoredDataset, T: int, weights_spec: str):
    levels = default_levels(T)
    rates = rate_matrices(dataset, levels)
    costs = _resolve_weights(weights_spec, rates)
    result = fit(rates, costs)
    centered = center(result)
    roc = curve(centered, levels)
    return rates, costs, result, centered, roc, d_statistic(roc)


def _cmd_evaluate(args) -> int:
    dataset = _load_scored(args.data, args.labels)
    rates, costs, result, centered, roc, d = _evaluate_pipeline(
        dataset, args.thresholds, args.weights
    )
    if not result.converged:
        print("factorization did not converge", file=sys.stderr)
        return 2
    os.makedirs(args.out, exist_ok=True)
    curve_to_csv(roc, os.path.join(args.out, "curve.csv"))
    curve_to_svg(roc, os.path.join(args.out, "curve.svg"))
    fit_to_json(result, centered, os.path.join(args.out, "fit.json"))
    _write_manifest(
        args.out,
        "evaluate",
        {"data": args.data, "labels": args.labels},
        {
            "thresholds": args.thresholds,
            "weights": args.weights,
            "seed": args.seed,
            "format": args.format,
        },
    )
    print(f"D = {d:.4f}")
    return 0


def _cmd_bootstrap(args) -> int:
    dataset = _load_scored(args.data, args.labels)
    rates, costs, result, centered, roc, d = _evaluate_pipeline(
        dataset, args.thresholds, args.weights
    )
    if not result.converged:
        print("factorization did not converge", file=sys.stderr)
        return 2
    if args.B < 10:
        print(
            f"warning: B={args.B} is small; interval width is unreliable",
            file=sys.stderr,
        )
    boot = bootstrap(
        rates,
        result,
        costs,
        B=args.B,
        gamma=args.level,
        seed=args.seed,
        keep_curves=True,
        max_workers=_threads(),
    )
    os.makedirs(args.out, exist_ok=True)
    curve_to_csv(roc, os.path.join(args.out, "curve.csv"))
    curve_to_svg(roc, os.path.join(args.out, "curve.svg"))
    bootstrap_to_json(boot, os.path.join(args.out, "bootstrap.json"))
    band_to_csv(boot, os.path.join(args.out, "band.csv"))
    _write_manifest(
        args.out,
        "bootstrap",
        {"data": args.data, "labels": args.labels},
        {
            "thresholds": args.thresholds,
            "weights": args.weights,
            "B": args.B,
            "level": args.level,
            "seed": args.seed,
            "format": args.format,
        },
    )
    print(f"D = {d:.4f} [{boot.ci[0]:.4f}, {boot.ci[1]:.4f}]")
    return 0


def _cmd_compare(args) -> int:
    if len(args.models) < 2:
        raise MultirocError("compare needs at least two model files")
    datasets = [_load_scored(path, args.labels) for path in args.models]
    n, k = datasets[0].n, datasets[0].k
    for path, ds in zip(args.models, datasets):
        if ds.n != n or ds.k != k:
            raise DimensionMismatch(
                f"{path}: expected n={n}, k={k}, got n={ds.n}, k={ds.k}"
            )
        if not np.array_equal(ds.labels, datasets[0].labels):
            raise DimensionMismatch(f"{path}: labels differ from first model")
    os.makedirs(args.out, exist_ok=True)
    names = [os.path.splitext(os.path.basename(p))[0] for p in args.models]
    results = []
    rows = []
    for name, ds in zip(names, datasets):
        rates, costs, result, centered, roc, d = _evaluate_pipeline(
            ds, args.thresholds, args.weights
        )
        if not result.converged:
            print(f"{name}: factorization did not converge", file=sys.stderr)
            return 2
        boot = bootstrap(
            rates, result, costs, B=args.B, gamma=args.level,
            seed=args.seed, max_workers=_threads(),
        )
        m_hat = hand_till_m(ds)
        results.append((name, boot))
        rows.append((name, d, boot.ci, m_hat))
        print(f"{name}: D = {d:.4f} [{boot.ci[0]:.4f}, {boot.ci[1]:.4f}]  M = {m_hat:.4f}")
    table = ranking_probabilities(results)
    ranking_to_csv(table, os.path.join(args.out, "ranking.csv"))
    with open(os.path.join(args.out, "samples.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "replicate", "d"])
        for name, boot in results:
            for b, val in enumerate(boot.d_samples):
                writer.writerow([name, b, f"{val:.17g}"])
    with open(os.path.join(args.out, "summary.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "d", "ci_lower", "ci_upper", "hand_till_m"])
        for name, d, (lo, hi), m_hat in rows:
            writer.writerow([name, f"{d:.17g}", f"{lo:.17g}", f"{hi:.17g}", f"{m_hat:.17g}"])
    _write_manifest(
        args.out,
        "compare",
        {"models": list(args.models), "labels": args.labels},
        {
            "thresholds": args.thresholds,
            "weights": args.weights,
            "B": args.B,
            "level": args.level,
            "seed": args.seed,
            "format": args.format,
        },
    )
    return 0


def _parse_range(text: str) -> list:
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(t) for t in text.split(",")]


def _parse_floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",")]


def _unweighted_d(dataset: ScoredDataset, T: int) -> float:
    levels = default_levels(T)
    rates = rate_matrices(dataset, levels)
    result = fit(rates, cardinality_weights(rates, "unweighted"))
    return d_statistic(curve(center(result), levels))


def _cmd_simulate(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    if args.experiment == "discriminative":
        return _simulate_discriminative(args)
    if args.experiment == "skewness":
        return _simulate_skewness(args)
    if args.experiment == "weights":
        return _simulate_weights(args)
    raise UnknownExperiment(f"unknown experiment {args.experiment!r}")


def _simulate_discriminative(args) -> int:
    config = SimulationConfig(args.n, args.p, args.k, args.p, args.seed, args.label_mode)
    truth, x, _ = generate_multinomial(config)
    save_dataset(truth, os.path.join(args.out, "dataset.csv"))
    counts = np.bincount(truth.labels, minlength=truth.k).tolist()
    summary = []
    if args.run:
        rng = np.random.default_rng(args.seed + 1)
        ds = _parse_range(args.d)
        for d in ds:
            fitted = fit_multinomial(x[:, :d], truth.labels, k=truth.k)
            score = _unweighted_d(fitted, args.thresholds)
            summary.append((str(d), score))
        noise = rng.standard_normal(x.shape)
        fitted = fit_multinomial(noise, truth.labels, k=truth.k)
        summary.append(("noise", _unweighted_d(fitted, args.thresholds)))
        with open(os.path.join(args.out, "discriminative.csv"), "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["d", "D"])
            for d, score in summary:
                writer.writerow([d, f"{score:.17g}"])
    _write_manifest(
        args.out,
        "simulate discriminative",
        {},
        {
            "n": args.n, "p": args.p, "k": args.k, "seed": args.seed,
            "label_mode": args.label_mode, "d": args.d, "run": args.run,
            "thresholds": args.thresholds, "class_counts": counts,
        },
    )
    return 0


def _simulate_skewness(args) -> int:
    config = SimulationConfig(args.n, args.p, args.k, args.p, args.seed)
    truth, x, _ = generate_multinomial(config)
    counts = np.bincount(truth.labels, minlength=truth.k)
    n_sub = args.n_sub or int(counts.min())
    rng = np.random.default_rng(args.seed + 17)
    balanced_idx = np.concatenate([
        rng.choice(np.flatnonzero(truth.labels == c), n_sub, replace=False)
        for c in range(truth.k)
    ])
    balanced_idx.sort()
    realized = []
    if args.run:
        ds = _parse_range(args.d)
        alphas = _parse_floats(args.alpha)
        rows = []
        for d in ds:
            fitted = fit_multinomial(x[balanced_idx, :d], truth.labels[balanced_idx], k=truth.k)
            for alpha in alphas:
                for rep in range(args.replicates):
                    seed = [args.seed, d, int(alpha * 1000), rep]
                    skewed, z = dirichlet_skew(fitted, alpha, seed)
                    score = _unweighted_d(skewed, args.thresholds)
                    rows.append((d, alpha, rep, z, score))
                    realized.append(z)
        with open(os.path.join(args.out, "skewness.csv"), "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["d", "alpha", "replicate", "Z", "D"])
            for row in rows:
                writer.writerow([row[0], row[1], row[2], f"{row[3]:.17g}", f"{row[4]:.17g}"])
    _write_manifest(
        args.out,
        "simulate skewness",
        {},
        {
            "n": args.n, "p": args.p, "k": args.k, "seed": args.seed,
            "d": args.d, "alpha": args.alpha, "replicates": args.replicates,
            "n_sub": n_sub, "run": args.run, "thresholds": args.thresholds,
            "realized_Z": realized,
        },
    )
    return 0


def _simulate_weights(args) -> int:
    rng = np.random.default_rng(args.seed)
    w = rng.dirichlet(np.full(args.k, float(args.alpha_scalar)))
    labels = rng.choice(args.k, size=args.n, p=w)
    majority = int(np.bincount(labels, minlength=args.k).argmax())
    probs = np.full((args.n, args.k), 0.3 / (args.k - 1))
    probs[:, majority] = 0.7
    dataset = ScoredDataset(probs, labels)
    save_dataset(dataset, os.path.join(args.out, "dataset.csv"))
    if args.run:
        cs = _parse_floats(args.c)
        levels = default_levels(args.thresholds)
        import warnings as _warnings

        with _warnings.catch_warnings():
            _warnings.simplefilter("ignore")  # constant scores: expected degenerate grid
            rates = rate_matrices(dataset, levels)
        rows = []
        for c in cs:
            costs = cost_schedule(args.k, majority, c, args.thresholds)
            result = fit(rates, costs)
            score = d_statistic(curve(center(result), levels))
            rows.append((c, score))
        with open(os.path.join(args.out, "weights.csv"), "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["c", "D"])
            for c, score in rows:
                writer.writerow([f"{c:.17g}", f"{score:.17g}"])
    _write_manifest(
        args.out,
        "simulate weights",
        {},
        {
            "n": args.n, "k": args.k, "seed": args.seed, "c": args.c,
            "alpha": args.alpha_scalar, "majority": majority, "run": args.run,
            "thresholds": args.thresholds,
        },
    )
    return 0


def _common_eval_flags(sub):
    sub.add_argument("--labels", default=None, help="separate labels file")
    sub.add_argument("--thresholds", type=int, default=50, metavar="T")
    sub.add_argument("--weights", default="weighted",
                     help="weighted | unweighted | file=PATH")
    sub.add_argument("--out", default=".", help="output directory")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multiroc",
        description="Multiclass ROC/AUC evaluation via rank-1 binomial factorization",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    ev = subs.add_parser("evaluate", help="curve + D statistic for one model")
    ev.add_argument("data", help="probabilities (+ labels) file, csv or json")
    _common_eval_flags(ev)
    ev.set_defaults(func=_cmd_evaluate)

    bo = subs.add_parser("bootstrap", help="evaluate with a bootstrap CI")
    bo.add_argument("data")
    _common_eval_flags(bo)
    bo.add_argument("--B", type=int, default=100)
    bo.add_argument("--level", type=float, default=0.95)
    bo.set_defaults(func=_cmd_bootstrap)

    co = subs.add_parser("compare", help="rank several models on shared labels")
    co.add_argument("models", nargs="+")
    _common_eval_flags(co)
    co.add_argument("--B", type=int, default=100)
    co.add_argument("--level", type=float, default=0.95)
    co.set_defaults(func=_cmd_compare)

    si = subs.add_parser("simulate", help="run a simulation study")
    si.add_argument("experiment", choices=("discriminative", "skewness", "weights"))
    si.add_argument("--n", type=int, default=10000)
    si.add_argument("--p", type=int, default=10)
    si.add_argument("--k", type=int, default=5)
    si.add_argument("--seed", type=int, default=0)
    si.add_argument("--out", default=".")
    si.add_argument("--run", action="store_true", help="also run the evaluation sweep")
    si.add_argument("--thresholds", type=int, default=50, metavar="T")
    si.add_argument("--label-mode", choices=("random", "deterministic"), default="random")
    si.add_argument("--d", default="1..10", help="covariate prefix sizes, e.g. 1..10 or 2,5,9")
    si.add_argument("--alpha", default="2,5,9", help="Dirichlet concentrations (skewness)")
    si.add_argument("--alpha-scalar", type=float, default=2.0, dest="alpha_scalar",
                    help="label-skew concentration (weights experiment)")
    si.add_argument("--c", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1,"
                               "1.1111111111111112,1.25,1.4285714285714286,"
                               "1.6666666666666667,2,2.5,3.3333333333333335,5,10",
                    help="cost multipliers (weights experiment)")
    si.add_argument("--replicates", type=int, default=30)
    si.add_argument("--n-sub", type=int, default=None, dest="n_sub")
    si.set_defaults(func=_cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalDegeneracy as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except MultirocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

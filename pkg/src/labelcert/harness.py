"""Experiment harness: rate tables, ridge sweeps, group breakdowns, attacks, timing.

Everything here is deterministic given the experiment config and seed; wall
clock measurements are kept in a separate report section so the rest of a
report is reproducible bit for bit.
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .approx import certify_approx, certify_approx_classification, model_hull
from .bias import BiasSpec, PerturbationVector, contains
from .config import ExperimentConfig, build_delta, resolve_budget
from .data import SplitConfig, kfold, load_csv, split
from .errors import (
    DimensionMismatch,
    EmptyGrid,
    LabelCertError,
    MissingGroups,
    NoAttackExists,
    TooFewRows,
)
from .exact import (
    certify_from_influence,
    classify_from_influence,
    min_flips_from_influence,
    prediction_range,
)
from .linalg import Dataset, ModelCoefficients, fit, influence_vector, predict, solve_ridge

WORKERS_ENV = "LABELCERT_WORKERS"


def worker_count(explicit: int | None = None) -> int:
    if explicit is not None:
        return max(1, int(explicit))
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def _map_points(fn, count: int, workers: int) -> np.ndarray:
    if count == 0:
        return np.zeros(0, dtype=bool)
    if workers <= 1:
        return np.fromiter((fn(i) for i in range(count)), dtype=bool, count=count)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.fromiter(pool.map(fn, range(count)), dtype=bool, count=count)


@dataclass(frozen=True)
class CertifiedRate:
    """Fraction of test points certified robust, with the per-point verdicts."""

    fraction: float
    verdicts: np.ndarray


def _exact_verdicts(influence, train_y, X_test, task, spec, epsilon, workers) -> np.ndarray:
    def one(i: int) -> bool:
        z = X_test[i] @ influence.values
        if task == "classification":
            return classify_from_influence(z, train_y, spec).robust
        return certify_from_influence(z, train_y, spec, epsilon).robust

    return _map_points(one, len(X_test), workers)


def _approx_verdicts(hull, theta, X_test, task, epsilon, workers) -> np.ndarray:
    def one(i: int) -> bool:
        if task == "classification":
            return certify_approx_classification(hull, theta, X_test[i]).certified
        return certify_approx(hull, theta, X_test[i], epsilon).certified

    return _map_points(one, len(X_test), workers)


def robustness_rate(
    train: Dataset,
    X_test: np.ndarray,
    task: str,
    spec: BiasSpec,
    epsilon: float | None,
    lam: float,
    method: str,
    workers: int | None = None,
) -> CertifiedRate:
    """Certified fraction of the test rows under one method at one budget."""
    workers = worker_count(workers)
    theta, influence = fit(train, lam)
    if method == "exact":
        verdicts = _exact_verdicts(influence, train.y, X_test, task, spec, epsilon, workers)
    elif method == "approx":
        hull = model_hull(influence, train.y, spec)
        verdicts = _approx_verdicts(hull, theta, X_test, task, epsilon, workers)
    else:
        raise ValueError(f"method must be 'exact' or 'approx', got {method!r}")
    fraction = float(verdicts.mean()) if verdicts.size else float("nan")
    return CertifiedRate(fraction, verdicts)


def _accuracy(theta: ModelCoefficients, X: np.ndarray, y: np.ndarray, task: str) -> float:
    """Validation score: classification accuracy, or negative MSE for regression."""
    preds = X @ theta.values
    if task == "classification":
        return float(np.mean((preds >= 0.5) == (y == 1.0)))
    return -float(np.mean((preds - y) ** 2))


@dataclass(frozen=True)
class SweepResult:
    chosen_lam: float
    accuracies: dict
    admissible: tuple
    certified_rates: dict  # admissible lambdas only, at the reference budget


def lambda_sweep(
    train: Dataset,
    val: Dataset,
    task: str,
    delta: PerturbationVector,
    reference_budget: int,
    epsilon: float | None,
    lambda_grid,
    tolerance_pct: float,
    workers: int | None = None,
) -> SweepResult:
    """Pick the ridge strength: best certified rate among accuracy-admissible values.

    A value is admissible when its validation accuracy is within
    `tolerance_pct` percentage points of the best over the grid (for
    regression the tolerance applies relative to the best negative MSE).
    Ties in certified rate resolve toward the larger ridge strength.
    """
    grid = tuple(float(l) for l in lambda_grid)
    if not grid:
        raise EmptyGrid("lambda grid is empty")
    if val.n == 0:
        raise TooFewRows("lambda sweep needs a nonempty validation split")
    accuracies = {lam: _accuracy(solve_ridge(train, lam), val.X, val.y, task) for lam in grid}
    best = max(accuracies.values())
    if task == "classification":
        floor = best - tolerance_pct / 100.0
    else:
        floor = best - tolerance_pct / 100.0 * max(abs(best), 1e-12)
    admissible = tuple(lam for lam in grid if accuracies[lam] >= floor)
    spec = BiasSpec(delta, reference_budget)
    rates = {
        lam: robustness_rate(train, val.X, task, spec, epsilon, lam, "exact", workers).fraction
        for lam in admissible
    }
    chosen = None
    for lam in sorted(admissible):
        if chosen is None or rates[lam] >= rates[chosen]:
            chosen = lam
    return SweepResult(chosen, accuracies, admissible, rates)


def group_rates(verdicts: np.ndarray, groups) -> dict:
    """Certified fraction per distinct group value."""
    if groups is None:
        raise MissingGroups("no group labels available for these rows")
    groups = tuple(groups)
    if len(groups) != len(verdicts):
        raise DimensionMismatch(f"{len(verdicts)} verdicts but {len(groups)} group labels")
    if not groups:
        raise MissingGroups("empty group label vector")
    verdicts = np.asarray(verdicts, dtype=bool)
    out = {}
    for g in sorted(set(groups)):
        mask = np.array([x == g for x in groups])
        out[g] = float(verdicts[mask].mean())
    return out


@dataclass(frozen=True)
class RobustnessReport:
    """Aggregated experiment output; `timings` is the only nondeterministic part."""

    task: str
    seed: int
    folds: int
    budgets: tuple
    per_fold: tuple
    summary: dict
    timings: dict

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "seed": self.seed,
            "folds": self.folds,
            "budgets": [str(b) for b in self.budgets],
            "per_fold": list(self.per_fold),
            "summary": self.summary,
            "timings": self.timings,
        }


def _fold_splits(dataset: Dataset, config: ExperimentConfig):
    """Yield (train, val, test) triples for the configured split or fold plan.

    In fold mode the validation part is carved out of each fold's training
    rows at the configured train:val ratio; it is None when too few rows
    remain.
    """
    sc = config.split
    if sc.folds <= 1:
        yield split(dataset, sc)
        return
    val_share = sc.val / (sc.train + sc.val)
    for i, (train_full, test) in enumerate(kfold(dataset, sc)):
        n_val = int(train_full.n * val_share)
        perm = np.random.default_rng((sc.seed, i)).permutation(train_full.n)
        val = train_full.subset(perm[:n_val]) if n_val else None
        yield train_full.subset(perm[n_val:]), val, test


def _run_fold(train, val, test, config: ExperimentConfig, methods, workers, timings):
    delta = build_delta(config, train)
    sweep_info = None
    if len(config.lambda_grid) > 1:
        if val is None:
            raise TooFewRows("lambda sweep needs a nonempty validation split")
        ref = resolve_budget(config.reference_budget, train.n)
        sweep = lambda_sweep(
            train, val, config.task, delta, ref, config.epsilon,
            config.lambda_grid, config.accuracy_tolerance, workers,
        )
        lam = sweep.chosen_lam
        accuracy = sweep.accuracies[lam]
        sweep_info = {
            "reference_budget": ref,
            "accuracies": {str(l): sweep.accuracies[l] for l in config.lambda_grid},
            "admissible": [float(l) for l in sweep.admissible],
            "rates": {str(l): sweep.certified_rates[l] for l in sweep.admissible},
        }
    else:
        lam = config.lambda_grid[0]
        accuracy = (
            _accuracy(solve_ridge(train, lam), val.X, val.y, config.task)
            if val is not None
            else None
        )

    theta, influence = fit(train, lam)
    rates: dict = {m: {} for m in methods}
    verdicts: dict = {m: {} for m in methods}
    fold_groups: dict = {m: {} for m in methods}
    for entry in config.budgets:
        label = str(entry)
        spec = BiasSpec(delta, resolve_budget(entry, train.n))
        if "exact" in methods:
            start = time.perf_counter()
            v = _exact_verdicts(
                influence, train.y, test.X, config.task, spec, config.epsilon, workers
            )
            timings["exact"] = timings.get("exact", 0.0) + time.perf_counter() - start
            verdicts["exact"][label] = v
        if "approx" in methods:
            start = time.perf_counter()
            hull = model_hull(influence, train.y, spec)
            v = _approx_verdicts(hull, theta, test.X, config.task, config.epsilon, workers)
            timings["approx"] = timings.get("approx", 0.0) + time.perf_counter() - start
            verdicts["approx"][label] = v
        for m in methods:
            v = verdicts[m][label]
            rates[m][label] = float(v.mean()) if v.size else float("nan")
            if test.group_labels is not None and v.size:
                fold_groups[m][label] = group_rates(v, test.group_labels)
        if "exact" in methods and "approx" in methods:
            if rates["approx"][label] > rates["exact"][label] + 1e-12:
                raise RuntimeError(
                    f"soundness violation: approximate rate {rates['approx'][label]} "
                    f"exceeds exact rate {rates['exact'][label]} at budget {label}"
                )
    return {
        "chosen_lambda": float(lam),
        "accuracy": accuracy,
        "budget_counts": {str(e): resolve_budget(e, train.n) for e in config.budgets},
        "rates": rates,
        "group_rates": fold_groups,
        "verdicts": {m: {b: v.tolist() for b, v in verdicts[m].items()} for m in methods},
        "sweep": sweep_info,
    }


def run_experiment(
    config: ExperimentConfig,
    dataset: Dataset | None = None,
    methods=("exact", "approx"),
) -> RobustnessReport:
    """Full pipeline: split, choose the ridge strength, certify the grid, aggregate folds."""
    if dataset is None:
        if config.data_path is None or config.schema is None:
            raise LabelCertError("config must provide a dataset path and schema")
        dataset = load_csv(
            config.data_path,
            config.schema,
            require_binary_labels=config.task == "classification",
        )
    workers = worker_count(config.workers)
    timings: dict = {}
    per_fold = []
    for fold_index, (train, val, test) in enumerate(_fold_splits(dataset, config)):
        result = _run_fold(train, val, test, config, methods, workers, timings)
        result["fold"] = fold_index
        per_fold.append(result)

    summary: dict = {}
    for m in methods:
        summary[m] = {}
        for entry in config.budgets:
            label = str(entry)
            values = [f["rates"][m][label] for f in per_fold]
            summary[m][label] = {
                "mean": float(np.mean(values)),
                "min": float(np.min(values)),
                "max": float(np.max(values)),
            }
    return RobustnessReport(
        task=config.task,
        seed=config.seed,
        folds=config.split.folds,
        budgets=tuple(str(b) for b in config.budgets),
        per_fold=tuple(per_fold),
        summary=summary,
        timings=timings,
    )


def write_report(report: RobustnessReport, out_dir: str | Path) -> Path:
    """Persist report.json plus plot-ready CSV tables; returns the JSON path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = report.to_dict()
    json_path = out / "report.json"
    json_path.write_text(json.dumps(payload, indent=2, sort_keys=True))
    render_csv_tables(payload, out)
    return json_path


def render_csv_tables(payload: dict, out_dir: str | Path) -> list[Path]:
    """Re-render a report dict into rates/groups/verdicts/sweep CSV tables."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    methods = sorted(payload["summary"].keys())
    rates_path = out / "rates.csv"
    with open(rates_path, "w", newline="") as handle:
        writer = csv.writer(handle)
        header = ["budget"]
        for m in methods:
            header += [f"{m}_mean", f"{m}_min", f"{m}_max"]
        writer.writerow(header)
        for label in payload["budgets"]:
            row = [label]
            for m in methods:
                stats = payload["summary"][m][label]
                row += [stats["mean"], stats["min"], stats["max"]]
            writer.writerow(row)
    written.append(rates_path)

    group_rows = []
    for fold in payload["per_fold"]:
        for m, by_budget in fold["group_rates"].items():
            for label, by_group in by_budget.items():
                for group, rate in sorted(by_group.items()):
                    group_rows.append([fold["fold"], m, label, group, rate])
    if group_rows:
        groups_path = out / "groups.csv"
        with open(groups_path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["fold", "method", "budget", "group", "rate"])
            writer.writerows(group_rows)
        written.append(groups_path)

    verdicts_path = out / "verdicts.csv"
    with open(verdicts_path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["fold", "method", "budget", "row", "robust"])
        for fold in payload["per_fold"]:
            for m, by_budget in fold["verdicts"].items():
                for label, flags in by_budget.items():
                    for row_index, flag in enumerate(flags):
                        writer.writerow([fold["fold"], m, label, row_index, int(flag)])
    written.append(verdicts_path)

    sweep_rows = []
    for fold in payload["per_fold"]:
        info = fold.get("sweep")
        if info:
            for lam_label, acc in info["accuracies"].items():
                sweep_rows.append(
                    [
                        fold["fold"],
                        lam_label,
                        acc,
                        int(float(lam_label) in set(info["admissible"])),
                        info["rates"].get(lam_label, ""),
                    ]
                )
    if sweep_rows:
        sweep_path = out / "sweep.csv"
        with open(sweep_path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["fold", "lambda", "accuracy", "admissible", "val_rate"])
            writer.writerows(sweep_rows)
        written.append(sweep_path)
    return written


def timing_report(
    train: Dataset,
    X_test: np.ndarray,
    task: str,
    spec: BiasSpec,
    epsilon: float | None,
    lam: float,
    workers: int | None = None,
) -> dict:
    """Wall-clock comparison of the two certifiers over the same test points.

    The shared fit is excluded; the approximate figure includes building the
    coefficient hull.
    """
    workers = worker_count(workers)
    theta, influence = fit(train, lam)

    start = time.perf_counter()
    exact = _exact_verdicts(influence, train.y, X_test, task, spec, epsilon, workers)
    exact_seconds = time.perf_counter() - start

    start = time.perf_counter()
    hull = model_hull(influence, train.y, spec)
    hull_seconds = time.perf_counter() - start
    approx = _approx_verdicts(hull, theta, X_test, task, epsilon, workers)
    approx_seconds = time.perf_counter() - start

    return {
        "points": int(len(X_test)),
        "budget": spec.budget,
        "exact_seconds": exact_seconds,
        "approx_seconds": approx_seconds,
        "hull_seconds": hull_seconds,
        "exact_rate": float(exact.mean()) if exact.size else float("nan"),
        "approx_rate": float(approx.mean()) if approx.size else float("nan"),
    }


def export_attack(
    x: np.ndarray,
    dataset: Dataset,
    delta: PerturbationVector,
    lam: float,
    flips,
    labels_path: str | Path,
) -> dict:
    """Write a poisoned label file that attacks the thresholded prediction of x.

    `flips` is either "minimal" (smallest attack that flips the class, via
    the greedy search) or a fixed count (the extreme witness at that budget,
    padded with zero-effect label changes so the file differs from the
    original labels in exactly the requested number of rows).
    """
    y = dataset.y
    _, influence = fit(dataset, lam)
    z = influence_vector(x, influence)
    base = float(z @ y)
    base_class = base >= 0.5

    if flips == "minimal":
        side = "lower" if base_class else "upper"
        result = min_flips_from_influence(z, y, delta, abs(base - 0.5), side=side)
        if result is None:
            raise NoAttackExists(
                "no reachable label perturbation changes this prediction"
            )
        y_tilde = np.array(result.witness)
        mode, requested = "minimal", result.flips
    else:
        k = int(flips)
        if not 0 <= k <= dataset.n:
            raise ValueError(f"flip count must be in [0, {dataset.n}], got {flips!r}")
        spec = BiasSpec(delta, k)
        rng = prediction_range(z, y, spec)
        y_tilde = np.array(rng.lower_witness if base_class else rng.upper_witness)
        changed = np.flatnonzero(y_tilde != y)
        if changed.size < k:
            y_tilde = _pad_attack(y, y_tilde, z, delta, k, base_class)
        mode, requested = "fixed", k

    changed = np.flatnonzero(y_tilde != y)
    spec = BiasSpec(delta, len(changed) if flips == "minimal" else int(flips))
    if not contains(spec, y, y_tilde):
        raise RuntimeError("internal error: exported attack escapes the bias set")
    refit = solve_ridge(dataset.with_labels(y_tilde), lam)
    new_pred = predict(refit, x)

    with open(labels_path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["index", "label", "changed"])
        for i in range(dataset.n):
            writer.writerow([i, f"{y_tilde[i]:.17g}", int(y_tilde[i] != y[i])])

    return {
        "mode": mode,
        "requested": requested,
        "changed_rows": changed.tolist(),
        "changed_count": int(changed.size),
        "old_prediction": base,
        "new_prediction": float(new_pred),
        "old_class": int(base_class),
        "new_class": int(new_pred >= 0.5),
        "flipped": bool((new_pred >= 0.5) != base_class),
        "labels_path": str(labels_path),
    }


def _pad_attack(y, y_tilde, z, delta, k, base_class) -> np.ndarray:
    """Top up a fixed-budget attack to exactly k changed rows.

    Untouched rows are changed by their most attack-friendly nonzero
    endpoint; rows that would push the prediction the wrong way come last
    and in increasing order of damage.
    """
    y_tilde = y_tilde.copy()
    need = k - int(np.count_nonzero(y_tilde != y))
    candidates = []
    for i in range(len(y)):
        if y_tilde[i] != y[i]:
            continue
        toward = delta.lo[i] if (z[i] >= 0) == base_class else delta.hi[i]
        other = delta.hi[i] if (z[i] >= 0) == base_class else delta.lo[i]
        d = toward if toward != 0 else other
        if d == 0:
            continue
        effect = z[i] * d
        gain = -effect if base_class else effect  # toward the decision flip
        candidates.append((-gain, i, d))
    candidates.sort()
    if len(candidates) < need:
        raise NoAttackExists(
            f"only {k - need + len(candidates)} labels may change under this perturbation model"
        )
    for _, i, d in candidates[:need]:
        y_tilde[i] = y[i] + d
    return y_tilde

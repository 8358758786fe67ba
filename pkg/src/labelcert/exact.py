"""Exact pointwise certification.

For a fixed test point the prediction is a linear functional z . y of the
training labels, so the reachable prediction set under a label perturbation
budget is a closed interval whose endpoints are attained by moving the
budgeted number of highest-impact labels to interval endpoints.  This module
computes that interval, the witness label vectors attaining it, robustness
verdicts against a prediction band, and the smallest budget that breaks
robustness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bias import BiasSpec, Interval, PerturbationVector
from .errors import DimensionMismatch, NonBinaryLabel
from .linalg import Dataset, fit, influence_vector

# Binary decision threshold; a prediction of exactly 0.5 classifies as 1.
DECISION_THRESHOLD = 0.5


@dataclass(frozen=True)
class PotentialImpacts:
    """Per-label extremal effect on one prediction.

    positive[i] is the largest increase perturbing label i alone can cause,
    negative[i] the largest decrease; both are 0 when the label cannot move
    or has no influence.
    """

    positive: np.ndarray
    negative: np.ndarray


@dataclass(frozen=True)
class PredictionRange:
    """Reachable prediction interval plus the label vectors attaining each end."""

    interval: Interval
    lower_witness: np.ndarray
    upper_witness: np.ndarray


@dataclass(frozen=True)
class CertResult:
    """Verdict for one test point.

    `counterexample` is present exactly when not robust: a reachable label
    vector whose refit prediction escapes the allowed band.
    """

    robust: bool
    range: PredictionRange
    epsilon: float
    base_prediction: float
    counterexample: np.ndarray | None


@dataclass(frozen=True)
class MinFlipsResult:
    """Smallest budget that breaks robustness, with the breaking label vector."""

    flips: int
    witness: np.ndarray
    prediction: float
    side: str  # "upper" or "lower"


def potential_impacts(z: np.ndarray, delta: PerturbationVector) -> PotentialImpacts:
    """Extremal per-label effects of moving each label within its interval.

    For influence z_i >= 0 the largest increase uses the upper interval
    endpoint and the largest decrease the lower one; signs swap for z_i < 0.
    """
    z = np.asarray(z, dtype=float)
    if z.shape != delta.lo.shape:
        raise DimensionMismatch(
            f"influence vector has shape {z.shape}, perturbation vector {delta.lo.shape}"
        )
    nonneg = z >= 0
    positive = np.where(nonneg, z * delta.hi, z * delta.lo)
    negative = np.where(nonneg, z * delta.lo, z * delta.hi)
    positive.flags.writeable = False
    negative.flags.writeable = False
    return PotentialImpacts(positive, negative)


def _top_indices(impacts: np.ndarray, budget: int, maximize: bool) -> np.ndarray:
    """Indices of the `budget` largest gains (or most negative drops).

    Ties break toward the lowest index; zero-impact labels are never chosen
    since perturbing them cannot move the prediction.
    """
    order = np.argsort(-impacts if maximize else impacts, kind="stable")
    chosen = order[:budget]
    return chosen[impacts[chosen] > 0] if maximize else chosen[impacts[chosen] < 0]


def _perturbed(
    y: np.ndarray, z: np.ndarray, delta: PerturbationVector, idx: np.ndarray, upward: bool
) -> np.ndarray:
    out = y.copy()
    if idx.size:
        toward_hi = (z[idx] >= 0) == upward
        out[idx] = y[idx] + np.where(toward_hi, delta.hi[idx], delta.lo[idx])
    out.flags.writeable = False
    return out


def prediction_range(z: np.ndarray, y: np.ndarray, spec: BiasSpec) -> PredictionRange:
    """Tight reachable prediction interval for the linear functional z . y.

    The upper end moves the budgeted number of labels with the largest
    positive impact to their extreme endpoints; the lower end mirrors with
    the largest negative impacts.  Both witnesses are returned and are valid
    members of the reachable label set.
    """
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    if z.shape != y.shape or y.shape != (spec.n,):
        raise DimensionMismatch(
            f"shapes z{z.shape}, y{y.shape} inconsistent with spec length {spec.n}"
        )
    impacts = potential_impacts(z, spec.delta)
    up_idx = _top_indices(impacts.positive, spec.budget, maximize=True)
    dn_idx = _top_indices(impacts.negative, spec.budget, maximize=False)
    y_upper = _perturbed(y, z, spec.delta, up_idx, upward=True)
    y_lower = _perturbed(y, z, spec.delta, dn_idx, upward=False)
    return PredictionRange(
        interval=Interval(float(z @ y_lower), float(z @ y_upper)),
        lower_witness=y_lower,
        upper_witness=y_upper,
    )


def certify_from_influence(
    z: np.ndarray, y: np.ndarray, spec: BiasSpec, epsilon: float, tol: float = 0.0
) -> CertResult:
    """Band check against a precomputed influence vector.

    Robust iff every reachable prediction stays within the closed band
    [z.y - epsilon, z.y + epsilon]; equality at the boundary counts as
    robust.  `tol` widens the band for floating-point-sensitive pipelines.
    """
    if epsilon < 0:
        raise ValueError(f"robustness radius must be >= 0, got {epsilon}")
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    base = float(z @ y)
    rng = prediction_range(z, y, spec)
    up_excess = rng.interval.hi - (base + epsilon)
    dn_excess = (base - epsilon) - rng.interval.lo
    robust = up_excess <= tol and dn_excess <= tol
    counterexample = None
    if not robust:
        counterexample = rng.upper_witness if up_excess >= dn_excess else rng.lower_witness
    return CertResult(robust, rng, float(epsilon), base, counterexample)


def certify_regression(
    x: np.ndarray,
    dataset: Dataset,
    spec: BiasSpec,
    epsilon: float,
    lam: float = 0.0,
    tol: float = 0.0,
) -> CertResult:
    """Exact robustness verdict for a regression prediction band of radius epsilon."""
    _, influence = fit(dataset, lam)
    z = influence_vector(x, influence)
    return certify_from_influence(z, dataset.y, spec, epsilon, tol)


def classify_from_influence(z: np.ndarray, y: np.ndarray, spec: BiasSpec) -> CertResult:
    """Decision-flip check against a precomputed influence vector.

    Robust iff the whole reachable prediction interval classifies like the
    base prediction.  A base prediction sitting exactly on the threshold is
    robust only when the interval is degenerate.
    """
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    base = float(z @ y)
    rng = prediction_range(z, y, spec)
    lo, hi = rng.interval.lo, rng.interval.hi
    counterexample = None
    if base == DECISION_THRESHOLD:
        robust = hi == lo
        if not robust:
            counterexample = rng.lower_witness if lo < base else rng.upper_witness
    elif base > DECISION_THRESHOLD:
        robust = lo >= DECISION_THRESHOLD
        if not robust:
            counterexample = rng.lower_witness
    else:
        robust = hi < DECISION_THRESHOLD
        if not robust:
            counterexample = rng.upper_witness
    return CertResult(robust, rng, abs(base - DECISION_THRESHOLD), base, counterexample)


def certify_classification(
    x: np.ndarray, dataset: Dataset, spec: BiasSpec, lam: float = 0.0
) -> CertResult:
    """Exact verdict for binary classification: can any reachable labeling flip the class?"""
    if not np.isin(dataset.y, (0.0, 1.0)).all():
        raise NonBinaryLabel("classification certification requires labels in {0, 1}")
    _, influence = fit(dataset, lam)
    z = influence_vector(x, influence)
    return classify_from_influence(z, dataset.y, spec)


def min_flips_from_influence(
    z: np.ndarray,
    y: np.ndarray,
    delta: PerturbationVector,
    epsilon: float,
    tol: float = 0.0,
    side: str = "both",
) -> MinFlipsResult | None:
    """Smallest number of label changes that pushes the prediction out of the band.

    Greedy by impact: the k-th step perturbs the unused label with the
    largest remaining impact, so after k steps the prediction sits at the
    extreme reachable with budget k.  Returns None when every label with a
    nonzero impact is exhausted and the band still holds.  `side` restricts
    the search to upward ("upper") or downward ("lower") excursions.
    """
    if epsilon < 0:
        raise ValueError(f"robustness radius must be >= 0, got {epsilon}")
    if side not in ("both", "upper", "lower"):
        raise ValueError(f"side must be 'both', 'upper' or 'lower', got {side!r}")
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    if z.shape != y.shape or y.shape != delta.lo.shape:
        raise DimensionMismatch(
            f"shapes z{z.shape}, y{y.shape} inconsistent with {delta.lo.shape} intervals"
        )
    impacts = potential_impacts(z, delta)
    limit = epsilon + tol

    def first_breaking(imp: np.ndarray, maximize: bool) -> tuple[int, np.ndarray] | None:
        order = np.argsort(-imp if maximize else imp, kind="stable")
        vals = imp[order]
        vals = vals[vals > 0] if maximize else -vals[vals < 0]
        if vals.size == 0:
            return None
        cum = np.cumsum(vals)
        breaking = np.nonzero(cum > limit)[0]
        if breaking.size == 0:
            return None
        k = int(breaking[0]) + 1
        return k, order[:k]

    found: list[tuple[int, str, np.ndarray]] = []
    if side in ("both", "upper"):
        hit = first_breaking(impacts.positive, maximize=True)
        if hit is not None:
            found.append((hit[0], "upper", hit[1]))
    if side in ("both", "lower"):
        hit = first_breaking(impacts.negative, maximize=False)
        if hit is not None:
            found.append((hit[0], "lower", hit[1]))
    if not found:
        return None
    # Prefer the smaller budget; on ties the upward excursion (listed first).
    flips, which, idx = min(found, key=lambda item: item[0])
    witness = _perturbed(y, z, delta, idx, upward=which == "upper")
    return MinFlipsResult(flips, witness, float(z @ witness), which)


def min_flips(
    x: np.ndarray,
    dataset: Dataset,
    delta: PerturbationVector,
    epsilon: float,
    lam: float = 0.0,
    tol: float = 0.0,
    side: str = "both",
) -> MinFlipsResult | None:
    """Smallest budget at which the test point stops being robust, if any."""
    _, influence = fit(dataset, lam)
    z = influence_vector(x, influence)
    return min_flips_from_influence(z, dataset.y, delta, epsilon, tol, side)

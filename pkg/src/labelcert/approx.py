"""Over-approximate certification via a coefficient hull.

Instead of re-solving the worst case per test point, bound each fitted
coefficient over the whole reachable label set once.  The resulting interval
box (the model hull) is the tightest axis-aligned enclosure of the reachable
coefficient set; certifying a test point then costs one interval dot
product.  The check is one-sided: a certificate implies exact robustness,
but failure to certify proves nothing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bias import BiasSpec, Interval
from .errors import DimensionMismatch
from .exact import prediction_range
from .linalg import InfluenceMatrix, ModelCoefficients, predict


@dataclass(frozen=True)
class ModelHull:
    """Per-coefficient reachable intervals plus the unperturbed fit they enclose."""

    lower: np.ndarray
    upper: np.ndarray
    base: ModelCoefficients
    budget: int
    fingerprint: str

    def __post_init__(self) -> None:
        lower = np.array(self.lower, dtype=float)
        upper = np.array(self.upper, dtype=float)
        if lower.shape != upper.shape or lower.shape != self.base.values.shape:
            raise DimensionMismatch(
                f"hull bounds {lower.shape}/{upper.shape} inconsistent with "
                f"{self.base.values.shape} coefficients"
            )
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def m(self) -> int:
        return self.lower.size

    def interval(self, i: int) -> Interval:
        return Interval(self.lower[i], self.upper[i])

    def intervals(self) -> tuple[Interval, ...]:
        return tuple(Interval(l, h) for l, h in zip(self.lower, self.upper))


@dataclass(frozen=True)
class ApproxVerdict:
    """Certified, or unknown (the hull is an over-approximation, so never 'not robust')."""

    certified: bool
    predicted_interval: Interval

    @property
    def outcome(self) -> str:
        return "certified" if self.certified else "unknown"


def model_hull(influence: InfluenceMatrix, y: np.ndarray, spec: BiasSpec) -> ModelHull:
    """Tightest interval box containing every coefficient vector reachable under the spec.

    Each coordinate bound reuses the exact per-functional optimizer on the
    corresponding row of the influence matrix, so both ends of every
    coordinate interval are attained by concrete reachable label vectors.
    """
    y = np.asarray(y, dtype=float)
    if influence.n != y.size or y.size != spec.n:
        raise DimensionMismatch(
            f"influence matrix is {influence.m}x{influence.n}, labels {y.size}, "
            f"spec length {spec.n}"
        )
    lower = np.empty(influence.m)
    upper = np.empty(influence.m)
    for i in range(influence.m):
        rng = prediction_range(influence.values[i], y, spec)
        lower[i], upper[i] = rng.interval.lo, rng.interval.hi
    base = ModelCoefficients(influence.values @ y, influence.lam)
    return ModelHull(lower, upper, base, spec.budget, spec.fingerprint())


def interval_predict(hull: ModelHull, x: np.ndarray) -> Interval:
    """Interval dot product of the hull with a concrete test point.

    Each coordinate contributes [lo*x, hi*x] with the bounds swapped when the
    coordinate of x is negative; contributions add by endpoint sums.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (hull.m,):
        raise DimensionMismatch(f"test point has shape {x.shape}, expected ({hull.m},)")
    nonneg = x >= 0
    lo = float(np.where(nonneg, hull.lower * x, hull.upper * x).sum())
    hi = float(np.where(nonneg, hull.upper * x, hull.lower * x).sum())
    return Interval(lo, hi)


def certify_approx(
    hull: ModelHull,
    coefficients: ModelCoefficients,
    x: np.ndarray,
    epsilon: float,
    tol: float = 0.0,
) -> ApproxVerdict:
    """Certified iff the hull's prediction interval fits inside the epsilon band.

    The hull and coefficients must come from the same dataset and ridge
    strength.
    """
    if epsilon < 0:
        raise ValueError(f"robustness radius must be >= 0, got {epsilon}")
    if hull.base.lam != coefficients.lam:
        raise ValueError(
            f"hull built at lam={hull.base.lam} but coefficients at lam={coefficients.lam}"
        )
    predicted = interval_predict(hull, x)
    base = predict(coefficients, x)
    certified = (
        predicted.lo >= base - epsilon - tol and predicted.hi <= base + epsilon + tol
    )
    return ApproxVerdict(certified, predicted)


def certify_approx_classification(
    hull: ModelHull, coefficients: ModelCoefficients, x: np.ndarray
) -> ApproxVerdict:
    """Certified iff the hull's prediction interval cannot cross the 0.5 threshold."""
    if hull.base.lam != coefficients.lam:
        raise ValueError(
            f"hull built at lam={hull.base.lam} but coefficients at lam={coefficients.lam}"
        )
    predicted = interval_predict(hull, x)
    base = predict(coefficients, x)
    if base == 0.5:
        certified = predicted.hi == predicted.lo
    elif base > 0.5:
        certified = predicted.lo >= 0.5
    else:
        certified = predicted.hi < 0.5
    return ApproxVerdict(certified, predicted)


_HULL_FORMAT = "labelcert-hull/1"


def hull_to_dict(hull: ModelHull) -> dict:
    """JSON-ready form of a hull for offline/online split deployments."""
    return {
        "format": _HULL_FORMAT,
        "lam": hull.base.lam,
        "budget": hull.budget,
        "fingerprint": hull.fingerprint,
        "base_coefficients": hull.base.values.tolist(),
        "intervals": [[float(l), float(h)] for l, h in zip(hull.lower, hull.upper)],
    }


def hull_from_dict(payload: dict) -> ModelHull:
    if payload.get("format") != _HULL_FORMAT:
        raise ValueError(f"unrecognized hull payload format: {payload.get('format')!r}")
    intervals = payload["intervals"]
    return ModelHull(
        lower=np.array([iv[0] for iv in intervals]),
        upper=np.array([iv[1] for iv in intervals]),
        base=ModelCoefficients(np.array(payload["base_coefficients"]), payload["lam"]),
        budget=int(payload["budget"]),
        fingerprint=str(payload["fingerprint"]),
    )


def save_hull(hull: ModelHull, path: str | Path) -> None:
    Path(path).write_text(json.dumps(hull_to_dict(hull), indent=2, sort_keys=True))


def load_hull(path: str | Path) -> ModelHull:
    return hull_from_dict(json.loads(Path(path).read_text()))

"""Exhaustive ground truth for small certification instances.

These routines enumerate the reachable label set directly and exist solely to
back-stop the fast certifiers in tests.  Hard size guards keep them honest:
they refuse instances large enough to hide quadratic slowdowns.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .bias import BiasSpec, Interval
from .errors import DimensionMismatch, InstanceTooLarge, NonBinaryLabel
from .linalg import Dataset, predict, solve_ridge

MAX_LABELS = 15
MAX_BUDGET = 3
MAX_COLUMNS = 6
MAX_FLIP_LABELS = 12
MAX_FLIP_BUDGET = 2

# Interior fractions sampled per perturbed coordinate, beyond the endpoints.
# The objective is affine per coordinate, so these can never win; they are a
# belt-and-braces check on that argument.
_INTERIOR = (0.25, 0.5, 0.75)


def _guard(n: int, budget: int) -> None:
    if n > MAX_LABELS or budget > MAX_BUDGET:
        raise InstanceTooLarge(
            f"brute force limited to n <= {MAX_LABELS}, budget <= {MAX_BUDGET}; "
            f"got n={n}, budget={budget}"
        )


def brute_force_range(
    z: np.ndarray, y: np.ndarray, spec: BiasSpec, interior_samples: bool = True
) -> Interval:
    """Min/max of z . y_tilde over every reachable y_tilde, by enumeration.

    Every subset of at most `budget` indices is tried with each perturbed
    coordinate at its interval endpoints (plus interior grid samples unless
    disabled).
    """
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.size
    if z.shape != y.shape or n != spec.n:
        raise DimensionMismatch(
            f"shapes z{z.shape}, y{y.shape} inconsistent with spec length {spec.n}"
        )
    _guard(n, spec.budget)

    base = float(z @ y)
    lo = hi = base
    candidates = []
    for i in range(n):
        a, b = spec.delta.lo[i], spec.delta.hi[i]
        deltas = [a, b]
        if interior_samples:
            deltas += [a + t * (b - a) for t in _INTERIOR]
        candidates.append(z[i] * np.asarray(deltas))

    for size in range(1, spec.budget + 1):
        for subset in combinations(range(n), size):
            total = np.zeros(1)
            for i in subset:
                total = (total[:, None] + candidates[i][None, :]).ravel()
            lo = min(lo, base + float(total.min()))
            hi = max(hi, base + float(total.max()))
    return Interval(lo, hi)


def brute_force_hull(
    C: np.ndarray, y: np.ndarray, spec: BiasSpec, interior_samples: bool = True
) -> tuple[Interval, ...]:
    """Per-coefficient reachable range: brute_force_range applied to each row of C."""
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[1] != spec.n:
        raise DimensionMismatch(f"matrix shape {C.shape} inconsistent with spec length {spec.n}")
    if C.shape[0] > MAX_COLUMNS:
        raise InstanceTooLarge(
            f"brute force hull limited to {MAX_COLUMNS} coefficients, got {C.shape[0]}"
        )
    return tuple(brute_force_range(row, y, spec, interior_samples) for row in C)


def brute_force_classification(
    x: np.ndarray, dataset: Dataset, spec: BiasSpec, lam: float = 0.0
) -> bool:
    """True iff no reachable set of literal label flips changes the thresholded prediction.

    Every subset of at most `budget` flippable labels is flipped and the model
    refit from scratch; a prediction of exactly 0.5 classifies as 1.
    """
    y = dataset.y
    if not np.isin(y, (0.0, 1.0)).all():
        raise NonBinaryLabel("brute-force flip enumeration requires labels in {0, 1}")
    if dataset.n != spec.n:
        raise DimensionMismatch(
            f"dataset has {dataset.n} rows but spec covers {spec.n} labels"
        )
    if dataset.n > MAX_FLIP_LABELS or spec.budget > MAX_FLIP_BUDGET:
        raise InstanceTooLarge(
            f"flip enumeration limited to n <= {MAX_FLIP_LABELS}, "
            f"budget <= {MAX_FLIP_BUDGET}; got n={dataset.n}, budget={spec.budget}"
        )

    base_class = predict(solve_ridge(dataset, lam), x) >= 0.5
    flip = 1.0 - 2.0 * y  # -1 where y=1, +1 where y=0
    allowed = [i for i in range(dataset.n) if spec.delta.lo[i] <= flip[i] <= spec.delta.hi[i]]

    for size in range(1, spec.budget + 1):
        for subset in combinations(allowed, size):
            flipped = y.copy()
            flipped[list(subset)] = 1.0 - flipped[list(subset)]
            pred = predict(solve_ridge(dataset.with_labels(flipped), lam), x)
            if (pred >= 0.5) != base_class:
                return False
    return True

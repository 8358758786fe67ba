"""Tests for the hull-based approximate certifier."""

import numpy as np
import pytest

from labelcert import (
    BiasSpec,
    Dataset,
    InfluenceMatrix,
    Interval,
    ModelCoefficients,
    brute_force_hull,
    certify_approx,
    certify_approx_classification,
    certify_from_influence,
    fit,
    hull_from_dict,
    hull_to_dict,
    influence_vector,
    interval_predict,
    load_hull,
    model_hull,
    prediction_range,
    save_hull,
    uniform_delta,
)
from labelcert.errors import DimensionMismatch
from conftest import random_dataset, random_delta, sample_bias_members

# Three-coefficient worked example: the reachable coefficient set is
# non-convex but its tight interval box is ([-2,4],[0,6],[-2,4]).
C3 = np.array([[1.0, 2.0, 1.0], [-1.0, 0.0, 2.0], [2.0, 1.0, 0.0]])
Y3 = np.array([1.0, -1.0, 2.0])
SPEC3 = BiasSpec(uniform_delta(3, 1.0), 2)


def _hull3():
    return model_hull(InfluenceMatrix(C3, 0.0), Y3, SPEC3)


class TestModelHull:
    def test_worked_example_box(self):
        hull = _hull3()
        np.testing.assert_array_equal(hull.lower, [-2.0, 0.0, -2.0])
        np.testing.assert_array_equal(hull.upper, [4.0, 6.0, 4.0])

    def test_known_reachable_points_inside(self):
        hull = _hull3()
        for point in ([3.0, 6.0, 3.0], [4.0, 5.0, 2.0]):
            assert ((hull.lower <= point) & (point <= hull.upper)).all()

    def test_zero_budget_degenerates_to_fit(self):
        spec = BiasSpec(uniform_delta(3, 1.0), 0)
        hull = model_hull(InfluenceMatrix(C3, 0.0), Y3, spec)
        np.testing.assert_array_equal(hull.lower, hull.upper)
        np.testing.assert_array_equal(hull.lower, C3 @ Y3)

    def test_matches_brute_force(self, rng):
        for _ in range(25):
            C = rng.normal(size=(4, 8))
            y = rng.normal(size=8)
            spec = BiasSpec(random_delta(rng, 8), int(rng.integers(0, 4)))
            hull = model_hull(InfluenceMatrix(C, 0.0), y, spec)
            slow = brute_force_hull(C, y, spec)
            for i, iv in enumerate(slow):
                np.testing.assert_allclose(hull.lower[i], iv.lo, rtol=1e-9, atol=1e-12)
                np.testing.assert_allclose(hull.upper[i], iv.hi, rtol=1e-9, atol=1e-12)

    def test_base_always_inside(self, rng):
        for _ in range(20):
            C = rng.normal(size=(3, 6))
            y = rng.normal(size=6)
            spec = BiasSpec(random_delta(rng, 6), 2)
            hull = model_hull(InfluenceMatrix(C, 0.0), y, spec)
            assert ((hull.lower <= hull.base.values) & (hull.base.values <= hull.upper)).all()

    def test_sampled_members_inside(self, rng):
        C = rng.normal(size=(3, 10))
        y = rng.normal(size=10)
        spec = BiasSpec(random_delta(rng, 10), 3)
        hull = model_hull(InfluenceMatrix(C, 0.0), y, spec)
        members = sample_bias_members(rng, y, spec, 500)
        coords = members @ C.T
        slack = 1e-9 * (1.0 + np.abs(coords))
        assert (coords >= hull.lower - slack).all()
        assert (coords <= hull.upper + slack).all()

    def test_bounds_attained_by_witnesses(self, rng):
        C = rng.normal(size=(4, 9))
        y = rng.normal(size=9)
        spec = BiasSpec(random_delta(rng, 9), 2)
        hull = model_hull(InfluenceMatrix(C, 0.0), y, spec)
        for i in range(4):
            result = prediction_range(C[i], y, spec)
            np.testing.assert_allclose(C[i] @ result.lower_witness, hull.lower[i], rtol=1e-9)
            np.testing.assert_allclose(C[i] @ result.upper_witness, hull.upper[i], rtol=1e-9)


class TestIntervalPredict:
    def test_zero_point(self):
        assert interval_predict(_hull3(), np.zeros(3)) == Interval(0.0, 0.0)

    def test_unit_vector_selects_coordinate(self):
        assert interval_predict(_hull3(), np.array([1.0, 0.0, 0.0])) == Interval(-2.0, 4.0)

    def test_mixed_signs(self):
        assert interval_predict(_hull3(), np.array([1.0, 1.0, -1.0])) == Interval(-6.0, 12.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            interval_predict(_hull3(), np.ones(4))

    def test_dominates_exact_range(self, rng):
        for _ in range(30):
            ds = random_dataset(rng, n=10, m=3)
            spec = BiasSpec(random_delta(rng, 10), 2)
            theta, influence = fit(ds, 0.3)
            hull = model_hull(influence, ds.y, spec)
            x = rng.normal(size=3)
            z = influence_vector(x, influence)
            exact = prediction_range(z, ds.y, spec).interval
            loose = interval_predict(hull, x)
            slack = 1e-12 * (1.0 + abs(exact.lo) + abs(exact.hi))
            assert loose.lo <= exact.lo + slack
            assert loose.hi >= exact.hi - slack


class TestCertifyApprox:
    def test_zero_budget_always_certified(self, rng):
        ds = random_dataset(rng, n=8, m=3)
        theta, influence = fit(ds, 0.5)
        hull = model_hull(influence, ds.y, BiasSpec(uniform_delta(8, 1.0), 0))
        for eps in (0.0, 0.1, 5.0):
            assert certify_approx(hull, theta, rng.normal(size=3), eps).certified

    def test_certified_implies_exact_robust(self, rng):
        certified_seen = 0
        for _ in range(120):
            ds = random_dataset(rng, n=9, m=3)
            spec = BiasSpec(random_delta(rng, 9), 2)
            theta, influence = fit(ds, 0.4)
            hull = model_hull(influence, ds.y, spec)
            x = rng.normal(size=3)
            eps = rng.uniform(0.0, 3.0)
            if certify_approx(hull, theta, x, eps).certified:
                certified_seen += 1
                z = influence_vector(x, influence)
                assert certify_from_influence(z, ds.y, spec, eps).robust
        assert certified_seen > 0

    def test_incompleteness_instance_exists(self):
        # duplicate feature columns: the exact range at x = (1, -1) collapses
        # to a point while every hull coordinate keeps positive width
        X = np.array([[1.0, 1.0], [2.0, 2.0], [-1.0, -1.0], [3.0, 3.0]])
        ds = Dataset(X, np.array([1.0, 2.0, -1.0, 3.0]))
        spec = BiasSpec(uniform_delta(4, 1.0), 2)
        theta, influence = fit(ds, 1.0)
        hull = model_hull(influence, ds.y, spec)
        x = np.array([1.0, -1.0])
        z = influence_vector(x, influence)
        exact = certify_from_influence(z, ds.y, spec, epsilon=0.01)
        loose = certify_approx(hull, theta, x, epsilon=0.01)
        assert exact.robust
        assert not loose.certified

    def test_lambda_mismatch_rejected(self, rng):
        ds = random_dataset(rng, n=6, m=2)
        _, influence = fit(ds, 0.5)
        hull = model_hull(influence, ds.y, BiasSpec(uniform_delta(6, 1.0), 1))
        other = ModelCoefficients(np.zeros(2), 0.25)
        with pytest.raises(ValueError):
            certify_approx(hull, other, np.ones(2), 1.0)


class TestCertifyApproxClassification:
    def test_threshold_sides(self):
        hull = _hull3()
        theta = hull.base
        # x chosen so the base prediction is far above 0.5 but the hull crosses it
        x = np.array([1.0, 0.0, 0.0])
        verdict = certify_approx_classification(hull, theta, x)
        assert not verdict.certified  # hull coordinate [-2, 4] spans 0.5

    def test_certified_when_interval_clears_threshold(self, rng):
        ds = random_dataset(rng, n=8, m=2, binary=True)
        theta, influence = fit(ds, 0.5)
        hull = model_hull(influence, ds.y, BiasSpec(uniform_delta(8, 0.0), 0))
        x = rng.normal(size=2)
        verdict = certify_approx_classification(hull, theta, x)
        assert verdict.certified  # degenerate hull: nothing can move


class TestHullSerialization:
    def test_dict_round_trip(self):
        hull = _hull3()
        clone = hull_from_dict(hull_to_dict(hull))
        np.testing.assert_array_equal(clone.lower, hull.lower)
        np.testing.assert_array_equal(clone.upper, hull.upper)
        np.testing.assert_array_equal(clone.base.values, hull.base.values)
        assert clone.fingerprint == hull.fingerprint
        assert clone.budget == hull.budget

    def test_file_round_trip(self, tmp_path):
        hull = _hull3()
        path = tmp_path / "hull.json"
        save_hull(hull, path)
        clone = load_hull(path)
        np.testing.assert_array_equal(clone.lower, hull.lower)
        assert clone.fingerprint == hull.fingerprint

    def test_rejects_unknown_format(self):
        with pytest.raises(ValueError):
            hull_from_dict({"format": "something-else"})

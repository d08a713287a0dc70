"""Indicator, forecast-metric and loss tests, with a Monte-Carlo HV oracle."""

import math

import numpy as np
import pytest

from phmoea.metrics import (LOSS_KINDS, forecast_metrics, hv, igd, loss,
                            merged_reference_front, nondominated_mask)


def monte_carlo_hv(points, reference, n_samples, seed):
    """Share of uniform box samples dominated by at least one point."""
    rng = np.random.default_rng(seed)
    pts = np.asarray(points)
    r = np.asarray(reference, dtype=float)
    lo = pts.min(axis=0)
    samples = lo + rng.random((n_samples, 2)) * (r - lo)
    covered = np.zeros(n_samples, dtype=bool)
    for p in pts:
        covered |= (samples >= p).all(axis=1)
    box = float(np.prod(r - lo))
    frac = covered.mean()
    estimate = frac * box
    stderr = box * math.sqrt(frac * (1 - frac) / n_samples)
    return estimate, stderr


# ---------------------------------------------------------------------------
# IGD
# ---------------------------------------------------------------------------

class TestIgd:
    def test_identical_sets(self):
        pts = [(0.1, 0.9), (0.5, 0.5), (0.9, 0.1)]
        assert igd(pts, pts) == 0.0

    def test_single_point(self):
        assert igd([(0.0, 0.0)], [(0.0, 1.0), (1.0, 0.0)]) == 1.0

    def test_duplicates_do_not_matter(self):
        ref = [(0.0, 1.0), (1.0, 0.0)]
        a = [(0.2, 0.3)]
        assert igd(a * 4, ref) == igd(a, ref)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            igd(np.empty((0, 2)), [(0.0, 0.0)])


# ---------------------------------------------------------------------------
# Hypervolume
# ---------------------------------------------------------------------------

class TestHv:
    def test_unit_square(self):
        assert hv([(0.0, 0.0)], (1.0, 1.0)) == 1.0

    def test_two_point_sweep(self):
        assert hv([(0.0, 0.5), (0.5, 0.0)], (1.0, 1.0)) == pytest.approx(0.75)

    def test_quarter_circle(self):
        u = np.linspace(0.0, 1.0, 2000)
        front = np.column_stack([np.cos(np.pi * u / 2), np.sin(np.pi * u / 2)])
        assert hv(front, (1.1, 1.1)) == pytest.approx(1.21 - np.pi / 4, abs=1e-3)

    def test_point_outside_reference_contributes_nothing(self):
        assert hv([(2.0, 2.0)], (1.0, 1.0)) == 0.0
        assert hv([(0.0, 0.0), (2.0, 0.1)], (1.0, 1.0)) == 1.0

    def test_monotone_under_additions(self):
        rng = np.random.default_rng(3)
        pts = list(rng.random((6, 2)))
        base = hv(pts, (1.5, 1.5))
        for extra in rng.random((10, 2)):
            assert hv(pts + [extra], (1.5, 1.5)) >= base - 1e-12

    def test_dominated_addition_is_neutral(self):
        pts = [(0.2, 0.2)]
        assert hv(pts + [(0.5, 0.5)], (1.0, 1.0)) == hv(pts, (1.0, 1.0))

    def test_agrees_with_monte_carlo(self):
        rng = np.random.default_rng(12)
        for trial in range(10):
            n = int(rng.integers(2, 12))
            raw = rng.random((n, 2))
            ref = (1.2, 1.2)
            exact = hv(raw, ref)
            estimate, stderr = monte_carlo_hv(raw, ref, 200_000, seed=trial)
            assert abs(exact - estimate) <= 3 * stderr + 1e-9


# ---------------------------------------------------------------------------
# Merged reference fronts
# ---------------------------------------------------------------------------

class TestMergedFront:
    def test_single_nd_set_is_identity(self):
        pts = np.array([(0.0, 1.0), (0.5, 0.5), (1.0, 0.0)])
        merged = merged_reference_front([pts])
        assert sorted(map(tuple, merged)) == sorted(map(tuple, pts))

    def test_dominated_set_removed(self):
        merged = merged_reference_front([[(1.0, 1.0)], [(0.0, 0.0)]])
        assert merged.tolist() == [[0.0, 0.0]]

    def test_result_is_mutually_nondominated(self):
        rng = np.random.default_rng(1)
        sets = [rng.random((20, 2)) for _ in range(4)]
        merged = merged_reference_front(sets)
        assert nondominated_mask(merged).all()

    def test_duplicates_collapse(self):
        merged = merged_reference_front([[(0.3, 0.7)], [(0.3, 0.7)], [(0.7, 0.3)]])
        assert len(merged) == 2


# ---------------------------------------------------------------------------
# Forecast metrics
# ---------------------------------------------------------------------------

class TestForecastMetrics:
    def test_perfect_prediction(self):
        y = np.arange(12.0).reshape(4, 3)
        m = forecast_metrics(y, y, np.ones(3))
        assert np.allclose(m["mse"], 0) and np.allclose(m["mae"], 0)
        assert m["nmse"] == 0 and m["nmae"] == 0 and m["mape_mean"] == 0

    def test_hand_computed_single_target(self):
        m = forecast_metrics([1.0, 3.0], [2.0, 2.0], [1.0])
        assert m["mse"][0] == pytest.approx(1.0)
        assert m["mae"][0] == pytest.approx(1.0)

    def test_unit_std_gives_nmse_equal_mse(self):
        y = np.array([2.0, 4.0, 9.0])
        p = np.array([1.0, 5.0, 9.5])
        m = forecast_metrics(y, p, [1.0])
        assert m["nmse"] == pytest.approx(float(m["mse"][0]), rel=1e-6)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            forecast_metrics(np.zeros((3, 2)), np.zeros((3, 3)), np.ones(2))

    def test_needs_std_per_target(self):
        with pytest.raises(ValueError):
            forecast_metrics(np.zeros((3, 2)), np.zeros((3, 2)), np.ones(3))


# ---------------------------------------------------------------------------
# Losses
# ---------------------------------------------------------------------------

class TestLoss:
    def test_logcosh_zero_residual(self):
        assert loss("LogCosh", [1.0, 2.0], [1.0, 2.0]) == pytest.approx(0.0, abs=1e-12)

    def test_quantile_half_is_half_mae(self):
        y = np.array([1.0, -2.0, 3.0])
        p = np.array([0.0, 1.0, 5.0])
        assert loss("Quantile", y, p) == pytest.approx(0.5 * loss("MAE", y, p))

    def test_smape_zero_at_equal(self):
        assert loss("SMAPE", [1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_combined_is_equal_blend(self):
        y = np.array([1.0, 2.0, -1.0])
        p = np.array([0.5, 2.5, 0.0])
        both = loss("Combined", y, p, pair=("MSE", "MAE"))
        assert both == pytest.approx(0.5 * loss("MSE", y, p) + 0.5 * loss("MAE", y, p))

    def test_adaptive_uses_init_weights(self):
        y = np.array([1.0, 2.0])
        p = np.array([0.0, 0.0])
        v = loss("AdaptiveCombined", y, p, pair=("MAE", "LogCosh"), weights=(0.7, 0.3))
        expect = 0.7 * loss("MAE", y, p) + 0.3 * loss("LogCosh", y, p)
        assert v == pytest.approx(expect)

    def test_multi_quantile_inside_pair(self):
        y = np.array([1.0, -1.0])
        p = np.array([0.0, 0.0])
        v = loss("Combined", y, p, pair=("MAE", "multi_quantile"))
        assert v > 0

    def test_huber_and_smoothl1_quadratic_zone(self):
        y = np.array([0.5])
        p = np.array([0.0])
        assert loss("Huber", y, p) == pytest.approx(0.125)
        assert loss("SmoothL1", y, p) == pytest.approx(0.125)

    def test_huber_linear_zone(self):
        assert loss("Huber", [3.0], [0.0]) == pytest.approx(1.0 * (3.0 - 0.5))

    def test_logcosh_matches_direct_formula(self):
        r = np.array([0.1, -0.7, 2.0, -9.0])
        direct = np.log(np.cosh(r)).mean()
        assert loss("LogCosh", r, np.zeros_like(r)) == pytest.approx(direct, rel=1e-9)

    @pytest.mark.parametrize("kind", [k for k in LOSS_KINDS
                                      if k not in ("Combined", "AdaptiveCombined")])
    def test_nonnegative_and_zero_at_truth(self, kind):
        rng = np.random.default_rng(hash(kind) % 2**32)
        y = rng.normal(size=(20, 5)) + 2.0
        p = y + rng.normal(scale=0.5, size=y.shape)
        assert loss(kind, y, p) >= 0.0
        assert loss(kind, y, y) == pytest.approx(0.0, abs=1e-12)

    def test_combined_requires_pair(self):
        with pytest.raises(ValueError):
            loss("Combined", [1.0], [1.0])

    def test_adaptive_requires_weights(self):
        with pytest.raises(ValueError):
            loss("AdaptiveCombined", [1.0], [1.0], pair=("MSE", "MAE"))

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            loss("L0", [1.0], [1.0])

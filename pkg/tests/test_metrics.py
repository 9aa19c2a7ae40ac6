import math

import numpy as np
import pytest

from flowseries.errors import BenchmarkError, ForecastContractError, ParameterError
from flowseries.forecasters import (
    DECILE_LEVELS,
    ForecastResult,
    linear_regression_forecast,
    naive_forecast,
    validate_forecast,
)
from flowseries.metrics import aggregate_relative, mape, mase, smape, wql


class TestMape:
    def test_basic(self):
        assert mape([100.0, 200.0], [110.0, 180.0]) == pytest.approx(10.0)

    def test_perfect(self):
        assert mape([3.0, 4.0], [3.0, 4.0]) == 0.0

    def test_zero_target_excluded(self):
        assert mape([0.0, 100.0], [5.0, 110.0]) == pytest.approx(10.0)

    def test_all_zero_undefined(self):
        assert math.isnan(mape([0.0, 0.0], [1.0, 1.0]))

    def test_length_mismatch(self):
        with pytest.raises(ParameterError):
            mape([1.0], [1.0, 2.0])


class TestSmape:
    def test_perfect(self):
        assert smape([5.0], [5.0]) == 0.0

    def test_hundred_percent(self):
        assert smape([100.0], [300.0]) == pytest.approx(100.0)

    def test_both_zero_convention(self):
        assert smape([0.0], [0.0]) == 0.0

    def test_scale_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            y = rng.uniform(1, 100, 20)
            yhat = rng.uniform(1, 100, 20)
            a = rng.uniform(0.01, 1000)
            assert smape(a * y, a * yhat) == pytest.approx(smape(y, yhat), abs=1e-9)


class TestWql:
    def test_perfect_quantiles_zero(self):
        y = np.array([5.0, 6.0, 7.0])
        quantiles = {q: y.copy() for q in DECILE_LEVELS}
        assert wql(y, quantiles) == 0.0

    def test_hand_pinball_case(self):
        y = np.array([10.0])
        quantiles = {q: y.copy() for q in DECILE_LEVELS}
        quantiles[0.5] = np.array([12.0])
        # level 0.5 contributes 2*(0.5*0 + 0.5*2) = 2; mean over 9 levels,
        # then divided by mean |y| = 10
        assert wql(y, quantiles) == pytest.approx((2.0 / 9.0) / 10.0)

    def test_all_zero_target_undefined(self):
        quantiles = {q: np.zeros(3) for q in DECILE_LEVELS}
        assert math.isnan(wql(np.zeros(3), quantiles))

    def test_median_beats_high_quantile_as_constant_forecast(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            sample = rng.standard_normal(50) * 3 + 10
            med = {q: np.full(50, np.quantile(sample, 0.5)) for q in DECILE_LEVELS}
            high = {q: np.full(50, np.quantile(sample, 0.9)) for q in DECILE_LEVELS}
            assert wql(sample, med) < wql(sample, high)

    def test_pinball_minimizer_is_the_quantile(self):
        # among constant forecasts on a dense grid, the empirical
        # q-quantile minimizes the pinball loss at level q
        from flowseries.metrics import pinball_loss

        rng = np.random.default_rng(8)
        sample = rng.uniform(0, 10, 400)
        for level in (0.1, 0.5, 0.9):
            grid = np.linspace(0, 10, 201)
            losses = [float(np.mean(pinball_loss(sample, np.full_like(sample, g), level)))
                      for g in grid]
            best_g = grid[int(np.argmin(losses))]
            assert abs(best_g - np.quantile(sample, level)) <= 0.2


class TestMase:
    def test_perfect(self):
        ctx = np.arange(10.0)
        assert mase([11.0, 12.0], [11.0, 12.0], ctx) == 0.0

    def test_scale_invariance(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            ctx = rng.uniform(1, 100, 30)
            y = rng.uniform(1, 100, 5)
            yhat = rng.uniform(1, 100, 5)
            a = rng.uniform(0.01, 1000)
            assert mase(a * y, a * yhat, a * ctx) == pytest.approx(
                mase(y, yhat, ctx), abs=1e-9
            )

    def test_parity_with_naive_scale(self):
        # context alternates +-1 steps: naive in-sample MAE is exactly 1,
        # so mase equals the forecast MAE
        ctx = np.array([0.0, 1.0, 0.0, 1.0, 0.0, 1.0])
        y = np.array([2.0, 4.0])
        yhat = np.array([1.0, 5.0])
        assert mase(y, yhat, ctx) == pytest.approx(1.0)

    def test_constant_context_floored(self):
        value = mase([1.0], [2.0], np.full(10, 3.0))
        assert value == pytest.approx(1.0 / 1e-8)

    def test_short_context_error(self):
        with pytest.raises(ParameterError):
            mase([1.0], [1.0], [1.0])


class TestAggregateRelative:
    def test_identity(self):
        assert aggregate_relative([1.0, 2.0], [1.0, 2.0]) == 1.0

    def test_half(self):
        assert aggregate_relative([1.0, 2.0], [2.0, 4.0]) == 0.5

    def test_ratio_of_sums_not_mean_of_ratios(self):
        assert aggregate_relative([1.0, 3.0], [2.0, 2.0]) == 1.0
        # distinguishes ratio-of-sums (2.5) from mean-of-ratios (2.375)
        assert aggregate_relative([1.0, 9.0], [2.0, 2.0]) == 2.5

    def test_zero_baseline_rejected(self):
        with pytest.raises(BenchmarkError):
            aggregate_relative([1.0], [0.0])

    def test_unpaired_rejected(self):
        with pytest.raises(BenchmarkError):
            aggregate_relative([1.0, 2.0], [1.0])


class TestLinearRegressionForecast:
    def test_exact_line(self):
        context = 2.0 * np.arange(450.0) + 1.0
        result = linear_regression_forecast(context, 50)
        expected = 2.0 * np.arange(450.0, 500.0) + 1.0
        assert np.array_equal(result.point, expected)
        for q in DECILE_LEVELS:
            assert np.array_equal(result.quantiles[q], result.point)

    def test_constant_context(self):
        result = linear_regression_forecast(np.full(450, 7.0), 50)
        assert np.allclose(result.point, 7.0)

    def test_noisy_line_recovers_slope_and_sigma(self):
        slopes, sigmas = [], []
        for seed in range(100):
            rng = np.random.default_rng(seed)
            t = np.arange(450.0)
            context = 3.0 * t + 10.0 + rng.standard_normal(450)
            result = linear_regression_forecast(context, 50)
            slopes.append((result.point[1] - result.point[0]))
            half = result.quantiles[0.9] - result.point
            sigmas.append(half[0] / 1.2815515655446004)
        t = np.arange(450.0)
        se = 1.0 / math.sqrt(float(np.sum((t - t.mean()) ** 2)))
        assert all(abs(s - 3.0) < 3 * se for s in slopes)
        assert all(0.8 <= s <= 1.2 for s in sigmas)

    def test_quantile_monotonicity(self):
        rng = np.random.default_rng(2)
        result = linear_regression_forecast(rng.standard_normal(450), 50)
        validate_forecast(result, 50)


class TestNaiveForecast:
    def test_repeats_last(self):
        result = naive_forecast(np.array([1.0, 2.0, 7.0]), 5)
        assert result.point.tolist() == [7.0] * 5

    def test_constant_context_flat_quantiles(self):
        result = naive_forecast(np.full(20, 3.0), 4)
        for q in DECILE_LEVELS:
            assert np.array_equal(result.quantiles[q], result.point)

    def test_linreg_beats_naive_on_trend(self):
        t = np.arange(450.0)
        context = 2.0 * t + 1.0
        target = 2.0 * np.arange(450.0, 500.0) + 1.0
        naive = naive_forecast(context, 50)
        linreg = linear_regression_forecast(context, 50)
        assert mase(target, linreg.point, context) < mase(target, naive.point, context)


class TestValidateForecast:
    def _ok(self, horizon=5):
        point = np.zeros(horizon)
        return ForecastResult(point=point, quantiles={q: point + q for q in DECILE_LEVELS})

    def test_valid_passes(self):
        validate_forecast(self._ok(), 5)

    def test_wrong_point_length(self):
        result = self._ok()
        result.point = np.zeros(4)
        with pytest.raises(ForecastContractError, match="length"):
            validate_forecast(result, 5)

    def test_missing_level(self):
        result = self._ok()
        del result.quantiles[0.3]
        with pytest.raises(ForecastContractError, match="levels"):
            validate_forecast(result, 5)

    def test_crossing_names_level_and_step(self):
        result = self._ok()
        result.quantiles[0.9] = result.quantiles[0.1] - 1.0
        with pytest.raises(ForecastContractError, match=r"level 0.9.*step 0"):
            validate_forecast(result, 5)

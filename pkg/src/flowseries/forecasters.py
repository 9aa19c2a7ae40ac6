"""Built-in baseline forecasters and the forecast-shape contract.

Both baselines are deterministic point forecasters; their deciles are
Gaussian-spaced around the point using the in-sample residual standard
deviation, so probabilistic metrics can score them.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .errors import ForecastContractError, ParameterError

DECILE_LEVELS: tuple[float, ...] = tuple(round(0.1 * i, 1) for i in range(1, 10))
_Z = {level: NormalDist().inv_cdf(level) for level in DECILE_LEVELS}


@dataclass
class ForecastResult:
    """Point forecast plus decile forecasts for one window."""

    point: np.ndarray
    quantiles: dict[float, np.ndarray]


def validate_forecast(
    result: ForecastResult, horizon: int, levels: tuple[float, ...] = DECILE_LEVELS
) -> None:
    """Enforce the shape contract: lengths, all levels, monotone deciles.

    Raises ForecastContractError naming the offending level and step.
    """
    point = np.asarray(result.point, dtype=np.float64)
    if point.shape != (horizon,):
        raise ForecastContractError(
            f"point forecast has length {point.size}, expected {horizon}"
        )
    present = sorted(result.quantiles)
    if len(present) != len(levels) or any(
        abs(a - b) > 1e-9 for a, b in zip(present, levels)
    ):
        raise ForecastContractError(
            f"quantile levels {present} do not match required {list(levels)}"
        )
    prev_level = None
    prev = None
    for level in levels:
        q = np.asarray(result.quantiles[level], dtype=np.float64)
        if q.shape != (horizon,):
            raise ForecastContractError(
                f"quantile {level} has length {q.size}, expected {horizon}"
            )
        if prev is not None:
            bad = np.nonzero(q < prev - 1e-12)[0]
            if bad.size:
                step = int(bad[0])
                raise ForecastContractError(
                    f"quantile crossing: level {level} < level {prev_level} at step {step}"
                )
        prev_level = level
        prev = q


def _gaussian_quantiles(point: np.ndarray, sigma: float) -> dict[float, np.ndarray]:
    return {level: point + _Z[level] * sigma for level in DECILE_LEVELS}


def linear_regression_forecast(context, horizon: int = 50) -> ForecastResult:
    """Fit value against time index by least squares and extrapolate.

    Deciles are the point forecast shifted by standard-normal quantiles of
    the in-sample residual standard deviation; a perfectly linear context
    collapses every decile onto the point.
    """
    y = np.asarray(context, dtype=np.float64)
    if y.size < 2:
        raise ParameterError("linear regression needs a context of at least 2 values")
    t = np.arange(y.size, dtype=np.float64)
    t_mean = t.mean()
    y_mean = y.mean()
    t_var = float(np.sum((t - t_mean) ** 2))
    slope = float(np.sum((t - t_mean) * (y - y_mean)) / t_var)
    intercept = y_mean - slope * t_mean
    residuals = y - (intercept + slope * t)
    sigma = float(np.sqrt(np.mean(residuals**2)))
    future = np.arange(y.size, y.size + horizon, dtype=np.float64)
    point = intercept + slope * future
    return ForecastResult(point=point, quantiles=_gaussian_quantiles(point, sigma))


def naive_forecast(context, horizon: int = 50) -> ForecastResult:
    """Repeat the last context value; spread deciles by the one-step
    in-sample error standard deviation."""
    y = np.asarray(context, dtype=np.float64)
    if y.size < 1:
        raise ParameterError("naive forecast needs a nonempty context")
    point = np.full(horizon, float(y[-1]))
    sigma = float(np.std(np.diff(y))) if y.size >= 2 else 0.0
    return ForecastResult(point=point, quantiles=_gaussian_quantiles(point, sigma))


BUILTIN_FORECASTERS = {
    "builtin:linreg": linear_regression_forecast,
    "builtin:naive": naive_forecast,
}

"""Forecast accuracy metrics and the aggregate-relative normalization.

Undefined per-window values (all-zero targets and the like) come back as
NaN so the harness can exclude and count them instead of silently
polluting aggregates.
"""

from __future__ import annotations

import numpy as np

from .errors import BenchmarkError, ParameterError

ZERO_EPS = 1e-8


def mape(target, point) -> float:
    """Mean absolute percentage error, in percent.

    Steps whose actual value is (numerically) zero are excluded; NaN when
    every step is excluded.
    """
    y, yhat = _pair(target, point)
    mask = np.abs(y) > ZERO_EPS
    if not mask.any():
        return float("nan")
    return float(100.0 * np.mean(np.abs(y[mask] - yhat[mask]) / np.abs(y[mask])))


def smape(target, point) -> float:
    """Symmetric MAPE, in percent; a step where both sides are zero scores 0."""
    y, yhat = _pair(target, point)
    denom = np.abs(y) + np.abs(yhat)
    terms = np.where(denom > 0.0, 2.0 * np.abs(y - yhat) / np.where(denom > 0.0, denom, 1.0), 0.0)
    return float(100.0 * np.mean(terms))


def pinball_loss(target: np.ndarray, quantile_forecast: np.ndarray, level: float) -> np.ndarray:
    """Per-step pinball loss, doubled (so the median level scores |error|)."""
    under = np.maximum(target - quantile_forecast, 0.0)
    over = np.maximum(quantile_forecast - target, 0.0)
    return 2.0 * (level * under + (1.0 - level) * over)


def wql(target, quantiles: dict[float, np.ndarray]) -> float:
    """Quantile loss averaged over steps and levels, scaled by mean |target|.

    The per-window scaling makes values comparable across series; NaN when
    the target is (numerically) all zero.
    """
    y = np.asarray(target, dtype=np.float64)
    denom = float(np.mean(np.abs(y)))
    if denom <= ZERO_EPS:
        return float("nan")
    losses = [
        np.mean(pinball_loss(y, np.asarray(q, dtype=np.float64), float(level)))
        for level, q in sorted(quantiles.items())
    ]
    return float(np.mean(losses) / denom)


def mase(target, point, context) -> float:
    """Forecast MAE scaled by the in-sample one-step naive MAE of the context."""
    y, yhat = _pair(target, point)
    ctx = np.asarray(context, dtype=np.float64)
    if ctx.size < 2:
        raise ParameterError("mase needs a context of at least 2 values")
    naive_mae = float(np.mean(np.abs(np.diff(ctx))))
    return float(np.mean(np.abs(y - yhat)) / max(naive_mae, ZERO_EPS))


def aggregate_relative(model_losses, baseline_losses) -> float:
    """Ratio of summed losses over paired windows; the baseline scores 1.0."""
    m = np.asarray(model_losses, dtype=np.float64)
    b = np.asarray(baseline_losses, dtype=np.float64)
    if m.shape != b.shape:
        raise BenchmarkError(
            f"aggregate-relative needs paired windows: {m.shape} vs {b.shape}"
        )
    total_b = float(b.sum())
    if not np.isfinite(total_b) or abs(total_b) <= ZERO_EPS:
        raise BenchmarkError("baseline loss sum is zero; relative aggregation undefined")
    return float(m.sum() / total_b)


def _pair(target, point) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(target, dtype=np.float64)
    yhat = np.asarray(point, dtype=np.float64)
    if y.shape != yhat.shape:
        raise ParameterError(f"length mismatch: target {y.shape} vs forecast {yhat.shape}")
    return y, yhat

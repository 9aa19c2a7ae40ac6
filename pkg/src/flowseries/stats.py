"""Dataset statistics: unit-root stationarity testing, value entropy,
length dispersion, and a two-dataset PCA projection.

The stationarity test regresses the differenced series on its lagged
level and lagged differences (constant included, no trend), picks the lag
order by AIC, and compares the t-ratio of the level coefficient against
the large-sample 5% critical value of -2.86.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DatasetError, ParameterError
from .pipeline import SeriesRecord

log = logging.getLogger(__name__)

ADF_CRITICAL_5PCT = -2.86  # constant-only regression, large sample
DEFAULT_ENTROPY_BINS = 64
DEFAULT_PCA_RESAMPLE = 256
MIN_ADF_MARGIN = 20


@dataclass
class AdfResult:
    statistic: float
    stationary_at_95: bool
    used_lag: int
    degenerate: bool = False


@dataclass
class DatasetSummary:
    series_count: int
    object_count: int
    mean_length: float
    length_cv: float
    value_mean: float
    value_std: float
    stationary_fraction: float
    mean_entropy_bits: float
    adf_evaluated: int

    def to_dict(self) -> dict:
        return {
            "series_count": self.series_count,
            "object_count": self.object_count,
            "mean_length": self.mean_length,
            "length_cv": self.length_cv,
            "value_mean": self.value_mean,
            "value_std": self.value_std,
            "stationary_fraction": self.stationary_fraction,
            "mean_entropy_bits": self.mean_entropy_bits,
            "adf_evaluated": self.adf_evaluated,
        }


@dataclass
class PcaProjection:
    points: np.ndarray  # (n_series, 2)
    labels: list[str]
    explained_variance: np.ndarray  # (2,) fraction of total variance
    components: np.ndarray  # (2, resample_len), orthonormal rows


def default_max_lag(n: int) -> int:
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float, np.ndarray]:
    """Least squares returning (beta, ssr, standard errors)."""
    beta, _, rank, _ = np.linalg.lstsq(x, y, rcond=None)
    if rank < x.shape[1]:
        raise np.linalg.LinAlgError("rank-deficient design matrix")
    resid = y - x @ beta
    ssr = float(resid @ resid)
    dof = x.shape[0] - x.shape[1]
    if dof <= 0:
        raise np.linalg.LinAlgError("no residual degrees of freedom")
    sigma2 = ssr / dof
    cov = sigma2 * np.linalg.inv(x.T @ x)
    return beta, ssr, np.sqrt(np.diag(cov))


def adf_test(series, max_lag: int | None = None) -> AdfResult:
    """Unit-root test of the series; stationary when the t-ratio < -2.86.

    Lag order is chosen by minimal AIC over 0..max_lag on a common sample,
    then the statistic is refit at the chosen lag on the full usable
    sample. A constant (or otherwise degenerate) series is reported
    non-stationary with the degenerate flag set.
    """
    y = np.asarray(series, dtype=np.float64)
    if y.ndim != 1:
        raise ParameterError("series must be one-dimensional")
    n = y.size
    if max_lag is None:
        max_lag = default_max_lag(n)
    if max_lag < 0:
        raise ParameterError(f"max lag must be >= 0, got {max_lag}")
    if n < MIN_ADF_MARGIN + max_lag:
        raise ParameterError(
            f"series too short for the unit-root test: {n} < {MIN_ADF_MARGIN + max_lag}"
        )

    dy = np.diff(y)

    def design(lag: int, rows: int) -> tuple[np.ndarray, np.ndarray]:
        # rows = number of usable observations from the end of dy
        target = dy[-rows:]
        cols = [np.ones(rows), y[-rows - 1 : -1]]
        for i in range(1, lag + 1):
            cols.append(dy[-rows - i : -i])
        return np.column_stack(cols), target

    # Lag search: all candidates are nested column subsets of the max-lag
    # design on a common sample, so one Gram matrix serves every fit.
    common_rows = dy.size - max_lag
    x_full, target = design(max_lag, common_rows)
    gram = x_full.T @ x_full
    moment = x_full.T @ target
    yty = float(target @ target)
    best = None
    for lag in range(0, max_lag + 1):
        k = 2 + lag
        try:
            beta = np.linalg.solve(gram[:k, :k], moment[:k])
        except np.linalg.LinAlgError:
            return AdfResult(math.nan, False, 0, degenerate=True)
        if not np.all(np.isfinite(beta)):
            return AdfResult(math.nan, False, 0, degenerate=True)
        ssr = max(yty - float(beta @ moment[:k]), 0.0)
        aic = common_rows * math.log(max(ssr / common_rows, 1e-300)) + 2.0 * k
        if best is None or aic < best[0]:
            best = (aic, lag)

    lag = best[1]
    x, target = design(lag, dy.size - lag)
    try:
        beta, _, se = _ols(x, target)
    except np.linalg.LinAlgError:
        return AdfResult(math.nan, False, lag, degenerate=True)
    if se[1] <= 0.0 or not math.isfinite(se[1]):
        return AdfResult(math.nan, False, lag, degenerate=True)
    stat = float(beta[1] / se[1])
    return AdfResult(stat, stat < ADF_CRITICAL_5PCT, lag)


def shannon_entropy_bits(series, bins: int = DEFAULT_ENTROPY_BINS) -> float:
    """Entropy of the value histogram over equal-width bins, in bits.

    A constant series carries no information and scores 0.
    """
    if bins < 2:
        raise ParameterError(f"bin count must be >= 2, got {bins}")
    values = np.asarray(series, dtype=np.float64)
    if values.size == 0:
        raise ParameterError("series must be nonempty")
    lo, hi = float(values.min()), float(values.max())
    if hi - lo < 1e-300:
        return 0.0
    counts, _ = np.histogram(values, bins=bins, range=(lo, hi))
    p = counts[counts > 0] / values.size
    return float(-np.sum(p * np.log2(p)))


def summarize_dataset(records: list[SeriesRecord], bins: int = DEFAULT_ENTROPY_BINS) -> DatasetSummary:
    """Aggregate counts, length dispersion, value spread, stationarity rate,
    and mean entropy over a series collection."""
    if not records:
        raise DatasetError("cannot summarize an empty dataset")

    lengths = np.asarray([rec.length for rec in records], dtype=np.float64)
    all_values = np.concatenate([np.asarray(rec.values, dtype=np.float64) for rec in records])
    mean_length = float(lengths.mean())
    length_cv = float(lengths.std() / mean_length) if mean_length > 0 else 0.0

    stationary = 0
    evaluated = 0
    entropies = []
    for rec in records:
        entropies.append(shannon_entropy_bits(rec.values, bins))
        try:
            result = adf_test(rec.values)
        except ParameterError:
            continue  # too short to test; excluded from the fraction
        evaluated += 1
        if result.stationary_at_95:
            stationary += 1

    return DatasetSummary(
        series_count=len(records),
        object_count=len({rec.object_tag for rec in records}),
        mean_length=mean_length,
        length_cv=length_cv,
        value_mean=float(all_values.mean()),
        value_std=float(all_values.std()),
        stationary_fraction=(stationary / evaluated) if evaluated else 0.0,
        mean_entropy_bits=float(np.mean(entropies)),
        adf_evaluated=evaluated,
    )


def _normalize_and_resample(records: list[SeriesRecord], resample_len: int) -> tuple[np.ndarray, list[str]]:
    rows = []
    kept = []
    for rec in records:
        v = np.asarray(rec.values, dtype=np.float64)
        if v.size < 2:
            log.warning("dropping series %s from PCA: too short", rec.series_id)
            continue
        sd = v.std()
        if sd < 1e-12:
            log.warning("dropping constant series %s from PCA", rec.series_id)
            continue
        z = (v - v.mean()) / sd
        s_new = np.linspace(0.0, v.size - 1.0, resample_len)
        rows.append(np.interp(s_new, np.arange(v.size, dtype=np.float64), z))
        kept.append(rec.series_id)
    return (np.stack(rows) if rows else np.empty((0, resample_len))), kept


def pca_compare(
    dataset_a: list[SeriesRecord],
    dataset_b: list[SeriesRecord],
    resample_len: int = DEFAULT_PCA_RESAMPLE,
) -> PcaProjection:
    """Project two normalized datasets onto their joint top-2 principal axes.

    Series are z-normalized, resampled to a common length, merged, and
    decomposed via the eigenvectors of the merged covariance matrix.
    Component signs are fixed deterministically so row order cannot flip
    the projection.
    """
    if resample_len < 8:
        raise ParameterError(f"resample length must be >= 8, got {resample_len}")
    if not dataset_a or not dataset_b:
        raise DatasetError("both datasets must be nonempty")

    rows_a, _ = _normalize_and_resample(dataset_a, resample_len)
    rows_b, _ = _normalize_and_resample(dataset_b, resample_len)
    if rows_a.shape[0] == 0 or rows_b.shape[0] == 0:
        raise DatasetError("all series in one dataset are constant; nothing to project")

    merged = np.vstack([rows_a, rows_b])
    centered = merged - merged.mean(axis=0, keepdims=True)
    cov = centered.T @ centered / max(merged.shape[0] - 1, 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    top = eigvecs[:, order[:2]]
    for j in range(2):
        anchor = np.argmax(np.abs(top[:, j]))
        if top[anchor, j] < 0:
            top[:, j] = -top[:, j]

    points = centered @ top
    total = float(eigvals.sum())
    explained = eigvals[order[:2]] / total if total > 0 else np.zeros(2)
    labels = ["a"] * rows_a.shape[0] + ["b"] * rows_b.shape[0]
    return PcaProjection(
        points=points,
        labels=labels,
        explained_variance=np.asarray(explained, dtype=np.float64),
        components=top.T.copy(),
    )

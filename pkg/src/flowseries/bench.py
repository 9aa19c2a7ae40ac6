"""Zero-shot evaluation harness: fixed context/horizon windows, four
metrics, and aggregate-relative normalization against a baseline.

Series are cut into non-overlapping 500-step windows (450 context, 50
horizon, trailing remainder dropped). Percentage metrics average over
windows; the quantile and scaled losses are summed per model and divided
by the baseline's sums, which pins the baseline at exactly 1.0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import BenchmarkError
from .forecasters import DECILE_LEVELS, ForecastResult, validate_forecast
from .metrics import aggregate_relative, mape, mase, smape, wql
from .pipeline import SeriesRecord

WINDOW = 500
CONTEXT = 450
HORIZON = 50


@dataclass
class EvalWindow:
    """One evaluation unit: a context slice and the horizon that follows it."""

    series_id: str
    context: np.ndarray
    target: np.ndarray
    window_index: int = 0
    object_tag: str = ""


@dataclass
class ModelScores:
    mape: float
    smape: float
    agg_rel_wql: float
    agg_rel_mase: float
    windows_evaluated: int
    failed_windows: int
    undefined_mape_windows: int
    undefined_wql_windows: int
    mape_excluded_steps: int
    per_object: dict[str, dict[str, float]] = field(default_factory=dict)


@dataclass
class MetricReport:
    models: dict[str, ModelScores]
    windows_total: int
    series_skipped: int

    def to_dict(self) -> dict:
        """Report body: model name -> scores. Run-level counts live in the
        dataclass (and the CLI manifest), not in the report file."""
        return {
            name: {
                "mape": scores.mape,
                "smape": scores.smape,
                "agg_rel_wql": scores.agg_rel_wql,
                "agg_rel_mase": scores.agg_rel_mase,
                "windows_evaluated": scores.windows_evaluated,
                "failed_windows": scores.failed_windows,
                "undefined_mape_windows": scores.undefined_mape_windows,
                "undefined_wql_windows": scores.undefined_wql_windows,
                "mape_excluded_steps": scores.mape_excluded_steps,
                "per_object": scores.per_object,
            }
            for name, scores in self.models.items()
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def make_windows(
    record: SeriesRecord,
    window: int = WINDOW,
    context: int = CONTEXT,
    horizon: int = HORIZON,
) -> list[EvalWindow]:
    """Cut non-overlapping windows from the series start.

    A trailing remainder shorter than one window is discarded; a series
    shorter than one window yields no windows at all.
    """
    if context + horizon != window:
        raise BenchmarkError(
            f"window split {context}+{horizon} does not equal window size {window}"
        )
    values = np.asarray(record.values, dtype=np.float64)
    out = []
    for i in range(values.size // window):
        chunk = values[i * window : (i + 1) * window]
        out.append(
            EvalWindow(
                series_id=record.series_id,
                context=chunk[:context],
                target=chunk[context:],
                window_index=i,
                object_tag=record.object_tag,
            )
        )
    return out


def _evaluate_model(forecaster, windows: list[EvalWindow], horizon: int) -> list[ForecastResult | None]:
    if hasattr(forecaster, "forecast_batch"):
        results = forecaster.forecast_batch([w.context for w in windows], horizon)
    else:
        results = [forecaster(w.context, horizon) for w in windows]
    for result in results:
        if result is not None:
            validate_forecast(result, horizon, DECILE_LEVELS)
    return results


def run_benchmark(
    records: list[SeriesRecord],
    forecasters: dict[str, object],
    baseline: str = "builtin:linreg",
    window: int = WINDOW,
    context: int = CONTEXT,
    horizon: int = HORIZON,
) -> MetricReport:
    """Score every forecaster on every eligible window of the dataset.

    The baseline forecaster must be registered; quantile and scaled
    losses are normalized against it window-by-window (ratio of sums over
    windows valid for both models). MAPE and sMAPE are plain means over a
    model's valid windows.
    """
    if baseline not in forecasters:
        raise BenchmarkError(f"baseline forecaster '{baseline}' is not registered")

    windows: list[EvalWindow] = []
    skipped = 0
    for rec in records:
        cut = make_windows(rec, window, context, horizon)
        if not cut:
            skipped += 1
        windows.extend(cut)
    if not windows:
        raise BenchmarkError(
            f"no eligible windows: every series is shorter than {window} steps"
        )
    windows.sort(key=lambda w: (w.series_id, w.window_index))
    n = len(windows)

    per_model_metrics: dict[str, dict[str, np.ndarray]] = {}
    for name, forecaster in forecasters.items():
        results = _evaluate_model(forecaster, windows, horizon)
        vals = {
            "mape": np.full(n, np.nan),
            "smape": np.full(n, np.nan),
            "wql": np.full(n, np.nan),
            "mase": np.full(n, np.nan),
            "ok": np.zeros(n, dtype=bool),
            "mape_excluded": 0,
        }
        for i, (w, result) in enumerate(zip(windows, results)):
            if result is None:
                continue
            vals["ok"][i] = True
            vals["mape"][i] = mape(w.target, result.point)
            vals["smape"][i] = smape(w.target, result.point)
            vals["wql"][i] = wql(w.target, result.quantiles)
            vals["mase"][i] = mase(w.target, result.point, w.context)
            vals["mape_excluded"] += int(np.sum(np.abs(w.target) <= 1e-8))
        per_model_metrics[name] = vals

    base = per_model_metrics[baseline]
    models: dict[str, ModelScores] = {}
    for name, vals in per_model_metrics.items():
        finite_mape = np.isfinite(vals["mape"])
        finite_smape = np.isfinite(vals["smape"])
        pair_wql = np.isfinite(vals["wql"]) & np.isfinite(base["wql"])
        pair_mase = np.isfinite(vals["mase"]) & np.isfinite(base["mase"])
        if not pair_wql.any() or not pair_mase.any():
            raise BenchmarkError(f"no windows with defined losses for model '{name}'")

        per_object: dict[str, dict[str, float]] = {}
        tags = sorted({w.object_tag for w in windows})
        for tag in tags:
            sel = np.asarray([w.object_tag == tag for w in windows]) & finite_smape
            if sel.any():
                per_object[tag] = {
                    "smape": float(np.mean(vals["smape"][sel])),
                    "windows": int(sel.sum()),
                }

        models[name] = ModelScores(
            mape=float(np.mean(vals["mape"][finite_mape])) if finite_mape.any() else float("nan"),
            smape=float(np.mean(vals["smape"][finite_smape])) if finite_smape.any() else float("nan"),
            agg_rel_wql=aggregate_relative(vals["wql"][pair_wql], base["wql"][pair_wql]),
            agg_rel_mase=aggregate_relative(vals["mase"][pair_mase], base["mase"][pair_mase]),
            windows_evaluated=int(vals["ok"].sum()),
            failed_windows=int(n - vals["ok"].sum()),
            undefined_mape_windows=int((vals["ok"] & ~finite_mape).sum()),
            undefined_wql_windows=int((vals["ok"] & ~np.isfinite(vals["wql"])).sum()),
            mape_excluded_steps=int(vals["mape_excluded"]),
            per_object=per_object,
        )

    return MetricReport(models=models, windows_total=n, series_skipped=skipped)


def per_object_csv(report: MetricReport) -> str:
    """Plot-ready per-object sMAPE, normalized per model by its worst object."""
    lines = ["model,object,smape,smape_normalized,windows"]
    for name in sorted(report.models):
        per_object = report.models[name].per_object
        worst = max((v["smape"] for v in per_object.values()), default=0.0)
        for tag in sorted(per_object):
            entry = per_object[tag]
            norm = entry["smape"] / worst if worst > 0 else 0.0
            lines.append(
                f"{name},{tag},{entry['smape']!r},{norm!r},{entry['windows']}"
            )
    return "\n".join(lines) + "\n"

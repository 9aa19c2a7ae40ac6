"""Request loop and backends for the forecasting adapter.

Wire format (UTF-8, one JSON object per line):
  request:  {"id": str, "context": [float...], "horizon": int,
             "quantiles": [0.1, ..., 0.9]}
  response: {"id": str, "point": [float...],
             "quantiles": {"0.1": [float...], ...}}

Malformed requests produce a diagnostic on stderr and processing
continues; a model that cannot be loaded ends the process with a nonzero
exit status. Every reply satisfies the shape contract, and quantile rows
are sorted per step so deciles never cross.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np


@dataclass
class AdapterConfig:
    model_id: str | None = None  # None = echo mode
    device: str = "cpu"  # "cpu" or "accelerator"
    frequency_component: int = 0  # timesfm frequency setting
    seed: int | None = None


class RequestError(ValueError):
    """A request line that cannot be served."""


def parse_request(line: str) -> dict:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise RequestError(f"not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise RequestError("request is not a JSON object")
    try:
        request_id = str(raw["id"])
        context = np.asarray(raw["context"], dtype=np.float64)
        horizon = int(raw["horizon"])
        levels = [float(q) for q in raw["quantiles"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise RequestError(f"missing or malformed field: {exc}") from exc
    if context.ndim != 1 or context.size < 1:
        raise RequestError("context must be a nonempty 1-D array")
    if not np.all(np.isfinite(context)):
        raise RequestError("context contains non-finite values")
    if horizon < 1:
        raise RequestError(f"horizon must be >= 1, got {horizon}")
    if any(not 0.0 < q < 1.0 for q in levels) or any(
        b <= a for a, b in zip(levels, levels[1:])
    ):
        raise RequestError("quantile levels must be strictly increasing within (0, 1)")
    return {"id": request_id, "context": context, "horizon": horizon, "levels": levels}


def _monotone(levels: list[float], rows: np.ndarray) -> np.ndarray:
    """Sort the per-step quantile values so they are non-decreasing in level.

    rows has shape (len(levels), horizon), ordered by ascending level.
    """
    return np.sort(rows, axis=0)


class EchoBackend:
    """Last-value forecaster; deciles Gaussian-spaced by the one-step
    in-sample error standard deviation. No model weights involved."""

    def forecast(self, context: np.ndarray, horizon: int, levels: list[float]):
        point = np.full(horizon, float(context[-1]))
        sigma = float(np.std(np.diff(context))) if context.size >= 2 else 0.0
        rows = np.stack([point + NormalDist().inv_cdf(q) * sigma for q in levels])
        return point, rows


class ChronosBackend:
    """Chronos (bolt and t5 families) via the upstream pipeline API."""

    def __init__(self, config: AdapterConfig):
        try:
            import torch
            from chronos import BaseChronosPipeline
        except ImportError as exc:
            raise RuntimeError(
                f"cannot load '{config.model_id}': the chronos-forecasting "
                f"package is not installed ({exc})"
            ) from exc
        self._torch = torch
        device = "cpu" if config.device == "cpu" else None  # None = auto device map
        self.pipeline = BaseChronosPipeline.from_pretrained(
            config.model_id,
            device_map=device or "auto",
            torch_dtype=torch.float32 if config.device == "cpu" else "auto",
        )
        self.seed = config.seed

    def forecast(self, context: np.ndarray, horizon: int, levels: list[float]):
        if self.seed is not None:
            self._torch.manual_seed(self.seed)
        tensor = self._torch.tensor(context, dtype=self._torch.float32)
        quantiles, mean = self.pipeline.predict_quantiles(
            context=tensor, prediction_length=horizon, quantile_levels=levels
        )
        point = mean[0].cpu().numpy().astype(np.float64)
        rows = quantiles[0].cpu().numpy().astype(np.float64).T  # (levels, horizon)
        return point, rows


class TimesFmBackend:
    """TimesFM via the upstream torch checkpoint API."""

    def __init__(self, config: AdapterConfig):
        try:
            import timesfm
        except ImportError as exc:
            raise RuntimeError(
                f"cannot load '{config.model_id}': the timesfm package is "
                f"not installed ({exc})"
            ) from exc
        backend = "cpu" if config.device == "cpu" else "gpu"
        self.model = timesfm.TimesFm(
            hparams=timesfm.TimesFmHparams(backend=backend),
            checkpoint=timesfm.TimesFmCheckpoint(huggingface_repo_id=config.model_id),
        )
        self.frequency = config.frequency_component

    def forecast(self, context: np.ndarray, horizon: int, levels: list[float]):
        self.model.hparams.horizon_len = max(self.model.hparams.horizon_len, horizon)
        point_all, quantile_all = self.model.forecast(
            inputs=[context], freq=[self.frequency]
        )
        point = np.asarray(point_all[0][:horizon], dtype=np.float64)
        # upstream emits columns [mean, q0.1 .. q0.9]
        rows = []
        upstream_levels = [round(0.1 * i, 1) for i in range(1, 10)]
        table = np.asarray(quantile_all[0], dtype=np.float64)
        for level in levels:
            if level in upstream_levels:
                rows.append(table[:horizon, 1 + upstream_levels.index(level)])
            else:
                rows.append(point)  # no native estimate for this level
        return point, np.stack(rows)


def make_backend(config: AdapterConfig):
    if config.model_id is None:
        return EchoBackend()
    name = config.model_id.lower()
    if "chronos" in name:
        return ChronosBackend(config)
    if "timesfm" in name:
        return TimesFmBackend(config)
    raise RuntimeError(
        f"unrecognized model id '{config.model_id}' (expected a chronos or timesfm model)"
    )


def serve(config: AdapterConfig, stdin=None, stdout=None, stderr=None) -> int:
    """Answer requests until input closes; returns the exit status."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr

    try:
        backend = make_backend(config)
    except RuntimeError as exc:
        print(f"tsfm-adapter: {exc}", file=stderr, flush=True)
        return 1

    mode = config.model_id if config.model_id else "echo"
    print(
        f"tsfm-adapter: serving '{mode}' on {config.device} "
        f"(frequency_component={config.frequency_component}, seed={config.seed})",
        file=stderr,
        flush=True,
    )

    for line in stdin:
        if not line.strip():
            continue
        try:
            request = parse_request(line)
        except RequestError as exc:
            print(f"tsfm-adapter: protocol error: {exc}", file=stderr, flush=True)
            continue
        point, rows = backend.forecast(
            request["context"], request["horizon"], request["levels"]
        )
        point = np.asarray(point, dtype=np.float64).reshape(-1)[: request["horizon"]]
        rows = _monotone(request["levels"], np.asarray(rows, dtype=np.float64))
        response = {
            "id": request["id"],
            "point": point.tolist(),
            "quantiles": {
                repr(level): rows[i][: request["horizon"]].tolist()
                for i, level in enumerate(request["levels"])
            },
        }
        print(json.dumps(response), file=stdout, flush=True)
    return 0

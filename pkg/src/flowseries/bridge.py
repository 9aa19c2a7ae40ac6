"""Language-neutral forecaster bridge over standard streams.

An external forecaster is any process that reads one JSON request per
stdin line and writes one JSON response per stdout line. Responses may
arrive out of order; the bridge re-pairs them by request id, enforces the
forecast shape contract, and gives every request exactly one terminal
disposition: a response, a timeout, or a run abort.

Wire format (UTF-8, newline-terminated):
  request:  {"id": str, "context": [float...], "horizon": int,
             "quantiles": [0.1, ..., 0.9]}
  response: {"id": str, "point": [float...],
             "quantiles": {"0.1": [float...], ..., "0.9": [float...]}}
"""

from __future__ import annotations

import json
import shlex
import subprocess
import threading
import time
from dataclasses import dataclass

import numpy as np

from .errors import BridgeError, ForecastContractError, ProtocolError
from .forecasters import DECILE_LEVELS, ForecastResult, validate_forecast

DEFAULT_TIMEOUT = 120.0
DEFAULT_MAX_IN_FLIGHT = 1


@dataclass
class ForecastRequest:
    request_id: str
    context: np.ndarray
    horizon: int
    quantile_levels: tuple[float, ...] = DECILE_LEVELS


@dataclass
class ForecastResponse:
    request_id: str
    point: np.ndarray
    quantiles: dict[float, np.ndarray]


def format_request_line(request: ForecastRequest) -> str:
    if request.horizon < 1:
        raise ProtocolError(f"request '{request.request_id}': horizon must be >= 1")
    levels = list(request.quantile_levels)
    if any(not 0.0 < q < 1.0 for q in levels) or any(
        b <= a for a, b in zip(levels, levels[1:])
    ):
        raise ProtocolError(
            f"request '{request.request_id}': quantile levels must be strictly "
            f"increasing within (0, 1)"
        )
    return json.dumps(
        {
            "id": request.request_id,
            "context": np.asarray(request.context, dtype=np.float64).tolist(),
            "horizon": int(request.horizon),
            "quantiles": levels,
        }
    )


def parse_response_line(line: str) -> ForecastResponse:
    try:
        raw = json.loads(line)
        if not isinstance(raw, dict):
            raise ValueError("response is not a JSON object")
        rid = raw["id"]
        point = np.asarray(raw["point"], dtype=np.float64)
        quantiles = {float(k): np.asarray(v, dtype=np.float64) for k, v in raw["quantiles"].items()}
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ProtocolError(f"malformed forecaster response line {line.strip()!r}: {exc}") from exc
    return ForecastResponse(request_id=str(rid), point=point, quantiles=quantiles)


def _check_response(response: ForecastResponse, request: ForecastRequest) -> ForecastResponse:
    levels = tuple(request.quantile_levels)
    matched: dict[float, np.ndarray] = {}
    for key, values in response.quantiles.items():
        canonical = next((lv for lv in levels if abs(lv - key) <= 1e-9), None)
        if canonical is None:
            raise ProtocolError(
                f"response for request '{request.request_id}': unexpected quantile level {key}"
            )
        matched[canonical] = values
    try:
        validate_forecast(
            ForecastResult(point=response.point, quantiles=matched), request.horizon, levels
        )
    except ForecastContractError as exc:
        raise ProtocolError(f"response for request '{request.request_id}': {exc}") from exc
    return ForecastResponse(request_id=response.request_id, point=response.point, quantiles=matched)


def bridge_forecast(
    command,
    requests,
    timeout: float = DEFAULT_TIMEOUT,
    max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
) -> list[ForecastResponse | None]:
    """Run every request through one child process; None marks a timeout.

    Raises ProtocolError on malformed or contract-violating responses and
    BridgeError when the child cannot be launched, dies early, or exits
    nonzero.
    """
    requests = list(requests)
    ids = [r.request_id for r in requests]
    if len(set(ids)) != len(ids):
        raise ProtocolError("request ids must be unique within a run")
    if max_in_flight < 1:
        raise ProtocolError(f"max in-flight must be >= 1, got {max_in_flight}")
    by_id = {r.request_id: r for r in requests}

    args = shlex.split(command) if isinstance(command, str) else list(command)
    try:
        proc = subprocess.Popen(
            args,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
    except OSError as exc:
        raise BridgeError(f"cannot launch forecaster command {args!r}: {exc}") from exc

    cond = threading.Condition()
    lines: list[str] = []
    eof = False
    stderr_tail: list[str] = []

    def _drain_stdout():
        nonlocal eof
        for line in proc.stdout:
            with cond:
                lines.append(line)
                cond.notify_all()
        with cond:
            eof = True
            cond.notify_all()

    def _drain_stderr():
        for line in proc.stderr:
            stderr_tail.append(line)
            del stderr_tail[:-50]

    threading.Thread(target=_drain_stdout, daemon=True).start()
    threading.Thread(target=_drain_stderr, daemon=True).start()

    results: dict[str, ForecastResponse | None] = {}
    pending: dict[str, float] = {}
    sent = 0
    stdin_closed = False
    child_quit_early = False

    def _diag() -> str:
        tail = "".join(stderr_tail[-10:]).strip()
        return f" (stderr: {tail})" if tail else ""

    try:
        while len(results) < len(requests):
            to_send = None
            with cond:
                while lines:
                    response = parse_response_line(lines.pop(0))
                    rid = response.request_id
                    if rid in pending:
                        results[rid] = _check_response(response, by_id[rid])
                        del pending[rid]
                    elif rid in results:
                        if results[rid] is not None:
                            raise ProtocolError(f"duplicate response for request id '{rid}'")
                        # late answer to a timed-out request; disposition stands
                    else:
                        raise ProtocolError(f"response for unknown request id '{rid}'")
                if len(results) == len(requests):
                    break
                now = time.monotonic()
                for rid in [r for r, deadline in pending.items() if deadline <= now]:
                    results[rid] = None
                    del pending[rid]
                if len(results) == len(requests):
                    break
                if sent < len(requests) and len(pending) < max_in_flight:
                    to_send = requests[sent]
                    pending[to_send.request_id] = now + timeout
                    sent += 1
                elif eof:
                    child_quit_early = True
                    break
                else:
                    horizon_wait = min(pending.values(), default=now + 0.1) - now
                    cond.wait(timeout=max(horizon_wait, 0.0) + 0.001)
            if to_send is not None:
                try:
                    proc.stdin.write(format_request_line(to_send) + "\n")
                    proc.stdin.flush()
                    if sent == len(requests):
                        proc.stdin.close()
                        stdin_closed = True
                except (BrokenPipeError, OSError):
                    with cond:
                        child_quit_early = True
                    break

        if child_quit_early:
            try:
                rc = proc.wait(timeout=10.0)
            except subprocess.TimeoutExpired:
                proc.kill()
                rc = proc.wait()
            missing = len(requests) - len(results)
            if rc != 0:
                raise BridgeError(
                    f"forecaster exited with status {rc} leaving {missing} request(s) "
                    f"unanswered{_diag()}"
                )
            # clean exit without answers: those windows fail individually
            for request in requests:
                results.setdefault(request.request_id, None)
        else:
            if not stdin_closed:
                proc.stdin.close()
                stdin_closed = True
            try:
                rc = proc.wait(timeout=30.0)
            except subprocess.TimeoutExpired:
                proc.kill()
                raise BridgeError(f"forecaster did not exit after end of input{_diag()}")
            if rc != 0:
                raise BridgeError(f"forecaster exited with status {rc}{_diag()}")
    finally:
        if proc.poll() is None:
            proc.kill()
            proc.wait()

    return [results[r.request_id] for r in requests]


class BridgeForecaster:
    """Benchmark-facing adapter: one child process answers a window batch."""

    def __init__(
        self,
        command,
        timeout: float = DEFAULT_TIMEOUT,
        max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
        quantile_levels: tuple[float, ...] = DECILE_LEVELS,
    ):
        self.command = command
        self.timeout = timeout
        self.max_in_flight = max_in_flight
        self.quantile_levels = quantile_levels

    def forecast_batch(self, contexts, horizon: int) -> list[ForecastResult | None]:
        requests = [
            ForecastRequest(
                request_id=f"w{i:06d}",
                context=np.asarray(ctx, dtype=np.float64),
                horizon=horizon,
                quantile_levels=self.quantile_levels,
            )
            for i, ctx in enumerate(contexts)
        ]
        responses = bridge_forecast(
            self.command, requests, timeout=self.timeout, max_in_flight=self.max_in_flight
        )
        return [
            None if r is None else ForecastResult(point=r.point, quantiles=r.quantiles)
            for r in responses
        ]

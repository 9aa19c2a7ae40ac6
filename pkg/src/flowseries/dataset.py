"""Series dataset persistence: JSON-Lines records, CSV export, manifests.

One JSONL file holds one video's series, one object per line with fields
series_id, source, object, axis, values. The format is the interchange
contract between extraction, statistics, and the benchmark harness.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DatasetError
from .pipeline import SeriesRecord


def write_series_jsonl(records: list[SeriesRecord], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(
                json.dumps(
                    {
                        "series_id": rec.series_id,
                        "source": rec.source_id,
                        "object": rec.object_tag,
                        "axis": rec.axis,
                        "values": np.asarray(rec.values, dtype=np.float64).tolist(),
                    },
                    sort_keys=True,
                )
            )
            fh.write("\n")


def read_series_jsonl(path) -> list[SeriesRecord]:
    path = Path(path)
    records = []
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DatasetError(f"cannot read dataset file '{path}': {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            raw = json.loads(line)
            records.append(
                SeriesRecord(
                    series_id=str(raw["series_id"]),
                    source_id=str(raw["source"]),
                    object_tag=str(raw.get("object", "")),
                    axis=str(raw["axis"]),
                    values=np.asarray(raw["values"], dtype=np.float64),
                )
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DatasetError(f"{path}:{lineno}: malformed series record: {exc}") from exc
    return records


def read_series_dir(directory) -> list[SeriesRecord]:
    """All series from every *.jsonl file in a directory, in filename order."""
    directory = Path(directory)
    if not directory.is_dir():
        raise DatasetError(f"dataset directory '{directory}' does not exist")
    records: list[SeriesRecord] = []
    for path in sorted(directory.glob("*.jsonl")):
        records.extend(read_series_jsonl(path))
    if not records:
        raise DatasetError(f"no series records found under '{directory}'")
    return records


def write_series_csv(records: list[SeriesRecord], path) -> None:
    """Flat interoperability export: series_id,axis,t,value."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        fh.write("series_id,axis,t,value\n")
        for rec in records:
            for t, value in enumerate(np.asarray(rec.values, dtype=np.float64).tolist()):
                fh.write(f"{rec.series_id},{rec.axis},{t},{value!r}\n")


def write_manifest(path, payload: dict) -> None:
    """Deterministic run manifest; identical runs produce identical bytes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")

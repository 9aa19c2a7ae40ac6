import json

import numpy as np

from _helpers import moving_object_scene, random_walk_record
from flowseries.cli import dispatch
from flowseries.dataset import (
    read_series_dir,
    read_series_jsonl,
    write_series_jsonl,
)
from flowseries.synth import SceneSpec


def _write_spec(tmp_path, spec: SceneSpec, name="spec.json"):
    raw = {
        "width": spec.width,
        "height": spec.height,
        "frame_count": spec.frame_count,
        "background": spec.background,
        "objects": spec.objects,
        "name": spec.name,
        "object_tag": spec.object_tag,
    }
    path = tmp_path / name
    path.write_text(json.dumps(raw))
    return path


def _dataset_dir(tmp_path, n=3, length=1000):
    data = tmp_path / "data"
    data.mkdir(exist_ok=True)
    records = [random_walk_record(length, f"series{i}") for i in range(n)]
    write_series_jsonl(records, data / "walks.jsonl")
    return data


class TestUsageErrors:
    def test_extract_requires_frames(self, capsys):
        assert dispatch(["extract"]) == 2
        assert "--frames" in capsys.readouterr().err

    def test_unknown_flag(self):
        assert dispatch(["stats", "--data", "x", "--bogus"]) == 2

    def test_module_error_exits_one(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert dispatch(["stats", "--data", str(empty)]) == 1
        assert "flowseries stats" in capsys.readouterr().err


class TestSynthCommand:
    def test_deterministic_outputs(self, tmp_path):
        spec = _write_spec(tmp_path, moving_object_scene(1, width=96, height=96, frame_count=5))
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert dispatch(["synth", "--spec", str(spec), "--seed", "7", "--out", str(out_a)]) == 0
        assert dispatch(["synth", "--spec", str(spec), "--seed", "7", "--out", str(out_b)]) == 0
        files_a = sorted(p.name for p in out_a.iterdir())
        files_b = sorted(p.name for p in out_b.iterdir())
        assert files_a == files_b
        for name in files_a:
            if name == "manifest.json":
                continue  # differs only in the --out flag value
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_manifest_records_flags(self, tmp_path):
        spec = _write_spec(tmp_path, moving_object_scene(1, width=96, height=96, frame_count=4))
        out = tmp_path / "scene"
        dispatch(["synth", "--spec", str(spec), "--seed", "3", "--out", str(out)])
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "synth"
        assert manifest["flags"]["seed"] == 3
        assert "version" in manifest


class TestExtractCommand:
    def test_extract_from_synth_frames(self, tmp_path):
        spec = _write_spec(
            tmp_path, moving_object_scene(5, width=96, height=96, frame_count=70)
        )
        frames_dir = tmp_path / "frames"
        assert dispatch(["synth", "--spec", str(spec), "--seed", "2", "--out", str(frames_dir)]) == 0
        out = tmp_path / "dataset"
        code = dispatch([
            "extract", "--frames", str(frames_dir), "--out", str(out),
            "--burn-in", "15", "--min-track-len", "25", "--pattern", "*.pgm",
            "--source-id", "demo", "--object-tag", "blob",
        ])
        assert code == 0
        records = read_series_jsonl(out / "demo.jsonl")
        assert records
        assert {r.axis for r in records} == {"x", "y"}
        assert all(r.object_tag == "blob" for r in records)
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["videos"][0]["source"] == "demo"
        assert (out / "series.csv").read_text().startswith("series_id,axis,t,value")

    def test_dump_masks(self, tmp_path):
        spec = _write_spec(
            tmp_path, moving_object_scene(5, width=96, height=96, frame_count=40)
        )
        frames_dir = tmp_path / "frames"
        dispatch(["synth", "--spec", str(spec), "--seed", "2", "--out", str(frames_dir)])
        masks = tmp_path / "masks"
        dispatch([
            "extract", "--frames", str(frames_dir), "--out", str(tmp_path / "d"),
            "--burn-in", "10", "--min-track-len", "20", "--pattern", "*.pgm",
            "--dump-masks", str(masks),
        ])
        assert len(list(masks.glob("mask_*.pgm"))) == 40


class TestStatsCommand:
    def test_json_summary_to_stdout(self, tmp_path, capsys):
        data = _dataset_dir(tmp_path)
        assert dispatch(["stats", "--data", str(data), "--entropy-bins", "32"]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["series_count"] == 3
        assert 0.0 <= summary["stationary_fraction"] <= 1.0
        assert 0.0 <= summary["mean_entropy_bits"] <= 5.0


class TestPcaCommand:
    def test_writes_labeled_csv(self, tmp_path):
        data = _dataset_dir(tmp_path)
        out = tmp_path / "points.csv"
        assert dispatch(["pca", "--a", str(data), "--b", str(data), "--out", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "label,pc1,pc2"
        assert len(lines) == 1 + 6
        assert {line.split(",")[0] for line in lines[1:]} == {"a", "b"}


class TestBenchCommand:
    def test_baseline_only_report(self, tmp_path):
        data = _dataset_dir(tmp_path)
        out = tmp_path / "report.json"
        code = dispatch([
            "bench", "--data", str(data),
            "--forecaster", "builtin:linreg",
            "--out", str(out),
        ])
        assert code == 0
        report = json.loads(out.read_text())
        baseline = report["builtin:linreg"]
        assert baseline["agg_rel_wql"] == 1.0
        assert baseline["agg_rel_mase"] == 1.0
        assert (tmp_path / "per_object.csv").exists()
        assert (tmp_path / "report.manifest.json").exists()

    def test_requires_baseline(self, tmp_path, capsys):
        data = _dataset_dir(tmp_path)
        code = dispatch([
            "bench", "--data", str(data),
            "--forecaster", "builtin:naive",
            "--out", str(tmp_path / "r.json"),
        ])
        assert code == 1
        assert "baseline" in capsys.readouterr().err

    def test_named_bridged_forecaster(self, tmp_path, child_command):
        data = _dataset_dir(tmp_path)
        out = tmp_path / "report.json"
        code = dispatch([
            "bench", "--data", str(data),
            "--forecaster", "builtin:linreg",
            "--forecaster", f"echo=cmd:{child_command('echo_naive')}",
            "--out", str(out), "--timeout", "60",
        ])
        assert code == 0
        report = json.loads(out.read_text())
        assert "echo" in report


class TestDatasetRoundTrip:
    def test_jsonl_round_trip(self, tmp_path):
        records = [random_walk_record(120, f"s{i}", tag="cat") for i in range(3)]
        path = tmp_path / "x.jsonl"
        write_series_jsonl(records, path)
        loaded = read_series_jsonl(path)
        for a, b in zip(records, loaded):
            assert a.series_id == b.series_id
            assert a.object_tag == b.object_tag
            assert np.array_equal(np.asarray(a.values), b.values)

    def test_read_dir_collects_all_files(self, tmp_path):
        d = tmp_path / "data"
        d.mkdir()
        write_series_jsonl([random_walk_record(50, "a")], d / "1.jsonl")
        write_series_jsonl([random_walk_record(50, "b")], d / "2.jsonl")
        assert [r.series_id for r in read_series_dir(d)] == ["a", "b"]

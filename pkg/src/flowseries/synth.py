"""Synthetic frame sequences with exactly known object trajectories.

Scenes are rendered deterministically from (spec, seed): textured patches
move along parametric paths over a constant or noise background, with
optional global camera shake. Textures are seeded uniform noise smoothed
once, which keeps structure matrices full-rank so the patches are
trackable; ground truth is returned as per-frame float center positions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SceneSpecError
from .frames import Frame, FrameSequence, write_pgm
from .raster import gaussian_smooth, sample_bilinear_many

SAFE_BORDER = 20.0  # half the default tracking window


@dataclass
class SceneSpec:
    """Declarative description of a synthetic scene."""

    width: int
    height: int
    frame_count: int
    background: dict = field(default_factory=lambda: {"kind": "constant", "intensity": 30})
    objects: list = field(default_factory=list)
    camera_shake: dict | None = None
    name: str | None = None
    object_tag: str = "synthetic"

    @classmethod
    def from_dict(cls, raw: dict) -> "SceneSpec":
        try:
            return cls(
                width=int(raw["width"]),
                height=int(raw["height"]),
                frame_count=int(raw["frame_count"]),
                background=dict(raw.get("background", {"kind": "constant", "intensity": 30})),
                objects=[dict(o) for o in raw.get("objects", [])],
                camera_shake=dict(raw["camera_shake"]) if raw.get("camera_shake") else None,
                name=raw.get("name"),
                object_tag=str(raw.get("object_tag", "synthetic")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SceneSpecError(f"invalid scene spec: {exc}") from exc

    @classmethod
    def from_json(cls, path) -> "SceneSpec":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise SceneSpecError(f"cannot read scene spec '{path}': {exc}") from exc
        return cls.from_dict(raw)


def trajectory_positions(trajectory: dict, frame_count: int) -> np.ndarray:
    """Evaluate a parametric path at every frame index; returns (T, 2) floats."""
    kind = trajectory.get("kind")
    t = np.arange(frame_count, dtype=np.float64)
    if kind == "linear":
        start = np.asarray(trajectory["start"], dtype=np.float64)
        velocity = np.asarray(trajectory["velocity"], dtype=np.float64)
        return start[None, :] + t[:, None] * velocity[None, :]
    if kind == "sinusoidal":
        center = np.asarray(trajectory["center"], dtype=np.float64)
        amplitude = np.asarray(trajectory["amplitude"], dtype=np.float64)
        period = float(trajectory["period"])
        phase = np.asarray(trajectory.get("phase", [0.0, math.pi / 2]), dtype=np.float64)
        angle = 2.0 * math.pi * t[:, None] / period + phase[None, :]
        return center[None, :] + amplitude[None, :] * np.sin(angle)
    if kind == "piecewise":
        waypoints = sorted((float(f), float(x), float(y)) for f, x, y in trajectory["waypoints"])
        if len(waypoints) < 2:
            raise SceneSpecError("piecewise trajectory needs at least 2 waypoints")
        frames = np.asarray([wp[0] for wp in waypoints])
        xs = np.asarray([wp[1] for wp in waypoints])
        ys = np.asarray([wp[2] for wp in waypoints])
        return np.stack([np.interp(t, frames, xs), np.interp(t, frames, ys)], axis=1)
    raise SceneSpecError(f"unknown trajectory kind '{kind}'")


def _shake_offsets(shake: dict | None, frame_count: int) -> np.ndarray:
    if shake is None:
        return np.zeros((frame_count, 2))
    kind = shake.get("kind", "sinusoidal")
    t = np.arange(frame_count, dtype=np.float64)
    if kind == "sinusoidal":
        amplitude = np.asarray(shake["amplitude"], dtype=np.float64)
        period = float(shake["period"])
        phase = np.asarray(shake.get("phase", [0.0, math.pi / 3]), dtype=np.float64)
        return amplitude[None, :] * np.sin(2.0 * math.pi * t[:, None] / period + phase[None, :])
    if kind == "offsets":
        offsets = np.asarray(shake["offsets"], dtype=np.float64)
        if offsets.shape != (frame_count, 2):
            raise SceneSpecError(
                f"explicit shake offsets must be shape ({frame_count}, 2), got {offsets.shape}"
            )
        return offsets
    raise SceneSpecError(f"unknown camera shake kind '{kind}'")


def _noise_texture(shape: tuple[int, int], rng: np.random.Generator, low: float, high: float) -> np.ndarray:
    """Seeded uniform noise, smoothed once, rescaled to [low, high]."""
    noise = gaussian_smooth(rng.uniform(0.0, 1.0, size=shape))
    lo, hi = noise.min(), noise.max()
    if hi - lo < 1e-12:
        return np.full(shape, 0.5 * (low + high))
    return low + (noise - lo) * (high - low) / (hi - lo)


def render_scene(spec: SceneSpec, seed: int) -> tuple[FrameSequence, list[np.ndarray]]:
    """Render a scene deterministically; returns frames plus ground truth.

    Ground truth is one (frame_count, 2) array of on-screen center
    positions per object, camera shake included.
    """
    if spec.frame_count < 2:
        raise SceneSpecError(f"frame_count must be >= 2, got {spec.frame_count}")
    if spec.width < 16 or spec.height < 16:
        raise SceneSpecError("scene must be at least 16x16")

    shake = _shake_offsets(spec.camera_shake, spec.frame_count)
    paths = []
    truths = []
    for i, obj in enumerate(spec.objects):
        path = trajectory_positions(obj["trajectory"], spec.frame_count)
        on_screen = path + shake
        size = float(obj["size"])
        margin = size / 2.0 + SAFE_BORDER
        if (
            on_screen[:, 0].min() < margin
            or on_screen[:, 0].max() > spec.width - 1 - margin
            or on_screen[:, 1].min() < margin
            or on_screen[:, 1].max() > spec.height - 1 - margin
        ):
            raise SceneSpecError(
                f"object {i} trajectory leaves the safe region "
                f"(needs {margin:.1f} px of border clearance)"
            )
        paths.append(on_screen)
        truths.append(on_screen)

    pad = int(math.ceil(np.abs(shake).max())) + 2
    bg_kind = spec.background.get("kind", "constant")
    if bg_kind == "constant":
        base = np.full(
            (spec.height + 2 * pad, spec.width + 2 * pad),
            float(spec.background.get("intensity", 30)),
        )
    elif bg_kind == "noise":
        lo, hi = spec.background.get("intensity_range", [10, 60])
        rng = np.random.default_rng(
            np.random.SeedSequence([seed, int(spec.background.get("seed", 0))])
        )
        base = _noise_texture((spec.height + 2 * pad, spec.width + 2 * pad), rng, lo, hi)
    else:
        raise SceneSpecError(f"unknown background kind '{bg_kind}'")

    patches = []
    for i, obj in enumerate(spec.objects):
        size = int(obj["size"])
        if size < 4:
            raise SceneSpecError(f"object {i} size must be >= 4 px, got {size}")
        lo, hi = obj.get("intensity_range", [120, 250])
        rng = np.random.default_rng(np.random.SeedSequence([seed, 1 + i, int(obj.get("texture_seed", 0))]))
        patches.append(_noise_texture((size, size), rng, lo, hi))

    grid_y, grid_x = np.mgrid[0 : spec.height, 0 : spec.width].astype(np.float64)
    frames = []
    for t in range(spec.frame_count):
        sx, sy = shake[t]
        canvas = sample_bilinear_many(base, grid_x + pad + sx, grid_y + pad + sy)
        for patch, on_screen in zip(patches, paths):
            size = patch.shape[0]
            cx, cy = on_screen[t]
            x0 = cx - (size - 1) / 2.0
            y0 = cy - (size - 1) / 2.0
            xa, xb = int(math.ceil(x0)), int(math.floor(x0 + size - 1))
            ya, yb = int(math.ceil(y0)), int(math.floor(y0 + size - 1))
            sub_y, sub_x = np.mgrid[ya : yb + 1, xa : xb + 1].astype(np.float64)
            canvas[ya : yb + 1, xa : xb + 1] = sample_bilinear_many(
                patch, sub_x - x0, sub_y - y0
            )
        data = np.clip(np.floor(canvas + 0.5), 0, 255).astype(np.uint8)
        frames.append(Frame(data=data, index=t))

    source = spec.name if spec.name else f"synth-{seed}"
    seq = FrameSequence(frames=frames, source_id=source, object_tag=spec.object_tag)
    return seq, truths


def write_scene(spec: SceneSpec, seed: int, out_dir) -> tuple[FrameSequence, list[np.ndarray]]:
    """Render a scene and write PGM frames plus ground_truth.json."""
    seq, truths = render_scene(spec, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for frame in seq:
        write_pgm(out / f"{frame.index:06d}.pgm", frame.data)
    payload = {
        "source": seq.source_id,
        "object_tag": seq.object_tag,
        "frame_count": len(seq),
        "objects": [truth.tolist() for truth in truths],
    }
    (out / "ground_truth.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
    return seq, truths

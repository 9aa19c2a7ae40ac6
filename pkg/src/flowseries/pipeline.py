"""End-to-end extraction: seed corners on the foreground, propagate them
with forward-backward-filtered Lucas-Kanade, and post-process the
surviving tracks into univariate series.

The frame loop is strictly sequential (the background model is a temporal
recurrence); per-frame point tracking is batched. Track post-processing
stretches every track onto the longest track's length, keeps the k least
correlated, and emits each axis as its own series.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import background as bg
from . import corners, flow
from .errors import SequenceTooShortError
from .frames import FrameSequence, write_pgm
from .raster import build_pyramid

log = logging.getLogger(__name__)

DEFAULT_BURN_IN = 30
DEFAULT_MIN_TRACK_LEN = 50
DEFAULT_MIN_LIVE = 5
DEFAULT_REDETECT_EXCLUSION = 10.0
DEFAULT_SELECT_K = 5


@dataclass
class PipelineConfig:
    """Every tunable of the extraction pipeline, with stock defaults."""

    burn_in: int = DEFAULT_BURN_IN
    mog2_alpha: float = bg.DEFAULT_ALPHA
    mog2_tbg: float = bg.T_BG
    mask_cleanup: bool = False
    max_corners: int = corners.DEFAULT_MAX_CORNERS
    quality_level: float = corners.DEFAULT_QUALITY_LEVEL
    min_distance: float = corners.DEFAULT_MIN_DISTANCE
    lk_window: int = flow.DEFAULT_WINDOW
    pyr_levels: int = flow.DEFAULT_PYRAMID_DEPTH
    lk_iters: int = flow.DEFAULT_MAX_ITER
    lk_eps: float = flow.DEFAULT_EPS
    fb_threshold: float = flow.DEFAULT_FB_THRESHOLD
    residual_threshold: float = flow.DEFAULT_RESIDUAL_THRESHOLD
    min_track_len: int = DEFAULT_MIN_TRACK_LEN
    min_live: int = DEFAULT_MIN_LIVE
    redetect_exclusion: float = DEFAULT_REDETECT_EXCLUSION
    select_k: int = DEFAULT_SELECT_K
    dump_masks: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Track:
    """One keypoint's per-frame subpixel positions between birth and death."""

    keypoint_id: int
    birth_frame: int
    death_frame: int
    positions: np.ndarray  # (length, 2) float, one row per frame of life

    @property
    def length(self) -> int:
        return self.positions.shape[0]

    @property
    def xs(self) -> np.ndarray:
        return self.positions[:, 0]

    @property
    def ys(self) -> np.ndarray:
        return self.positions[:, 1]


@dataclass
class SeriesRecord:
    """A univariate series: one axis of one track, plus provenance."""

    series_id: str
    source_id: str
    object_tag: str
    axis: str  # "x" or "y"
    values: np.ndarray

    @property
    def length(self) -> int:
        return len(self.values)


class _LiveTrack:
    __slots__ = ("keypoint_id", "birth_frame", "points")

    def __init__(self, keypoint_id: int, birth_frame: int, x: float, y: float):
        self.keypoint_id = keypoint_id
        self.birth_frame = birth_frame
        self.points = [(x, y)]

    def close(self, death_frame: int) -> Track:
        return Track(
            keypoint_id=self.keypoint_id,
            birth_frame=self.birth_frame,
            death_frame=death_frame,
            positions=np.asarray(self.points, dtype=np.float64),
        )


def run_extraction(seq: FrameSequence, config: PipelineConfig | None = None) -> list[Track]:
    """Track foreground corners across the sequence; returns finished tracks.

    The background model burns in first; corners are then seeded on the
    masked frame and advanced pairwise with the forward-backward check.
    A track dies the first time the check fails. When fewer than min_live
    tracks survive, new corners are seeded away from the living ones.
    Only tracks that lived at least min_track_len frames are returned.
    """
    config = config or PipelineConfig()
    if len(seq) < config.burn_in + 2:
        raise SequenceTooShortError(
            f"sequence too short: {len(seq)} frames, need at least {config.burn_in + 2} "
            f"(burn-in {config.burn_in} plus one tracked pair)"
        )

    model = bg.MixtureBackground(
        seq.height, seq.width, alpha=config.mog2_alpha, t_bg=config.mog2_tbg
    )

    def classify(frame):
        mask = model.update_and_classify(frame)
        if config.dump_masks:
            dump = Path(config.dump_masks)
            dump.mkdir(parents=True, exist_ok=True)
            write_pgm(dump / f"mask_{frame.index:06d}.pgm", mask * 255)
        return mask

    for frame in seq.frames[: config.burn_in]:
        classify(frame)

    def masked_corners(frame, mask, exclude: list[tuple[float, float]]):
        if config.mask_cleanup:
            mask = bg.majority_filter(mask)
        if exclude:
            mask = mask.copy()
            h, w = mask.shape
            r = config.redetect_exclusion
            for ex, ey in exclude:
                x0, x1 = max(0, int(ex - r)), min(w, int(ex + r) + 1)
                y0, y1 = max(0, int(ey - r)), min(h, int(ey + r) + 1)
                yy, xx = np.mgrid[y0:y1, x0:x1]
                inside = (xx - ex) ** 2 + (yy - ey) ** 2 <= r * r
                mask[y0:y1, x0:x1][inside] = 0
        return corners.detect_corners(
            bg.apply_mask(frame, mask),
            mask,
            max_corners=config.max_corners,
            quality_level=config.quality_level,
            min_distance=config.min_distance,
        )

    seed_frame = seq.frames[config.burn_in]
    mask = classify(seed_frame)
    next_id = 0
    live: list[_LiveTrack] = []
    for kp in masked_corners(seed_frame, mask, []):
        live.append(_LiveTrack(next_id, config.burn_in, kp.x, kp.y))
        next_id += 1

    finished: list[Track] = []
    prev_pyr = build_pyramid(seed_frame, config.pyr_levels)
    for t in range(config.burn_in + 1, len(seq)):
        frame = seq.frames[t]
        next_pyr = build_pyramid(frame, config.pyr_levels)
        mask = classify(frame)

        if live:
            pts = np.asarray([trk.points[-1] for trk in live])
            new_pos, passed, _, _ = flow.filter_points_fb(
                prev_pyr,
                next_pyr,
                pts,
                fb_threshold=config.fb_threshold,
                residual_threshold=config.residual_threshold,
                window=config.lk_window,
                max_iter=config.lk_iters,
                eps=config.lk_eps,
            )
            survivors: list[_LiveTrack] = []
            for trk, ok, pos in zip(live, passed, new_pos):
                if ok:
                    trk.points.append((float(pos[0]), float(pos[1])))
                    survivors.append(trk)
                else:
                    finished.append(trk.close(t - 1))
            live = survivors

        if len(live) < config.min_live:
            occupied = [trk.points[-1] for trk in live]
            for kp in masked_corners(frame, mask, occupied):
                live.append(_LiveTrack(next_id, t, kp.x, kp.y))
                next_id += 1

        prev_pyr = next_pyr

    last = len(seq) - 1
    finished.extend(trk.close(last) for trk in live)
    finished.sort(key=lambda trk: trk.keypoint_id)
    return [trk for trk in finished if trk.length >= config.min_track_len]


def interpolate_to_longest(tracks: list[Track]) -> list[Track]:
    """Stretch every track onto the longest track's sample count.

    Each axis is linearly resampled over a uniform parameterization of the
    track's own lifetime, so first and last values are preserved exactly.
    Length-1 tracks cannot be interpolated and are dropped with a warning.
    """
    usable = []
    for trk in tracks:
        if trk.length < 2:
            log.warning("dropping track %d: length 1 cannot be interpolated", trk.keypoint_id)
            continue
        usable.append(trk)
    if not usable:
        return []

    n = max(trk.length for trk in usable)
    out = []
    for trk in usable:
        if trk.length == n:
            out.append(trk)
            continue
        s_old = np.arange(trk.length, dtype=np.float64)
        s_new = np.linspace(0.0, trk.length - 1.0, n)
        stretched = np.stack(
            [np.interp(s_new, s_old, trk.xs), np.interp(s_new, s_old, trk.ys)], axis=1
        )
        out.append(
            Track(
                keypoint_id=trk.keypoint_id,
                birth_frame=trk.birth_frame,
                death_frame=trk.death_frame,
                positions=stretched,
            )
        )
    return out


def select_least_correlated(tracks: list[Track], k: int = DEFAULT_SELECT_K) -> list[Track]:
    """Keep the k tracks least correlated (mean absolute Pearson) with the rest.

    The x and y channels are correlated separately and averaged; a
    constant channel correlates 0 with everything by convention. Ties
    break by keypoint_id. With k or fewer tracks, all are returned.
    """
    if k < 1:
        raise ValueError(f"selection count must be >= 1, got {k}")
    if len(tracks) <= k:
        return sorted(tracks, key=lambda trk: trk.keypoint_id)

    def standardized(rows: np.ndarray) -> np.ndarray:
        mu = rows.mean(axis=1, keepdims=True)
        sd = rows.std(axis=1, keepdims=True)
        out = np.where(sd > 1e-12, (rows - mu) / np.maximum(sd, 1e-300), 0.0)
        return out / np.sqrt(rows.shape[1])

    zx = standardized(np.stack([trk.xs for trk in tracks]))
    zy = standardized(np.stack([trk.ys for trk in tracks]))
    corr = 0.5 * (np.abs(zx @ zx.T) + np.abs(zy @ zy.T))
    np.fill_diagonal(corr, 0.0)
    mean_abs = corr.sum(axis=1) / (len(tracks) - 1)

    order = sorted(range(len(tracks)), key=lambda i: (mean_abs[i], tracks[i].keypoint_id))
    chosen = sorted(order[:k], key=lambda i: tracks[i].keypoint_id)
    return [tracks[i] for i in chosen]


def emit_series(tracks: list[Track], seq: FrameSequence) -> list[SeriesRecord]:
    """Two series per track: its x stream and its y stream."""
    records = []
    tag = seq.object_tag or ""
    for trk in tracks:
        for axis, values in (("x", trk.xs), ("y", trk.ys)):
            records.append(
                SeriesRecord(
                    series_id=f"{seq.source_id}-kp{trk.keypoint_id}-{axis}",
                    source_id=seq.source_id,
                    object_tag=tag,
                    axis=axis,
                    values=values.copy(),
                )
            )
    return records


def extract_series(
    seq: FrameSequence, config: PipelineConfig | None = None
) -> tuple[list[SeriesRecord], list[Track]]:
    """Full pipeline for one sequence: track, stretch, select, emit."""
    config = config or PipelineConfig()
    tracks = run_extraction(seq, config)
    if not tracks:
        return [], []
    aligned = interpolate_to_longest(tracks)
    selected = select_least_correlated(aligned, config.select_k)
    return emit_series(selected, seq), selected

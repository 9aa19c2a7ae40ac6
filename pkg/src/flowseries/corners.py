"""Minimum-eigenvalue corner detection over a foreground mask.

A pixel's 2x2 structure matrix is the block-window sum of gradient outer
products; its smaller eigenvalue is large only where gradients are strong
in two directions. Candidates are masked pixels above a quality fraction
of the masked-region maximum, thinned greedily by minimum distance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .raster import GradientField, as_float_raster, box_sum, spatial_gradients

DEFAULT_MAX_CORNERS = 30
DEFAULT_QUALITY_LEVEL = 0.01
DEFAULT_MIN_DISTANCE = 10.0
DEFAULT_BLOCK_SIZE = 3


@dataclass(frozen=True)
class Keypoint:
    """A trackable corner: subpixel position plus its min-eigenvalue score."""

    x: float
    y: float
    score: float
    id: int


def min_eigenvalue_map(gradients: GradientField, block_size: int = DEFAULT_BLOCK_SIZE) -> np.ndarray:
    """Smaller eigenvalue of the structure matrix at every pixel.

    The structure matrix accumulates [ix^2, ix*iy; ix*iy, iy^2] over a
    block_size x block_size window (edges replicated). Eigenvalues come
    from the closed form for symmetric 2x2 matrices.
    """
    if block_size < 3 or block_size % 2 == 0:
        raise ParameterError(f"block size must be odd and >= 3, got {block_size}")
    radius = block_size // 2
    sxx = box_sum(gradients.ix * gradients.ix, radius)
    syy = box_sum(gradients.iy * gradients.iy, radius)
    sxy = box_sum(gradients.ix * gradients.iy, radius)
    half_trace = 0.5 * (sxx + syy)
    root = np.sqrt((0.5 * (sxx - syy)) ** 2 + sxy**2)
    return half_trace - root


def detect_corners(
    frame,
    mask: np.ndarray | None = None,
    max_corners: int = DEFAULT_MAX_CORNERS,
    quality_level: float = DEFAULT_QUALITY_LEVEL,
    min_distance: float = DEFAULT_MIN_DISTANCE,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> list[Keypoint]:
    """Pick up to max_corners well-separated strong corners inside the mask.

    Candidates are pixels with mask == 1 whose score reaches quality_level
    times the maximum score over the masked region. Selection is greedy in
    descending score with suppression of candidates closer than
    min_distance (Euclidean) to an accepted corner. Ties break by
    (score desc, y asc, x asc), so results are deterministic.
    """
    if not 0.0 < quality_level < 1.0:
        raise ParameterError(f"quality level must be in (0, 1), got {quality_level}")
    if max_corners < 1:
        raise ParameterError(f"max corners must be >= 1, got {max_corners}")

    raster = as_float_raster(frame)
    score_map = min_eigenvalue_map(spatial_gradients(raster), block_size)
    if mask is not None:
        if mask.shape != raster.shape:
            raise ParameterError(
                f"mask {mask.shape} does not match frame {raster.shape}"
            )
        score_map = np.where(mask > 0, score_map, -np.inf)

    peak = score_map.max() if score_map.size else 0.0
    if not np.isfinite(peak) or peak <= 0.0:
        return []
    threshold = quality_level * peak

    ys, xs = np.nonzero(score_map >= threshold)
    scores = score_map[ys, xs]
    order = np.lexsort((xs, ys, -scores))

    accepted_x: list[float] = []
    accepted_y: list[float] = []
    keypoints: list[Keypoint] = []
    min_d2 = min_distance * min_distance
    for idx in order:
        cx, cy = float(xs[idx]), float(ys[idx])
        if accepted_x:
            dx = np.asarray(accepted_x) - cx
            dy = np.asarray(accepted_y) - cy
            if np.min(dx * dx + dy * dy) < min_d2:
                continue
        keypoints.append(Keypoint(x=cx, y=cy, score=float(scores[idx]), id=len(keypoints)))
        accepted_x.append(cx)
        accepted_y.append(cy)
        if len(keypoints) >= max_corners:
            break
    return keypoints

"""Low-level raster operations: image pyramids, spatial gradients, and
subpixel bilinear sampling.

All operations work on float64 rasters indexed [row, column] = [y, x] and
replicate edges at borders, so they stay total on full rasters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundsError, DimensionMismatchError, ParameterError
from .frames import Frame

MIN_LEVEL_DIM = 8

# 5-tap Gaussian, sigma = 1, normalized to unit sum.
_GAUSS5 = np.exp(-0.5 * np.arange(-2.0, 3.0) ** 2)
_GAUSS5 /= _GAUSS5.sum()

# Scharr derivative: smoothing [3, 10, 3]/16 across, difference [-1, 0, 1]/2 along.
# The /2 calibrates a unit-slope ramp to gradient exactly 1.0.
_SCHARR_SMOOTH = np.array([3.0, 10.0, 3.0]) / 16.0
_SCHARR_DIFF = np.array([-0.5, 0.0, 0.5])


@dataclass
class ImagePyramid:
    """Coarse-to-fine stack of float rasters; level 0 is full resolution.

    Each level halves the previous one (floor division). Levels smaller
    than 8x8 are never produced, so level_count may be below the requested
    depth.
    """

    levels: list[np.ndarray]
    scale_factor: int = 2

    @property
    def level_count(self) -> int:
        return len(self.levels)

    @property
    def width(self) -> int:
        return self.levels[0].shape[1]

    @property
    def height(self) -> int:
        return self.levels[0].shape[0]

    def gradients(self, level: int) -> "GradientField":
        """Per-level spatial gradients, computed once and memoized."""
        cache = self.__dict__.setdefault("_gradient_cache", {})
        if level not in cache:
            cache[level] = spatial_gradients(self.levels[level])
        return cache[level]


@dataclass
class GradientField:
    """Per-pixel horizontal (ix) and vertical (iy) derivatives of a raster."""

    ix: np.ndarray
    iy: np.ndarray


def _correlate1d(raster: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    """Correlate along one axis with edge replication. Kernel length must be odd."""
    radius = len(kernel) // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (radius, radius)
    padded = np.pad(raster, pad, mode="edge")
    out = np.zeros_like(raster, dtype=np.float64)
    for t, k in enumerate(kernel):
        if k == 0.0:
            continue
        if axis == 0:
            out += k * padded[t : t + raster.shape[0], :]
        else:
            out += k * padded[:, t : t + raster.shape[1]]
    return out


def gaussian_smooth(raster: np.ndarray) -> np.ndarray:
    """Separable 5x5 Gaussian (sigma 1) with replicated edges."""
    raster = np.asarray(raster, dtype=np.float64)
    return _correlate1d(_correlate1d(raster, _GAUSS5, axis=0), _GAUSS5, axis=1)


def as_float_raster(frame) -> np.ndarray:
    """Accept a Frame or an array and return a float64 raster."""
    if isinstance(frame, Frame):
        return frame.data.astype(np.float64)
    return np.asarray(frame, dtype=np.float64)


def build_pyramid(frame, depth: int) -> ImagePyramid:
    """Build a dyadic image pyramid of at most `depth` levels.

    Each level is the previous one smoothed with the 5x5 Gaussian and
    decimated by 2 (even rows/columns, truncated to floor(dim/2)). The
    pyramid stops early rather than producing a level below 8x8.
    """
    if depth < 1:
        raise ParameterError(f"pyramid depth must be >= 1, got {depth}")
    base = as_float_raster(frame)
    if base.shape[0] < MIN_LEVEL_DIM or base.shape[1] < MIN_LEVEL_DIM:
        raise DimensionMismatchError(
            f"frame {base.shape[1]}x{base.shape[0]} is below the {MIN_LEVEL_DIM}x{MIN_LEVEL_DIM} minimum"
        )

    levels = [base]
    while len(levels) < depth:
        prev = levels[-1]
        h2, w2 = prev.shape[0] // 2, prev.shape[1] // 2
        if h2 < MIN_LEVEL_DIM or w2 < MIN_LEVEL_DIM:
            break
        smoothed = gaussian_smooth(prev)
        levels.append(smoothed[0 : 2 * h2 : 2, 0 : 2 * w2 : 2].copy())
    return ImagePyramid(levels=levels)


def spatial_gradients(raster: np.ndarray) -> GradientField:
    """Scharr 3x3 derivatives, calibrated so a unit-slope ramp yields 1.0.

    Border pixels use replicated edges; a constant raster maps to an
    identically zero field.
    """
    raster = np.asarray(raster, dtype=np.float64)
    if raster.shape[0] < 3 or raster.shape[1] < 3:
        raise DimensionMismatchError(
            f"raster {raster.shape[1]}x{raster.shape[0]} too small for 3x3 gradients"
        )
    ix = _correlate1d(_correlate1d(raster, _SCHARR_SMOOTH, axis=0), _SCHARR_DIFF, axis=1)
    iy = _correlate1d(_correlate1d(raster, _SCHARR_SMOOTH, axis=1), _SCHARR_DIFF, axis=0)
    return GradientField(ix=ix, iy=iy)


def sample_bilinear(raster: np.ndarray, x: float, y: float) -> float:
    """Bilinear interpolation of the four pixels around (x, y).

    Coordinates must satisfy 0 <= x <= width-1 and 0 <= y <= height-1;
    callers clamp windows before sampling.
    """
    raster = np.asarray(raster, dtype=np.float64)
    h, w = raster.shape
    if not (0.0 <= x <= w - 1 and 0.0 <= y <= h - 1):
        raise BoundsError(f"sample point ({x}, {y}) outside raster {w}x{h}")
    return float(sample_bilinear_many(raster, np.asarray([x]), np.asarray([y]))[0])


def sample_bilinear_many(raster: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorized bilinear sampling; coordinates are clamped to the raster.

    Clamping realizes the replicated-edge border policy for callers that
    sample whole windows near the image boundary.
    """
    h, w = raster.shape
    if h < 2 or w < 2:
        raise DimensionMismatchError("bilinear sampling needs a raster of at least 2x2")
    xs = np.clip(np.asarray(xs, dtype=np.float64), 0.0, w - 1.0)
    ys = np.clip(np.asarray(ys, dtype=np.float64), 0.0, h - 1.0)
    x0 = np.minimum(xs.astype(np.int64), w - 2)
    y0 = np.minimum(ys.astype(np.int64), h - 2)
    dx = xs - x0
    dy = ys - y0
    top = raster[y0, x0] * (1.0 - dx) + raster[y0, x0 + 1] * dx
    bot = raster[y0 + 1, x0] * (1.0 - dx) + raster[y0 + 1, x0 + 1] * dx
    return top * (1.0 - dy) + bot * dy


def box_sum(raster: np.ndarray, radius: int) -> np.ndarray:
    """Sum over the (2*radius+1)^2 window at each pixel, edges replicated."""
    raster = np.asarray(raster, dtype=np.float64)
    padded = np.pad(raster, radius, mode="edge")
    # Integral image; window sums via four corner lookups.
    integral = np.zeros((padded.shape[0] + 1, padded.shape[1] + 1), dtype=np.float64)
    np.cumsum(np.cumsum(padded, axis=0), axis=1, out=integral[1:, 1:])
    size = 2 * radius + 1
    h, w = raster.shape
    return (
        integral[size : size + h, size : size + w]
        - integral[0:h, size : size + w]
        - integral[size : size + h, 0:w]
        + integral[0:h, 0:w]
    )

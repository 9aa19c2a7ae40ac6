"""Pyramidal Lucas-Kanade point tracking with forward-backward filtering.

Displacement of a point between two frames is the least-squares solution
of the windowed normal equations G d = b, where G sums gradient outer
products of the previous frame over the window and b pairs the temporal
difference with those gradients. The solve iterates at each pyramid level
from coarse to fine, sampling the next frame bilinearly at the warped
window. A track is trusted only if tracking the result backwards lands
near the starting point and both directions leave a small residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .raster import ImagePyramid, sample_bilinear_many

DEFAULT_WINDOW = 40
DEFAULT_MAX_ITER = 30
DEFAULT_EPS = 0.01
DEFAULT_FB_THRESHOLD = 50.0
DEFAULT_RESIDUAL_THRESHOLD = 80.0
DEFAULT_PYRAMID_DEPTH = 3

# Normal equations count as solvable while the window-area-normalized
# minimum eigenvalue of G stays above this.
MIN_EIGEN_CUTOFF = 1e-4

STATUS_TRACKED = "tracked"
STATUS_LOST = "lost"


@dataclass
class FlowResult:
    """Outcome of tracking one point between two frames."""

    new_position: tuple[float, float]
    status: str
    residual: float
    iterations_used: int

    @property
    def tracked(self) -> bool:
        return self.status == STATUS_TRACKED


@dataclass
class FbCheckResult:
    """Forward-backward consistency verdict for one point."""

    e_fb: float
    passed: bool


def _window_radius(window: int) -> int:
    if window < 3:
        raise ParameterError(f"tracking window must be >= 3 pixels, got {window}")
    # An even size like 40 becomes a symmetric 41x41 grid around the point.
    return window // 2


def track_points(
    prev: ImagePyramid,
    next: ImagePyramid,
    points: np.ndarray,
    window: int = DEFAULT_WINDOW,
    max_iter: int = DEFAULT_MAX_ITER,
    eps: float = DEFAULT_EPS,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Track N points at once; the batched core behind track_point.

    Returns (positions (N, 2), tracked (N,), residuals (N,), iterations (N,)).
    Lost points report their last estimate and residual +inf.
    """
    if prev.level_count != next.level_count or prev.levels[0].shape != next.levels[0].shape:
        raise ParameterError("pyramids must share geometry")
    if max_iter < 1:
        raise ParameterError(f"max iterations must be >= 1, got {max_iter}")
    if eps <= 0.0:
        raise ParameterError(f"convergence threshold must be > 0, got {eps}")

    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n = points.shape[0]
    radius = _window_radius(window)
    span = np.arange(-radius, radius + 1, dtype=np.float64)
    off_x = np.tile(span, 2 * radius + 1)[None, :]
    off_y = np.repeat(span, 2 * radius + 1)[None, :]
    area = float(off_x.size)

    alive = np.ones(n, dtype=bool)
    residual = np.full(n, np.inf)
    iterations = np.zeros(n, dtype=np.int64)
    disp = np.zeros((n, 2))  # displacement in current-level pixel units

    # A level narrower than the sampling grid is all border replication and
    # aliasing; start at the highest level the window actually fits.
    grid_size = 2 * radius + 1
    top = 0
    for level in range(prev.level_count - 1, -1, -1):
        if min(prev.levels[level].shape) >= grid_size:
            top = level
            break

    for level in range(top, -1, -1):
        raster_prev = prev.levels[level]
        raster_next = next.levels[level]
        h, w = raster_prev.shape
        grads = prev.gradients(level)

        base = points / float(2**level)
        gx = base[:, 0:1] + off_x
        gy = base[:, 1:2] + off_y
        template = sample_bilinear_many(raster_prev, gx, gy)
        ix = sample_bilinear_many(grads.ix, gx, gy)
        iy = sample_bilinear_many(grads.iy, gx, gy)

        gxx = np.sum(ix * ix, axis=1)
        gxy = np.sum(ix * iy, axis=1)
        gyy = np.sum(iy * iy, axis=1)
        det = gxx * gyy - gxy * gxy
        half_trace = 0.5 * (gxx + gyy)
        lam_min = half_trace - np.sqrt(np.maximum(half_trace**2 - det, 0.0))
        alive &= lam_min / area >= MIN_EIGEN_CUTOFF

        converged = np.zeros(n, dtype=bool)
        for _ in range(max_iter):
            act = np.nonzero(alive & ~converged)[0]
            if act.size == 0:
                break
            wx = gx[act] + disp[act, 0:1]
            wy = gy[act] + disp[act, 1:2]
            diff = template[act] - sample_bilinear_many(raster_next, wx, wy)
            bx = np.sum(diff * ix[act], axis=1)
            by = np.sum(diff * iy[act], axis=1)
            step_x = (gyy[act] * bx - gxy[act] * by) / det[act]
            step_y = (gxx[act] * by - gxy[act] * bx) / det[act]
            disp[act, 0] += step_x
            disp[act, 1] += step_y
            iterations[act] += 1

            pos_x = base[act, 0] + disp[act, 0]
            pos_y = base[act, 1] + disp[act, 1]
            inside = (
                np.isfinite(pos_x)
                & np.isfinite(pos_y)
                & (pos_x >= 0.0)
                & (pos_x <= w - 1.0)
                & (pos_y >= 0.0)
                & (pos_y <= h - 1.0)
            )
            alive[act[~inside]] = False
            converged[act[inside & (np.hypot(step_x, step_y) < eps)]] = True

        if level == 0:
            live = np.nonzero(alive)[0]
            if live.size:
                wx = gx[live] + disp[live, 0:1]
                wy = gy[live] + disp[live, 1:2]
                final = sample_bilinear_many(raster_next, wx, wy)
                residual[live] = np.mean(np.abs(template[live] - final), axis=1)
        else:
            disp *= 2.0  # carry the estimate to the next finer level

    return points + disp, alive, residual, iterations


def track_point_lk(
    prev: ImagePyramid,
    next: ImagePyramid,
    point,
    window: int = DEFAULT_WINDOW,
    max_iter: int = DEFAULT_MAX_ITER,
    eps: float = DEFAULT_EPS,
) -> FlowResult:
    """Track a single point from the previous to the next frame."""
    positions, tracked, residuals, iterations = track_points(
        prev, next, [_point_xy(point)], window=window, max_iter=max_iter, eps=eps
    )
    return FlowResult(
        new_position=(float(positions[0, 0]), float(positions[0, 1])),
        status=STATUS_TRACKED if tracked[0] else STATUS_LOST,
        residual=float(residuals[0]),
        iterations_used=int(iterations[0]),
    )


def forward_backward_error(p0, p_roundtrip) -> float:
    """Euclidean distance between a point and its forward-then-backward image."""
    x0, y0 = _point_xy(p0)
    x1, y1 = _point_xy(p_roundtrip)
    return math.hypot(x0 - x1, y0 - y1)


def filter_points_fb(
    prev: ImagePyramid,
    next: ImagePyramid,
    points: np.ndarray,
    fb_threshold: float = DEFAULT_FB_THRESHOLD,
    residual_threshold: float = DEFAULT_RESIDUAL_THRESHOLD,
    window: int = DEFAULT_WINDOW,
    max_iter: int = DEFAULT_MAX_ITER,
    eps: float = DEFAULT_EPS,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Batched forward-backward check over N points.

    Returns (forward positions (N, 2), passed (N,), e_fb (N,), forward
    residuals (N,)). e_fb is +inf wherever either direction was lost.
    """
    if fb_threshold <= 0.0 or residual_threshold <= 0.0:
        raise ParameterError("forward-backward and residual thresholds must be > 0")
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    fwd_pos, fwd_ok, fwd_res, _ = track_points(
        prev, next, points, window=window, max_iter=max_iter, eps=eps
    )
    bwd_pos, bwd_ok, bwd_res, _ = track_points(
        next, prev, fwd_pos, window=window, max_iter=max_iter, eps=eps
    )
    e_fb = np.where(
        fwd_ok & bwd_ok,
        np.hypot(points[:, 0] - bwd_pos[:, 0], points[:, 1] - bwd_pos[:, 1]),
        np.inf,
    )
    passed = (
        fwd_ok
        & bwd_ok
        & (e_fb < fb_threshold)
        & (fwd_res < residual_threshold)
        & (bwd_res < residual_threshold)
    )
    return fwd_pos, passed, e_fb, fwd_res


def fb_filter(
    prev: ImagePyramid,
    next: ImagePyramid,
    point,
    fb_threshold: float = DEFAULT_FB_THRESHOLD,
    residual_threshold: float = DEFAULT_RESIDUAL_THRESHOLD,
    window: int = DEFAULT_WINDOW,
    max_iter: int = DEFAULT_MAX_ITER,
    eps: float = DEFAULT_EPS,
) -> tuple[FbCheckResult, FlowResult]:
    """Forward-backward check for a single point.

    The point passes when both directions track, the round trip returns
    within fb_threshold of the start, and both residuals stay below
    residual_threshold.
    """
    if fb_threshold <= 0.0 or residual_threshold <= 0.0:
        raise ParameterError("forward-backward and residual thresholds must be > 0")
    forward = track_point_lk(prev, next, point, window=window, max_iter=max_iter, eps=eps)
    if not forward.tracked:
        return FbCheckResult(e_fb=math.inf, passed=False), forward
    backward = track_point_lk(
        next, prev, forward.new_position, window=window, max_iter=max_iter, eps=eps
    )
    e_fb = forward_backward_error(_point_xy(point), backward.new_position)
    passed = (
        backward.tracked
        and e_fb < fb_threshold
        and forward.residual < residual_threshold
        and backward.residual < residual_threshold
    )
    return FbCheckResult(e_fb=e_fb, passed=passed), forward


def _point_xy(point) -> tuple[float, float]:
    if hasattr(point, "x") and hasattr(point, "y"):
        return float(point.x), float(point.y)
    x, y = point
    return float(x), float(y)

"""Per-pixel Gaussian mixture background model and foreground masking.

Each pixel keeps up to K weighted Gaussians over intensity. An incoming
pixel matches the first component (in weight/sigma order) within 2.5
sigma; matched components are reinforced, unmatched observations spawn a
new component. A pixel is background when its matched component falls in
the smallest weight-ordered prefix whose cumulative weight exceeds the
background threshold.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError, ParameterError
from .frames import Frame
from .raster import box_sum

K_MAX = 5
T_BG = 0.9
MATCH_SIGMAS = 2.5
VAR_INIT = 15.0**2
VAR_MIN = 4.0
DEFAULT_ALPHA = 0.005


class MixtureBackground:
    """Mixture-of-Gaussians background model for one frame geometry.

    Frames must arrive in temporal order; the model is a recurrence over
    the sequence. Pixels are independent of each other.
    """

    def __init__(
        self,
        height: int,
        width: int,
        alpha: float = DEFAULT_ALPHA,
        t_bg: float = T_BG,
        k_max: int = K_MAX,
    ):
        if not 0.0 < alpha < 1.0:
            raise ParameterError(f"learning rate must be in (0, 1), got {alpha}")
        if not 0.0 < t_bg < 1.0:
            raise ParameterError(f"background weight threshold must be in (0, 1), got {t_bg}")
        self.height = height
        self.width = width
        self.alpha = alpha
        self.t_bg = t_bg
        self.k_max = k_max
        shape = (height, width, k_max)
        self.weights = np.zeros(shape)
        self.means = np.zeros(shape)
        self.variances = np.full(shape, VAR_INIT)
        self.counts = np.zeros((height, width), dtype=np.int64)

    def update_and_classify(self, frame, alpha: float | None = None) -> np.ndarray:
        """Advance the model by one frame and return its foreground mask.

        The mask is uint8 with 1 = foreground. Classification happens
        against the pre-update mixture; the first observation of a pixel
        seeds a full-weight component and is classified background.
        """
        alpha = self.alpha if alpha is None else alpha
        if not 0.0 < alpha < 1.0:
            raise ParameterError(f"learning rate must be in (0, 1), got {alpha}")
        x = frame.data.astype(np.float64) if isinstance(frame, Frame) else np.asarray(
            frame, dtype=np.float64
        )
        if x.shape != (self.height, self.width):
            raise DimensionMismatchError(
                f"frame {x.shape[1]}x{x.shape[0]} does not match model "
                f"{self.width}x{self.height}"
            )

        w, mu, var = self.weights, self.means, self.variances
        active = np.arange(self.k_max) < self.counts[..., None]
        fresh = self.counts == 0

        # Match: first active component (weight/sigma order) within 2.5 sigma.
        dev = x[..., None] - mu
        matches = active & (np.abs(dev) <= MATCH_SIGMAS * np.sqrt(var))
        matched = matches.any(axis=2)
        first = np.argmax(matches, axis=2)
        one_hot = matches & (np.arange(self.k_max) == first[..., None])

        # Background prefix from pre-update weights: smallest prefix whose
        # cumulative weight exceeds t_bg.
        cum = np.cumsum(w, axis=2)
        prefix_end = np.argmax(cum > self.t_bg, axis=2)
        background = (matched & (first <= prefix_end)) | fresh

        # Matched pixels: reinforce the matched component, decay the rest.
        upd = matched[..., None]
        w_next = np.where(upd, (1.0 - alpha) * w + alpha * one_hot, w)
        rho = np.where(one_hot & (w_next > 0.0), alpha / np.maximum(w_next, 1e-12), 0.0)
        mu_next = mu + rho * dev
        var_next = var + rho * (dev**2 - var)

        # Unmatched pixels: add a component, or replace the lowest-weight
        # one when the mixture is full.
        unmatched = ~matched & ~fresh
        full = unmatched & (self.counts == self.k_max)
        growing = unmatched & (self.counts < self.k_max)
        slot = np.where(full, np.argmin(np.where(active, w, np.inf), axis=2), self.counts)
        slot = np.minimum(slot, self.k_max - 1)
        replace = (np.arange(self.k_max) == slot[..., None]) & unmatched[..., None]
        w_next = np.where(replace, alpha, w_next)
        mu_next = np.where(replace, x[..., None], mu_next)
        var_next = np.where(replace, VAR_INIT, var_next)

        # First observation seeds one full-weight component.
        seed = fresh[..., None] & (np.arange(self.k_max) == 0)
        w_next = np.where(seed, 1.0, w_next)
        mu_next = np.where(seed, x[..., None], mu_next)
        var_next = np.where(seed, VAR_INIT, var_next)

        counts_next = self.counts + growing + fresh

        var_next = np.maximum(var_next, VAR_MIN)
        active_next = np.arange(self.k_max) < counts_next[..., None]
        w_next = np.where(active_next, w_next, 0.0)
        total = w_next.sum(axis=2, keepdims=True)
        w_next = np.where(total > 0.0, w_next / np.maximum(total, 1e-300), w_next)

        # Keep components ordered by weight/sigma, inactive slots last.
        key = np.where(active_next, w_next / np.sqrt(var_next), -np.inf)
        order = np.argsort(-key, axis=2, kind="stable")
        self.weights = np.take_along_axis(w_next, order, axis=2)
        self.means = np.take_along_axis(mu_next, order, axis=2)
        self.variances = np.take_along_axis(var_next, order, axis=2)
        self.counts = counts_next

        return (~background).astype(np.uint8)


def apply_mask(frame, mask: np.ndarray):
    """Zero out background pixels; foreground pixels pass through."""
    data = frame.data if isinstance(frame, Frame) else np.asarray(frame)
    if mask.shape != data.shape:
        raise DimensionMismatchError(
            f"mask {mask.shape} does not match frame {data.shape}"
        )
    masked = np.where(mask > 0, data, 0).astype(data.dtype)
    if isinstance(frame, Frame):
        return Frame(data=masked, index=frame.index)
    return masked


def majority_filter(mask: np.ndarray) -> np.ndarray:
    """3x3 majority vote over a binary mask (replicated edges)."""
    votes = box_sum(mask.astype(np.float64), 1)
    return (votes >= 5.0).astype(np.uint8)

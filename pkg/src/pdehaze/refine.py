"""Guided-filter refinement of the raw transmission map.

The block-shaped transmission estimate that falls out of the patchwise
dark channel gets snapped back onto real image edges by a guided filter:
a local linear model of the target on the guide, averaged over sliding
windows.  Window statistics use border-truncated boxes (normalized by the
actual window area), which keeps constants exactly constant at the edges.
"""

from __future__ import annotations

import numpy as np

from .image import validate_field, validate_image

__all__ = ["box_mean", "guided_filter", "refine_transmission"]

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def box_mean(field, radius: int) -> np.ndarray:
    """Mean over (2r+1)-sided square windows, truncated at the borders."""
    f = validate_field(field)
    if radius < 1:
        raise ValueError("radius must be >= 1")
    h, w = f.shape
    integral = np.zeros((h + 1, w + 1))
    integral[1:, 1:] = f.cumsum(axis=0).cumsum(axis=1)
    lo_r = np.maximum(np.arange(h) - radius, 0)
    hi_r = np.minimum(np.arange(h) + radius, h - 1) + 1
    lo_c = np.maximum(np.arange(w) - radius, 0)
    hi_c = np.minimum(np.arange(w) + radius, w - 1) + 1
    sums = (
        integral[np.ix_(hi_r, hi_c)]
        - integral[np.ix_(lo_r, hi_c)]
        - integral[np.ix_(hi_r, lo_c)]
        + integral[np.ix_(lo_r, lo_c)]
    )
    counts = (hi_r - lo_r)[:, np.newaxis] * (hi_c - lo_c)[np.newaxis, :]
    return sums / counts


def guided_filter(guide, target, radius: int, reg: float) -> np.ndarray:
    """Classic guided filter.

    Per window: a = cov(guide, target) / (var(guide) + reg) and
    b = mean(target) - a * mean(guide); the output blends the per-window
    models, mean(a) * guide + mean(b).
    """
    g = validate_field(guide)
    p = validate_field(target)
    if g.shape != p.shape:
        raise ValueError(f"guide shape {g.shape} != target shape {p.shape}")
    if reg <= 0.0:
        raise ValueError("reg must be > 0")
    mean_g = box_mean(g, radius)
    mean_p = box_mean(p, radius)
    var_g = box_mean(g * g, radius) - mean_g * mean_g
    cov_gp = box_mean(g * p, radius) - mean_g * mean_p
    a = cov_gp / (var_g + reg)
    b = mean_p - a * mean_g
    return box_mean(a, radius) * g + box_mean(b, radius)


def refine_transmission(image, t_raw, radius: int = 30, reg: float = 1e-3) -> np.ndarray:
    """Refine a raw transmission map against the image's luminance.

    The guide is the grayscale luminance (identity for single-channel
    input); the filtered map is clamped to the physical range [0, 1].
    """
    img = validate_image(image)
    t = validate_field(t_raw)
    if t.shape != img.shape[:2]:
        raise ValueError(f"transmission shape {t.shape} != image shape {img.shape[:2]}")
    if img.shape[2] == 1:
        guide = img[:, :, 0]
    else:
        r, g, b = LUMA_WEIGHTS
        guide = r * img[:, :, 0] + g * img[:, :, 1] + b * img[:, :, 2]
    return np.clip(guided_filter(guide, t, radius, reg), 0.0, 1.0)

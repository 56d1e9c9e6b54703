"""Physical haze model: dark channel, airlight, transmission, inversion.

The observed image is modeled as a convex blend of scene radiance and
airlight, ``I = J * t + A * (1 - t)``.  This module estimates the pieces
of that model from a hazy image (dark channel -> airlight -> transmission)
and provides the floored inversion used both as a standalone restorer and
as the data term of the diffusion solve.  An airlight is an array of one
value per channel, shape (C,); a transmission map is an (H, W) field.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from .image import validate_field, validate_image

__all__ = [
    "dark_channel",
    "estimate_atmospheric_light",
    "estimate_transmission",
    "multiscale_dark_channel",
    "reconstruct",
    "synthesize_haze",
]


def _validate_airlight(airlight, channels: int) -> np.ndarray:
    arr = np.asarray(airlight, dtype=np.float64)
    if arr.shape != (channels,):
        raise ValueError(f"airlight must have shape ({channels},), got {arr.shape}")
    if np.any(arr <= 0.0):
        raise ValueError("airlight components must be strictly positive")
    if np.any(arr > 1.0) or not np.all(np.isfinite(arr)):
        raise ValueError("airlight components must lie in (0, 1]")
    return arr


def _validate_unit_image(image) -> np.ndarray:
    arr = validate_image(image)
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("image values must lie in [0, 1]")
    return arr


def dark_channel(image, airlight, patch_radius: int) -> np.ndarray:
    """Airlight-normalized dark channel.

    Each output pixel is the minimum of I_c(y) / A_c over all channels c
    and all y in the (2r+1) x (2r+1) square patch centered on the pixel,
    truncated at the image borders.  The result is capped at 1 so pixels
    brighter than the airlight cannot push the transmission negative.
    """
    img = _validate_unit_image(image)
    a = _validate_airlight(airlight, img.shape[2])
    if patch_radius < 0:
        raise ValueError("patch_radius must be >= 0")
    per_pixel_min = np.min(img / a, axis=2)
    size = 2 * int(patch_radius) + 1
    # 'nearest' replicates edge samples, which for a running minimum is
    # exactly the border-truncated patch minimum.
    dark = ndimage.minimum_filter(per_pixel_min, size=size, mode="nearest")
    return np.minimum(dark, 1.0)


def multiscale_dark_channel(image, airlight, radii, weights=None) -> np.ndarray:
    """Convex combination of dark channels at several patch radii."""
    radii = [int(r) for r in radii]
    if not radii:
        raise ValueError("radii must be nonempty")
    if weights is None:
        weights = [1.0 / len(radii)] * len(radii)
    weights = [float(w) for w in weights]
    if len(weights) != len(radii):
        raise ValueError(f"{len(radii)} radii but {len(weights)} weights")
    if any(w < 0.0 for w in weights):
        raise ValueError("weights must be nonnegative")
    if abs(sum(weights) - 1.0) > 1e-9:
        raise ValueError(f"weights must sum to 1, got {sum(weights)}")
    combined = weights[0] * dark_channel(image, airlight, radii[0])
    for radius, weight in zip(radii[1:], weights[1:]):
        combined += weight * dark_channel(image, airlight, radius)
    return combined


def estimate_atmospheric_light(image, dark, fraction: float = 0.001) -> np.ndarray:
    """Airlight from the brightest dark-channel pixels.

    Picks the ceil(fraction * H * W) pixels with the largest dark-channel
    value (the haziest ones; `dark` should come from an unnormalized pass
    with airlight 1) and averages the input image over them, per channel.
    Components are clamped to [0.05, 1] so downstream divisions stay safe.
    """
    img = _validate_unit_image(image)
    dark = validate_field(dark)
    if dark.shape != img.shape[:2]:
        raise ValueError(f"dark channel shape {dark.shape} != image shape {img.shape[:2]}")
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    count = math.ceil(fraction * dark.size)
    # Stable sort on the negated values: ties resolve to the lowest flat
    # index, keeping the estimate independent of any parallel schedule.
    order = np.argsort(-dark.ravel(), kind="stable")[:count]
    picked = img.reshape(-1, img.shape[2])[order]
    return np.clip(picked.mean(axis=0), 0.05, 1.0)


def estimate_transmission(dark, omega: float = 0.95) -> np.ndarray:
    """Transmission map t = 1 - omega * dark, with values in [1-omega, 1].

    omega < 1 deliberately leaves a trace of haze so the restored scene
    keeps its depth cue.
    """
    dark = validate_field(dark)
    if not 0.0 < omega <= 1.0:
        raise ValueError("omega must lie in (0, 1]")
    if dark.min() < 0.0 or dark.max() > 1.0:
        raise ValueError("dark channel values must lie in [0, 1]")
    return 1.0 - omega * dark


def reconstruct(image, transmission, airlight, t_floor: float = 0.1) -> np.ndarray:
    """Invert the scattering model: (I - A(1-t)) / max(t, t_floor).

    Applied per channel with the shared transmission map.  The output is
    intentionally NOT clamped; it doubles as the data term of the PDE,
    where out-of-range values are legitimate.
    """
    img = validate_image(image)
    t = validate_field(transmission)
    if t.shape != img.shape[:2]:
        raise ValueError(f"transmission shape {t.shape} != image shape {img.shape[:2]}")
    a = _validate_airlight(airlight, img.shape[2])
    if t_floor <= 0.0:
        raise ValueError("t_floor must be > 0")
    denom = np.maximum(t, t_floor)[:, :, np.newaxis]
    return (img - a * (1.0 - t)[:, :, np.newaxis]) / denom


def synthesize_haze(clean, transmission, airlight) -> np.ndarray:
    """Forward haze model J*t + A*(1-t); exact inverse of `reconstruct`
    wherever t >= t_floor, which makes it the test oracle for the whole
    estimation chain."""
    img = _validate_unit_image(clean)
    t = validate_field(transmission)
    if t.shape != img.shape[:2]:
        raise ValueError(f"transmission shape {t.shape} != image shape {img.shape[:2]}")
    if t.min() < 0.0 or t.max() > 1.0:
        raise ValueError("transmission values must lie in [0, 1]")
    a = _validate_airlight(airlight, img.shape[2])
    t3 = t[:, :, np.newaxis]
    return img * t3 + a * (1.0 - t3)

"""Full-reference fidelity metrics for synthetic-haze round trips."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["MetricReport", "compare"]


@dataclass(frozen=True)
class MetricReport:
    mse: float
    psnr: float  # dB; math.inf for identical images
    mae: float


def compare(a, b) -> MetricReport:
    """MSE / PSNR / MAE between two same-shaped images in [0, 1].

    PSNR is 10 * log10(1 / mse) against the unit signal peak, infinite
    exactly when mse is zero.
    """
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    for name, arr in (("first", x), ("second", y)):
        if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError(f"{name} image must have finite values in [0, 1]")
    diff = x - y
    mse = float(np.mean(diff * diff))
    mae = float(np.mean(np.abs(diff)))
    psnr = math.inf if mse == 0.0 else 10.0 * math.log10(1.0 / mse)
    return MetricReport(mse=mse, psnr=psnr, mae=mae)

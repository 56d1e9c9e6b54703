"""Shared fixtures: synthetic scenes, Netpbm byte builders, solver regimes."""

import numpy as np
import pytest

from pdehaze import SolverConfig, gaussian_convolve

# Largest step that provably converges for ANY input at the default
# stabilizer: max D <= 1/epsilon, the Laplacian stencil is bounded by 8,
# and the smoothing operator by 1, so 2 / (8/eps + lambda0) lower-bounds
# the per-image stability threshold.  0.9 keeps a margin.
TAU_STABLE = 0.9 * 2.0 / (8.0 / 1e-3 + 0.5)


def stable_config(**overrides) -> SolverConfig:
    """Defaults except for a relaxation step inside the stability bound."""
    overrides.setdefault("tau", TAU_STABLE)
    return SolverConfig(**overrides)


def make_scene(seed: int, size: int = 64) -> np.ndarray:
    """Deterministic synthetic clean scene.

    Smooth color gradients with a bright block (an airlight beacon, like a
    light sky patch) and a grid of black dots so every small patch
    contains a dark sample -- the geometry the dark-channel estimator
    assumes.
    """
    rng = np.random.default_rng(seed)
    base = rng.random((size, size, 3))
    for c in range(3):
        base[:, :, c] = gaussian_convolve(base[:, :, c], 6.0, 25)
    lo, hi = base.min(), base.max()
    base = 0.15 + 0.7 * (base - lo) / (hi - lo)
    r0, c0 = rng.integers(4, size - 24, 2)
    base[r0 : r0 + 20, c0 : c0 + 20, :] = 0.93 + 0.04 * rng.random(3)
    for r in range(2, size, 6):
        for c in range(2, size, 6):
            if not (r0 <= r < r0 + 20 and c0 <= c < c0 + 20):
                base[r, c, :] = 0.0
    return np.clip(base, 0.0, 1.0)


def p5_bytes(width: int, height: int, payload: bytes, header_extra: str = "") -> bytes:
    return f"P5\n{header_extra}{width} {height}\n255\n".encode() + payload


def p6_bytes(width: int, height: int, payload: bytes, header_extra: str = "") -> bytes:
    return f"P6\n{header_extra}{width} {height}\n255\n".encode() + payload


@pytest.fixture
def rng():
    return np.random.default_rng(42)

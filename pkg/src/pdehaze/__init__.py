"""Single-image dehazing built on the atmospheric scattering model.

The pipeline estimates a transmission map from the dark channel, refines
it with a guided filter, inverts the scattering model, and polishes the
result with an edge-preserving diffusion solve under nonlocal Gaussian
regularization.  See `dehaze` for the one-call entry point; the pieces
are exposed individually for experimentation.
"""

from .image import NetpbmError, clamp01, load_image, save_image
from .metrics import MetricReport, compare
from .refine import box_mean, guided_filter, refine_transmission
from .scattering import (
    dark_channel,
    estimate_atmospheric_light,
    estimate_transmission,
    multiscale_dark_channel,
    reconstruct,
    synthesize_haze,
)
from .solver import (
    ABLATIONS,
    DehazeResult,
    SolverConfig,
    SolverTrace,
    adaptive_lambda,
    dehaze,
    diffusion_coefficient,
    divergence_term,
    fixed_point_solve,
    fixed_point_step,
    gaussian_convolve,
    gaussian_kernel,
    tau_stability_bound,
    write_trace_csv,
)

__version__ = "0.1.0"

__all__ = [
    "ABLATIONS",
    "DehazeResult",
    "MetricReport",
    "NetpbmError",
    "SolverConfig",
    "SolverTrace",
    "adaptive_lambda",
    "box_mean",
    "clamp01",
    "compare",
    "dark_channel",
    "dehaze",
    "diffusion_coefficient",
    "divergence_term",
    "estimate_atmospheric_light",
    "estimate_transmission",
    "fixed_point_solve",
    "fixed_point_step",
    "gaussian_convolve",
    "gaussian_kernel",
    "guided_filter",
    "load_image",
    "multiscale_dark_channel",
    "reconstruct",
    "refine_transmission",
    "save_image",
    "synthesize_haze",
    "tau_stability_bound",
    "write_trace_csv",
]

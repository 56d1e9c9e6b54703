"""Batch command line: dehaze images, synthesize haze, evaluate pairs.

Three subcommands with disjoint argument sets:

    pdehaze dehaze     IN OUT [solver flags] [--ablate NAME] [--trace CSV]
    pdehaze synthesize IN OUT (--t VALUE | --t-map PGM) --airlight R[,G,B]
    pdehaze evaluate   A B

Flag values are validated before any input file is opened; outputs are
written to a temp file and renamed into place.  Failures exit nonzero
with a one-line diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .image import load_image, save_image
from .metrics import compare
from .scattering import synthesize_haze
from .solver import ABLATIONS, LAMBDA_MODES, SolverConfig, dehaze, write_trace_csv

__all__ = ["main"]


def _atomic_write(path, write_fn) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    tmp = os.path.join(directory, f".{os.path.basename(path)}.tmp{os.getpid()}")
    try:
        write_fn(tmp)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _parse_airlight(text: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",")]
    except ValueError:
        raise ValueError(f"--airlight expects R or R,G,B numbers, got {text!r}") from None
    if len(values) not in (1, 3):
        raise ValueError(f"--airlight expects 1 or 3 components, got {len(values)}")
    if any(not 0.0 < v <= 1.0 for v in values):
        raise ValueError("--airlight components must lie in (0, 1]")
    return values


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        epsilon=args.epsilon,
        sigma=args.sigma,
        kernel_size=args.kernel_size,
        lambda0=args.lambda0,
        beta=args.beta,
        tau=args.tau,
        t_floor=args.t_floor,
        omega=args.omega,
        patch_radius=args.patch_radius,
        max_iters=args.max_iters,
        rel_tol=args.rel_tol,
        lambda_monotonicity=args.lambda_monotonicity,
    )


def cmd_dehaze(args) -> int:
    cfg = _solver_config(args)  # validates every override up front
    if args.workers < 1:
        raise ValueError("--workers must be >= 1")
    image = load_image(args.input)
    ablation = (args.ablate,) if args.ablate else ()
    restored, result = dehaze(image, cfg, ablation=ablation, workers=args.workers)
    _atomic_write(args.output, lambda tmp: save_image(restored, tmp))
    if args.trace:
        _atomic_write(args.trace, lambda tmp: write_trace_csv(result.traces, tmp))
    return 0


def cmd_synthesize(args) -> int:
    airlight = _parse_airlight(args.airlight)
    if args.t is not None and not 0.0 <= args.t <= 1.0:
        raise ValueError("--t must lie in [0, 1]")
    clean = load_image(args.input)
    if args.t is not None:
        transmission = np.full(clean.shape[:2], args.t)
    else:
        t_img = load_image(args.t_map)
        if t_img.shape[2] != 1:
            raise ValueError("--t-map must be a single-channel (P5) image")
        transmission = t_img[:, :, 0]
    channels = clean.shape[2]
    if len(airlight) == 1:
        airlight = airlight * channels
    if len(airlight) != channels:
        raise ValueError(f"--airlight has {len(airlight)} components for a {channels}-channel image")
    hazy = synthesize_haze(clean, transmission, np.array(airlight))
    _atomic_write(args.output, lambda tmp: save_image(hazy, tmp))
    return 0


def cmd_evaluate(args) -> int:
    report = compare(load_image(args.first), load_image(args.second))
    psnr = "inf" if math.isinf(report.psnr) else report.psnr
    line = json.dumps({"mse": report.mse, "psnr": psnr, "mae": report.mae},
                      separators=(",", ":"))
    print(line)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdehaze",
        description="Single-image dehazing via dark-channel transmission "
                    "estimation and an edge-preserving diffusion solve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dehaze", help="dehaze a Netpbm image")
    d.add_argument("input")
    d.add_argument("output")
    d.add_argument("--omega", type=float, default=0.95)
    d.add_argument("--epsilon", type=float, default=1e-3)
    d.add_argument("--sigma", type=float, default=2.0)
    d.add_argument("--kernel-size", type=int, default=5)
    d.add_argument("--lambda0", type=float, default=0.5)
    d.add_argument("--beta", type=float, default=3.0)
    d.add_argument("--tau", type=float, default=0.2)
    d.add_argument("--t-floor", type=float, default=0.1)
    d.add_argument("--patch-radius", type=int, default=7)
    d.add_argument("--max-iters", type=int, default=200)
    d.add_argument("--rel-tol", type=float, default=1e-4)
    d.add_argument("--ablate", choices=ABLATIONS, default=None,
                   help="disable exactly one pipeline stage")
    d.add_argument("--lambda-monotonicity", choices=LAMBDA_MODES, default="as-printed")
    d.add_argument("--trace", metavar="PATH", default=None,
                   help="write per-channel residual norms as CSV")
    d.add_argument("--workers", type=int, default=1,
                   help="parallel channel solves (output is identical for any count)")
    d.set_defaults(func=cmd_dehaze)

    s = sub.add_parser("synthesize", help="apply the forward haze model to a clean image")
    s.add_argument("input")
    s.add_argument("output")
    t_group = s.add_mutually_exclusive_group(required=True)
    t_group.add_argument("--t", type=float, default=None,
                         help="uniform transmission value in [0, 1]")
    t_group.add_argument("--t-map", metavar="PATH", default=None,
                         help="P5 image used as the transmission map")
    s.add_argument("--airlight", required=True, metavar="R[,G,B]",
                   help="per-channel airlight in (0, 1]")
    s.set_defaults(func=cmd_synthesize)

    e = sub.add_parser("evaluate", help="print MSE/PSNR/MAE of two images as JSON")
    e.add_argument("first")
    e.add_argument("second")
    e.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single line diagnostic, nonzero exit
        print(f"pdehaze: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

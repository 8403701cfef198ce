"""Command-line interface tying simulation, filtering and evaluation together.

Subcommands: simulate, calibrate, despeckle, evaluate, metrics. All are
deterministic given their flags and --seed; no subcommand mutates its
inputs. Numeric output is printed with 6 significant digits. Exit codes:
0 success, 1 runtime error (single-line diagnostic on stderr), 2 usage.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .errors import DespeckError
from .filters import FilterConfig, arithmetic_mean, despeckle
from .metrics import MetricReport, metric_report
from .raster import export_class_ppm, export_pgm, load_scene, read_stack, write_stack
from .residual import classify_quality, quality_map, ratio
from .similarity import SimilarityParams, calibrate_cached
from .speckle import ImageStack, simulate_stack

DEFAULT_CALIBRATION_DRAWS = 200_000


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _cache_path(args) -> str:
    base = args.cache_dir or os.environ.get("DESPECK_CACHE") or os.path.join(
        os.path.expanduser("~"), ".cache", "despeck")
    return os.path.join(base, "calibration.json")


def _add_sim_flags(p: argparse.ArgumentParser):
    p.add_argument("--patch-half", type=int, default=3,
                   help="patch half-width; patch is (2k+1)^2 (default 3 -> 7x7)")
    p.add_argument("--looks", type=float, default=None,
                   help="equivalent number of looks (default: from the stack header)")
    p.add_argument("--alpha-low", type=float, default=0.08)
    p.add_argument("--alpha-high", type=float, default=0.92)
    p.add_argument("--alpha-h", type=float, default=0.92)
    p.add_argument("--h", type=float, default=None, help="weight-kernel smoothing")
    p.add_argument("--tau1", type=float, default=None, help="unchanged-band threshold")
    p.add_argument("--tau2", type=float, default=None, help="changed-band threshold")
    p.add_argument("--n-mc", type=int, default=DEFAULT_CALIBRATION_DRAWS,
                   help="Monte-Carlo draws when calibration is needed")
    p.add_argument("--cache-dir", default=None,
                   help="calibration cache directory (default: $DESPECK_CACHE)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="despeck",
        description="Multitemporal SAR despeckling and residual evaluation")
    parser.add_argument("--version", action="version", version=f"despeck {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a speckled stack from a scene file")
    p.add_argument("--scene", required=True, help="scene description file")
    p.add_argument("--dates", type=int, required=True, help="number of dates M")
    p.add_argument("--looks", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-noisy", required=True)
    p.add_argument("--out-clean", default=None)

    p = sub.add_parser("calibrate", help="Monte-Carlo thresholds for (looks, patch)")
    p.add_argument("--patch-half", type=int, default=3)
    p.add_argument("--looks", type=float, default=1.0)
    p.add_argument("--alpha-low", type=float, default=0.08)
    p.add_argument("--alpha-high", type=float, default=0.92)
    p.add_argument("--alpha-h", type=float, default=0.92)
    p.add_argument("--n-mc", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cache-dir", default=None)

    p = sub.add_parser("despeckle", help="despeckle a stack")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--method", default="patf",
                   choices=("patf", "uta", "nltf", "anltf", "arithmetic_mean"))
    _add_sim_flags(p)
    p.add_argument("--window-half", type=int, default=2,
                   help="uta/anltf window half-width (default 2 -> 5x5)")
    p.add_argument("--search-half", type=int, default=10,
                   help="nltf search half-width (default 10 -> 21x21)")
    p.add_argument("--n-similar", type=int, default=16, help="nltf patch count")
    p.add_argument("--spatial-only", action="store_true",
                   help="skip the temporal combination (uta/nltf/anltf)")
    p.add_argument("--dates", default=None,
                   help="comma-separated reference dates (default: all)")
    p.add_argument("--seed", type=int, default=0, help="seed for auto-calibration")
    p.add_argument("--threads", type=int, default=1, help="worker cap for per-date loops")

    p = sub.add_parser("evaluate", help="no-reference residual quality of a denoising")
    p.add_argument("--noisy", required=True)
    p.add_argument("--denoised", required=True)
    p.add_argument("--patch-size", type=int, default=8)
    p.add_argument("--centered-denominator", action="store_true",
                   help="normalize by sum((R-1)^2) instead of sum(R^2 - 1)")
    p.add_argument("--out-map", default=None, help="write the numeric quality map stack")
    p.add_argument("--out-vis", default=None, help="write 4-class PPM visualization(s)")

    p = sub.add_parser("metrics", help="PSNR/MSSIM/ENL of an estimate vs reference")
    p.add_argument("--reference", required=True)
    p.add_argument("--estimate", required=True)
    p.add_argument("--peak", type=float, default=None)
    p.add_argument("--mssim-window", type=int, default=11)
    p.add_argument("--region", default=None, help="ENL region as ROW,COL,HEIGHT,WIDTH")
    p.add_argument("--out", default=None, help="write the report to a file")
    return parser


def _similarity_params(args, stack: ImageStack) -> SimilarityParams:
    looks = args.looks if args.looks is not None else float(stack.looks[0])
    if args.looks is None and not np.all(stack.looks == stack.looks[0]):
        raise DespeckError("stack has heterogeneous looks; pass --looks explicitly")
    params = SimilarityParams(patch_half=args.patch_half, looks=looks,
                              h=args.h, tau1=args.tau1, tau2=args.tau2,
                              alpha_low=args.alpha_low, alpha_high=args.alpha_high,
                              alpha_h=args.alpha_h)
    if params.calibrated:
        return params
    if args.h is not None or args.tau1 is not None or args.tau2 is not None:
        raise DespeckError("pass all of --h/--tau1/--tau2 or none of them")
    return calibrate_cached(params, args.n_mc, rng_seed=args.seed,
                            cache_path=_cache_path(args))


def cmd_simulate(args) -> int:
    scene = load_scene(args.scene)
    clean, noisy = simulate_stack(scene, args.dates, args.looks, rng_seed=args.seed)
    write_stack(noisy, args.out_noisy)
    if args.out_clean:
        write_stack(ImageStack(clean, noisy.looks), args.out_clean)
    print(f"simulated {args.dates} dates of {scene.background.shape[0]}x"
          f"{scene.background.shape[1]} at looks {_fmt(args.looks)}")
    return 0


def cmd_calibrate(args) -> int:
    params = SimilarityParams(patch_half=args.patch_half, looks=args.looks,
                              alpha_low=args.alpha_low, alpha_high=args.alpha_high,
                              alpha_h=args.alpha_h)
    out = calibrate_cached(params, args.n_mc, rng_seed=args.seed,
                           cache_path=_cache_path(args))
    print(f"tau1 {_fmt(out.tau1)}")
    print(f"tau2 {_fmt(out.tau2)}")
    print(f"h {_fmt(out.h)}")
    return 0


def cmd_despeckle(args) -> int:
    stack = read_stack(args.input)
    dates = None
    if args.dates is not None:
        dates = [int(v) for v in args.dates.split(",") if v != ""]
    if args.method == "arithmetic_mean":
        config = FilterConfig(method=args.method)
    else:
        needs_sim = args.method in ("patf", "nltf", "anltf")
        sim = _similarity_params(args, stack) if needs_sim else SimilarityParams(
            patch_half=args.patch_half, looks=float(stack.looks[0]))
        config = FilterConfig(method=args.method, sim=sim,
                              window_half=args.window_half,
                              search_half=args.search_half,
                              n_similar=args.n_similar,
                              temporal_combine=not args.spatial_only,
                              threads=args.threads)
    result = despeckle(stack, config, dates=dates)
    write_stack(result, args.output)
    print(f"despeckled {result.n_dates} date(s) with {args.method}")
    return 0


def cmd_evaluate(args) -> int:
    noisy = read_stack(args.noisy)
    denoised = read_stack(args.denoised)
    if noisy.shape != denoised.shape:
        raise DespeckError(f"stack shapes differ: {noisy.shape} vs {denoised.shape}")
    maps = []
    scores = []
    for t in range(noisy.n_dates):
        r = ratio(noisy.data[t], denoised.data[t])
        qm = quality_map(r, n1=args.patch_size,
                         centered_denominator=args.centered_denominator)
        maps.append(qm.values)
        scores.append(qm.score)
        if noisy.n_dates > 1:
            print(f"date {t} score {_fmt(qm.score)}")
    overall = float(np.mean(scores))
    print(f"score {_fmt(overall)}")
    if args.out_map:
        write_stack(ImageStack(np.nan_to_num(np.stack(maps), nan=0.0),
                               np.ones(noisy.n_dates)), args.out_map)
    if args.out_vis:
        for t, values in enumerate(maps):
            path = args.out_vis if noisy.n_dates == 1 else _suffixed(args.out_vis, t)
            export_class_ppm(classify_quality(values), path)
    return 0


def _suffixed(path: str, t: int) -> str:
    root, ext = os.path.splitext(path)
    return f"{root}_t{t}{ext}"


def cmd_metrics(args) -> int:
    reference = read_stack(args.reference)
    estimate = read_stack(args.estimate)
    if reference.shape != estimate.shape:
        raise DespeckError(f"stack shapes differ: {reference.shape} vs {estimate.shape}")
    region = None
    if args.region:
        r, c, rh, rw = (int(v) for v in args.region.split(","))
        region = np.zeros(reference.shape[1:], dtype=bool)
        region[r:r + rh, c:c + rw] = True
    report = metric_report(reference.data, estimate.data, peak=args.peak,
                           ssim_window=args.mssim_window, enl_region=region)
    text = report.to_text()
    print(text, end="")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "calibrate": cmd_calibrate,
    "despeckle": cmd_despeckle,
    "evaluate": cmd_evaluate,
    "metrics": cmd_metrics,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (DespeckError, OSError) as exc:
        print(f"despeck: error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

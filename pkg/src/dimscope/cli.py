"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 data error, 4 fit failure.
Data goes to files; diagnostics go to stderr. Every output file gets a
``<out>.manifest`` sidecar recording the resolved flags.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time

import numpy as np

from dimscope import __version__
from dimscope.baselines import (
    DEFAULT_BAND,
    corrdim_estimate,
    default_mpca_radii,
    gpca_estimate,
    mpca_profile,
    pca_spectrum,
)
from dimscope.correlation import empirical_correlation_integral, subsample_curve
from dimscope.data import RngHandle, center_and_project, pairwise_distances
from dimscope.datasets import FAMILIES, SyntheticSpec
from dimscope.errors import DimscopeError, InvalidInputError, NoReliableScaleError, UnfittableCurveError
from dimscope.estimator import EstimatorConfig, estimate_id_global
from dimscope.io import read_dataset, write_dataset, write_keyvalue, write_table
from dimscope.model import FciParams, fci_model_value
from dimscope.multiscale import Scale, multiscale_estimate

log = logging.getLogger("dimscope")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_FIT = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _floats(text: str, n: int | None = None, what: str = "list") -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse {what} {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"{what} needs {n} comma-separated numbers, got {text!r}")
    return vals


def _manifest(args, started: float, out, extra: dict | None = None) -> None:
    if out is None:
        return
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command") and not k.startswith("_")}
    items = {"command": args.command, "tool_version": __version__}
    items.update({f"flag.{k}": "" if v is None else v for k, v in flags.items()})
    items["seed"] = getattr(args, "seed", "")
    items["input"] = getattr(args, "inp", "") or ""
    items["output"] = out
    items.update(extra or {})
    items["wall_clock_s"] = f"{time.perf_counter() - started:.3f}"
    write_keyvalue(f"{out}.manifest", items)


def _estimator_config(args) -> EstimatorConfig:
    return EstimatorConfig(
        subsample=args.subsample,
        min_samples=args.min_samples,
        d_max=args.d_max,
        multistart=args.multistart,
        seed=args.seed,
    )


def cmd_generate(args) -> int:
    extra = {}
    if args.family == "blobs":
        extra["blobs"] = args.blobs
    if args.family == "sphere":
        extra["radius"] = args.radius
    if args.noise:
        extra["noise"] = args.noise
    d = args.d
    if args.family == "cube-union":
        dims = [int(v) for v in _floats(d or "20,30", 2, "--d")]
        extra["dims"] = tuple(dims)
        d = None
    elif d is not None:
        try:
            d = int(d)
        except ValueError:
            raise UsageError(f"--d must be an integer for family {args.family}") from None
    spec = SyntheticSpec(args.family, d=d, D=args.D, N=args.n, seed=args.seed, extra=extra)
    data = spec.generate()
    write_dataset(args.out, data, args.format)
    write_keyvalue(f"{args.out}.meta", spec.to_meta())
    print(f"wrote {data.n_samples} x {data.ambient_dim} to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_estimate(args) -> int:
    data = read_dataset(args.inp)
    est = estimate_id_global(data, _estimator_config(args))
    fit = est.fit
    if not fit.converged:
        log.warning("fit did not meet the convergence criteria")
    print(repr(est.d_est))
    if args.out:
        write_table(
            args.out,
            ["d_est", "d_sphere", "r_s", "rss", "n_curve_points", "converged", "n_samples"],
            [[est.d_est, fit.d_sphere, fit.r_s, fit.rss, fit.n_curve_points, fit.converged, est.n_samples_used]],
        )
    return EXIT_OK


def cmd_multiscale(args) -> int:
    data = read_dataset(args.inp)
    scales = None
    if args.scales != "auto":
        vals = _floats(args.scales, what="--scales")
        try:
            scales = [Scale(args.scale_kind, int(v) if args.scale_kind == "knn" else v) for v in vals]
        except InvalidInputError as exc:
            raise UsageError(str(exc)) from None
    res = multiscale_estimate(
        data,
        n_centers=min(args.centers, data.n_samples),
        scales=scales,
        rng=RngHandle(args.seed),
        cfg=_estimator_config(args),
        kind=args.scale_kind,
        n_reliable=args.min_reliable,
    )
    print(repr(res.d_summary))
    write_table(args.out, ["center", "scale_kind", "scale", "n_neighbors", "d_est", "reliable"], res.rows())
    summary = {"d_summary": res.d_summary, "n_centers": len(res.profiles)}
    for center, m in res.per_center_minima:
        summary[f"min.{center}"] = m
    write_keyvalue(f"{args.out}.summary", summary)
    return EXIT_OK


def cmd_baseline(args) -> int:
    data = read_dataset(args.inp)
    extra = {}
    if args.method == "corrdim":
        band = tuple(_floats(args.band, 2, "--band")) if args.band else DEFAULT_BAND
        fit = corrdim_estimate(data, band)
        print(repr(fit.d_est))
        write_table(
            args.out,
            ["d_est", "q_lo", "q_hi", "n_points_used", "r_squared"],
            [[fit.d_est, fit.fit_band[0], fit.fit_band[1], fit.n_points_used, fit.r_squared]],
        )
        extra["d_est"] = fit.d_est
    elif args.method == "gpca":
        spec = pca_spectrum(data)
        d = gpca_estimate(spec, args.criterion)
        print(d)
        write_table(args.out, ["index", "eigenvalue"], ((i + 1, ev) for i, ev in enumerate(spec.eigenvalues)))
        extra["d_est"] = d
    else:
        n = data.n_samples
        gen = RngHandle(args.seed).generator()
        centers = sorted(int(c) for c in gen.choice(n, size=min(args.centers, n), replace=False))
        radii = default_mpca_radii(data) if args.radii == "auto" else _floats(args.radii, what="--radii")
        prof = mpca_profile(data, centers, radii)
        if prof.bound is None:
            raise UnfittableCurveError("no ball held at least 5 samples at any radius")
        print(f"{prof.bound[0]},{prof.bound[1]}")
        finite = [int(np.max(np.flatnonzero(s > 0))) + 1 for s, c in zip(prof.avg_spectra, prof.n_balls) if c and np.any(s > 0)]
        write_table(args.out, ["radius", "eig_index", "avg_eigenvalue"], prof.rows(max(finite) if finite else None))
        extra["bound"] = f"{prof.bound[0]},{prof.bound[1]}"
        for r, e in zip(prof.radii, prof.mass_estimates):
            extra[f"mass.{r!r}"] = "" if e is None else e
    args._extra = extra
    return EXIT_OK


def cmd_curve(args) -> int:
    params = None
    if args.model:
        d, r_s = _floats(args.model, 2, "--model")
        try:
            params = FciParams(d, r_s)
        except DimscopeError as exc:
            raise UsageError(str(exc)) from None
    if args.inp is None:
        if params is None:
            raise UsageError("curve needs --in, --model, or both")
        r = np.linspace(0.0, 2.0 * params.r_s, args.grid)
        write_table(args.out, ["r", "rho_model"], zip(r, fci_model_value(r, params)))
        return EXIT_OK
    data = read_dataset(args.inp)
    if not args.raw:
        data = center_and_project(data)
    curve = empirical_correlation_integral(pairwise_distances(data))
    if args.subsample > 0:
        curve = subsample_curve(curve, args.subsample, RngHandle(args.seed))
    if params is None:
        write_table(args.out, ["r", "rho"], zip(curve.r, curve.rho))
    else:
        model = fci_model_value(curve.r, params)
        write_table(args.out, ["r", "rho_empirical", "rho_model"], zip(curve.r, curve.rho, model))
    return EXIT_OK


def _add_estimator_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--subsample", type=int, default=1000, help="max curve points fed to the fit")
    p.add_argument("--min-samples", type=int, default=5)
    p.add_argument("--d-max", type=float, default=None, help="upper bound on d (default max(2D, 2048))")
    p.add_argument("--multistart", action=argparse.BooleanOptionalAction, default=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dimscope", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"dimscope {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic benchmark dataset")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--d", default=None, help="intrinsic dimension (cube-union: 'd_a,d_b')")
    p.add_argument("--D", type=int, default=None, help="ambient dimension")
    p.add_argument("--n", type=int, required=True, help="samples (cube-union: per cube)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--blobs", type=int, default=1, help="blobs per image (family blobs)")
    p.add_argument("--radius", type=float, default=1.0, help="sphere radius (family sphere)")
    p.add_argument("--noise", type=float, default=0.0, help="Gaussian noise sigma per coordinate")
    p.add_argument("--format", choices=("csv", "dset"), default=None, help="default: from extension")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("estimate", help="global FCI estimate")
    p.add_argument("--in", dest="inp", required=True)
    _add_estimator_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("multiscale", help="local FCI profiles and min-plateau summary")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--centers", type=int, default=20)
    p.add_argument("--scale-kind", choices=("knn", "radius"), default="knn")
    p.add_argument("--scales", default="auto", help="comma-separated list or 'auto'")
    p.add_argument("--min-reliable", type=int, default=20)
    _add_estimator_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_multiscale)

    p = sub.add_parser("baseline", help="CorrDim, global PCA or multiscale PCA")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--method", choices=("corrdim", "gpca", "mpca"), required=True)
    p.add_argument("--band", default=None, help="corrdim distance-quantile band 'qlo,qhi'")
    p.add_argument("--criterion", choices=("gap", "mass"), default="gap")
    p.add_argument("--centers", type=int, default=20, help="mpca ball centers")
    p.add_argument("--radii", default="auto", help="mpca radii, comma-separated or 'auto'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("curve", help="empirical correlation integral with optional model overlay")
    p.add_argument("--in", dest="inp", default=None)
    p.add_argument("--model", default=None, help="'d,r_s' of the analytic overlay")
    p.add_argument("--subsample", type=int, default=1000, help="0 keeps every pair")
    p.add_argument("--raw", action="store_true", help="skip centering and unit projection")
    p.add_argument("--grid", type=int, default=201, help="model-only grid size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_curve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="dimscope: %(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    started = time.perf_counter()
    try:
        code = args.func(args)
    except UsageError as exc:
        print(f"dimscope {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UnfittableCurveError, NoReliableScaleError) as exc:
        print(f"dimscope {args.command}: fit failed: {exc}", file=sys.stderr)
        return EXIT_FIT
    except (DimscopeError, OSError) as exc:
        print(f"dimscope {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    _manifest(args, started, getattr(args, "out", None), getattr(args, "_extra", None))
    return code


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Main CLI entry point for sbfctl."""
import argparse
import logging
import math
import sys
from typing import Dict, List, Optional

import numpy as np

from config_manager import ConfigManager
from errors import SbfError, ValidationError
from frames import (FrameOperatorSpec, apply_B_J, build_mask, make_envelope,
                    poly_bernstein_ratios, ratio_slope)
from harmonics import PolynomialOnSphere
from harness import (TARGET_DEGREE, RateExperiment, approximation_distance, besov_seq_norm,
                     besov_verdict, check_sequence_conditions, classify_besov,
                     fit_inverse_rate, level_approximant, make_target, run_direct_rate,
                     run_experiments, run_inverse_recovery, synthetic_distances)
from kernel_catalog import ZonalKernel, kernel_from_name
from network import interpolate, network_bernstein_ratios, stability_ratio
from quadrature import build_rule
from sphere_geometry import (CenterSet, analyze_centers, build_cells, evaluation_grid,
                             generate_points, refine_nested)
from storage import Storage, dumps_csv, read_centers
from utils import configure_logging, fit_loglog_slope, make_rng
from worker_manager import WorkerManager

logger = logging.getLogger(__name__)

DEFAULT_GENERATORS = {1: "equispaced", 2: "fibonacci"}


class SbfArgumentParser(argparse.ArgumentParser):
    """Argument parser that reports usage errors on one line with exit 2."""

    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        print(f"UsageError: {message}", file=sys.stderr)
        sys.exit(2)


def create_managers(args) -> tuple:
    """Create the config manager (file, then flags) and the output store."""
    config_manager = ConfigManager(args.config)
    config_manager.set("subcommand", args.command)
    overrides = {key: getattr(args, key, None) for key in OVERRIDE_KEYS}
    config_manager.update(overrides)
    for name in ("s", "d", "k", "t0", "sigma", "delta", "w", "continuation"):
        value = getattr(args, f"kernel_{name}", None)
        if value is not None:
            config_manager.set_kernel_param(name, value)
    storage = Storage(config_manager.get("output_dir"))
    return config_manager, storage


def run_config(config_manager: ConfigManager) -> Dict[str, object]:
    """Resolved config as embedded in reports; the output location is left out."""
    data = config_manager.resolved()
    data.pop("output_dir", None)
    return data


def build_kernel(config_manager: ConfigManager, family: Optional[str] = None) -> ZonalKernel:
    cfg = config_manager.config
    return kernel_from_name(family or cfg.family, cfg.dim_n, **config_manager.kernel_params())


def load_centers(config_manager: ConfigManager) -> CenterSet:
    """Centers from a file or a generator, with geometry analyzed."""
    cfg = config_manager.config
    if cfg.centers_file:
        points = read_centers(cfg.centers_file, cfg.dim_n)
    else:
        generator = cfg.generator or DEFAULT_GENERATORS.get(cfg.dim_n, "uniform")
        points = generate_points(generator, cfg.dim_n, cfg.count, make_rng(cfg.seed))
    return analyze_centers(cfg.dim_n, points, grid_factor=cfg.grid_factor, seed=cfg.seed)


def load_nested(config_manager: ConfigManager) -> List[CenterSet]:
    cfg = config_manager.config
    return refine_nested(load_centers(config_manager), cfg.levels, rho_cap=cfg.rho_cap,
                         seed=cfg.seed)


def build_target(config_manager: ConfigManager):
    cfg = config_manager.config
    s = cfg.target_s or cfg.beta or 3.0
    return make_target(cfg.target, cfg.dim_n, TARGET_DEGREE, theta0=cfg.theta0, s=s)


def write_level_centers(storage: Storage, sets: List[CenterSet]) -> List[str]:
    names = []
    for level, cs in enumerate(sets):
        name = f"centers_{level}.txt"
        storage.write_centers(name, cs.dim_n, cs.points)
        names.append(name)
    return names


def cmd_coeffs(config_manager: ConfigManager, storage: Storage):
    """Handle coeffs command."""
    kernel = build_kernel(config_manager)
    top = config_manager.get("l_max")
    coeffs = kernel.coeffs if top is None else kernel.coeffs[:top + 1]
    storage.write_coefficients("coeffs.csv", coeffs)
    storage.write_json("coeffs.json", {"kernel": kernel.describe(),
                                       "raw_poly_coeffs": kernel.raw_poly_coeffs,
                                       "config": run_config(config_manager)})
    sys.stdout.write(dumps_csv(["l", "coeff"],
                               ((l, float(c)) for l, c in enumerate(coeffs))))


def cmd_centers(config_manager: ConfigManager, storage: Storage):
    """Handle centers command."""
    sets = load_nested(config_manager) if config_manager.get("levels") else \
        [load_centers(config_manager)]
    names = write_level_centers(storage, sets)
    summary = [dict(cs.summary(), file=name) for cs, name in zip(sets, names)]
    storage.write_json("centers.json", {"levels": summary, "config": run_config(config_manager)})
    for row in summary:
        print(f"N={row['N']} q={row['q']:.6g} h={row['h']:.6g} rho={row['rho']:.4g}")


def cmd_quadrature(config_manager: ConfigManager, storage: Storage):
    """Handle quadrature command."""
    cfg = config_manager.config
    cs = load_centers(config_manager)
    cells = build_cells(cs, cfg.cell_resolution, cfg.anchor)
    rule = build_rule(cs, cfg.degree, threshold=cfg.feasibility_threshold, strict=cfg.strict,
                      cells=cells, anchor_method=cfg.anchor)
    storage.write_centers("centers.txt", cs.dim_n, cs.points)
    storage.write_csv("weights.csv", ["index", "weight"],
                      ((i, float(w)) for i, w in enumerate(rule.weights)))
    storage.write_json("quadrature.json", {"certificate": rule.certificate(),
                                           "centers": cs.summary(),
                                           "config": run_config(config_manager)})
    cert = rule.certificate()
    print(f"L={cert['degree']} N={cert['N']} residual={cert['residual']:.3e} "
          f"min_weight={cert['min_weight']:.6g}")


def cmd_frames(config_manager: ConfigManager, storage: Storage, args):
    """Handle frames command."""
    cfg = config_manager.config
    mask = build_mask(cfg.mask_k)
    spec = FrameOperatorSpec(mask, cfg.J, cfg.dim_n)
    report = {"J": spec.J, "j_n": spec.j_n, "degree": spec.degree,
              "reproduction_degree": spec.reproduction_degree,
              "mask_k": cfg.mask_k, "config": run_config(config_manager)}
    storage.write_csv("multiplier.csv", ["l", "b"],
                      ((l, float(v)) for l, v in enumerate(spec.multiplier(spec.degree))))
    if args.check_partition:
        rng = make_rng(cfg.seed)
        worst = 0.0
        for _ in range(cfg.draws):
            S = PolynomialOnSphere.random(cfg.dim_n, spec.reproduction_degree, rng)
            worst = max(worst, float(np.max(np.abs(apply_B_J(spec, S).coeffs - S.coeffs))))
        report["partition_error"] = mask.partition_error()
        report["reproduction_error"] = worst
        print(f"partition_error={report['partition_error']:.3e} "
              f"reproduction_error={worst:.3e}")
    if args.bernstein_poly:
        rows = poly_bernstein_ratios(cfg.dim_n, cfg.p, cfg.gamma, cfg.degrees, cfg.draws,
                                     make_rng(cfg.seed))
        fit = ratio_slope(rows)
        storage.write_csv("bernstein_poly.csv", ["L", "max_ratio"],
                          ((r["L"], r["max_ratio"]) for r in rows))
        report["bernstein_poly"] = {"rows": rows, "fit": fit.to_dict()}
        print(f"bernstein slope={fit.slope:.4f}")
    storage.write_json("frames.json", report)


def cmd_interpolate(config_manager: ConfigManager, storage: Storage):
    """Handle interpolate command."""
    cfg = config_manager.config
    kernel = build_kernel(config_manager)
    cs = load_centers(config_manager)
    target = build_target(config_manager)
    net = interpolate(kernel, cs, target.evaluate(cs.points))
    grid = evaluation_grid(cs.dim_n, 2000, cfg.seed)
    error = float(np.max(np.abs(net.evaluate(grid) - target.evaluate(grid))))
    storage.write_centers("centers.txt", cs.dim_n, cs.points)
    storage.write_network("network.json", net, "centers.txt")
    storage.write_json("interpolate.json", {"kernel": kernel.describe(), "centers": cs.summary(),
                                            "max_error": error,
                                            "config": run_config(config_manager)})
    print(f"N={cs.size} max_error={error:.6g}")


def cmd_quasi_interp(config_manager: ConfigManager, storage: Storage):
    """Handle quasi-interp command."""
    cfg = config_manager.config
    kernel = build_kernel(config_manager)
    cs = load_centers(config_manager)
    exp = RateExperiment(kernel, build_target(config_manager), [cs], p=cfg.p, gamma=cfg.gamma,
                         mask_k=cfg.mask_k, oversample=cfg.oversample,
                         exactness=cfg.exactness)
    rule, spec, net = level_approximant(exp, cs, build_mask(cfg.mask_k))
    dist = approximation_distance(net, exp.target, cfg.gamma, cfg.p)
    storage.write_centers("centers.txt", cs.dim_n, cs.points)
    storage.write_network("network.json", net, "centers.txt")
    storage.write_json("quasi_interp.json", {"kernel": kernel.describe(),
                                             "rule": rule.certificate(), "J": spec.J,
                                             "distance": dist,
                                             "config": run_config(config_manager)})
    print(f"N={cs.size} M={rule.degree_L} J={spec.J} distance={dist:.6g}")


def cmd_stability(config_manager: ConfigManager, storage: Storage):
    """Handle stability command."""
    cfg = config_manager.config
    kernel = build_kernel(config_manager)
    sets = load_nested(config_manager)
    kappa = make_envelope(cfg.envelope) if cfg.envelope else None
    tasks = [lambda cs=cs: stability_ratio(kernel, cs, cfg.p, cfg.search_budget, kappa,
                                           cfg.smoothing_c, strict=cfg.strict).to_dict()
             for cs in sets]
    reports = run_experiments(tasks, cfg.workers)
    rows = [dict(r, level=i, **sets[i].summary()) for i, r in enumerate(reports)]
    storage.write_csv("stability.csv", ["level", "N", "q", "lower_bound", "upper_bound"],
                      ((r["level"], r["N"], r["q"], r["lower_bound"], r["upper_bound"])
                       for r in rows))
    storage.write_json("stability.json", {"kernel": kernel.describe(), "levels": rows,
                                          "config": run_config(config_manager)})
    for r in rows:
        print(f"N={r['N']} lower={r['lower_bound']:.6g} upper={r['upper_bound']:.6g}")


def cmd_bernstein(config_manager: ConfigManager, storage: Storage):
    """Handle bernstein command."""
    cfg = config_manager.config
    kernel = build_kernel(config_manager)
    sets = load_nested(config_manager)
    rows = network_bernstein_ratios(kernel, sets, cfg.gamma, cfg.p, cfg.draws,
                                    make_rng(cfg.seed))
    fit = fit_loglog_slope([r["inv_q"] for r in rows], [r["max_ratio"] for r in rows])
    storage.write_csv("bernstein.csv", ["level", "N", "inv_q", "max_ratio"],
                      ((r["level"], r["N"], r["inv_q"], r["max_ratio"]) for r in rows))
    storage.write_json("bernstein.json", {"kernel": kernel.describe(), "levels": rows,
                                          "fit": fit.to_dict(),
                                          "config": run_config(config_manager)})
    print(f"bernstein slope={fit.slope:.4f} (gamma={cfg.gamma})")


def cmd_rates(config_manager: ConfigManager, storage: Storage):
    """Handle rates command."""
    cfg = config_manager.config
    exp = RateExperiment(build_kernel(config_manager), build_target(config_manager),
                         load_nested(config_manager), p=cfg.p, gamma=cfg.gamma, beta=cfg.beta,
                         mask_k=cfg.mask_k, oversample=cfg.oversample,
                         exactness=cfg.exactness, config=run_config(config_manager))
    report = run_direct_rate(exp)
    storage.write_csv("rates.csv", ["level", "N", "h", "rule_degree", "J", "distance"],
                      ((r["level"], r["N"], r["h"], r["rule_degree"], r["J"], r["distance"])
                       for r in report["levels"]))
    storage.write_json("rates.json", report)
    if report.get("slope") is None:
        print(f"regime={report.get('regime', 'rate')}")
    else:
        print(f"slope={report['slope']:.4f} r_squared={report['r_squared']:.4f}")


def cmd_inverse(config_manager: ConfigManager, storage: Storage):
    """Handle inverse command."""
    cfg = config_manager.config
    if cfg.synthetic:
        mu, t = cfg.synthetic
        h, d = synthetic_distances(mu, t, max(cfg.levels, 3))
        fit = fit_inverse_rate(h, d)
        report = {"synthetic": {"mu": mu, "t": t}, "fit": fit.to_dict(),
                  "distances": d, "config": run_config(config_manager)}
    else:
        report = run_inverse_recovery(build_kernel(config_manager), build_target(config_manager),
                                      load_nested(config_manager), cfg.p, cfg.nus,
                                      run_config(config_manager))
    storage.write_json("inverse.json", report)
    fit = report["fit"]
    print(f"mu={fit['mu']:.4f} t={fit['t']:.4f}")


def cmd_besov(config_manager: ConfigManager, storage: Storage):
    """Handle besov command."""
    cfg = config_manager.config
    if cfg.synthetic:
        mu, t = cfg.synthetic
        _, d = synthetic_distances(mu, t, max(cfg.levels, 3))
        records = [{"tau": cfg.tau, "r": r, "seq_norm": besov_seq_norm(d, cfg.tau, r),
                    "verdict": besov_verdict(mu, t, r, cfg.tau), "heuristic": False}
                   for r in cfg.r_grid]
        report = {"mu": mu, "t": t, "records": records, "config": run_config(config_manager)}
    else:
        report = classify_besov(build_kernel(config_manager), build_target(config_manager),
                                load_nested(config_manager), cfg.p, cfg.tau, cfg.r_grid,
                                run_config(config_manager))
    storage.write_csv("besov.csv", ["r", "seq_norm", "verdict"],
                      ((rec["r"], rec["seq_norm"], rec["verdict"]) for rec in report["records"]))
    storage.write_json("besov.json", report)
    for rec in report["records"]:
        print(f"r={rec['r']}: {rec['verdict']}")


def cmd_certify(config_manager: ConfigManager, storage: Storage):
    """Handle certify command."""
    cfg = config_manager.config
    beta = cfg.beta if cfg.beta is not None else 1.0
    tasks = [lambda f=f: check_sequence_conditions(kernel_from_name(f, cfg.dim_n), beta,
                                                   cfg.sequence_degrees, cfg.max_m)
             for f in cfg.families]
    results = WorkerManager(cfg.workers).run_collect(tasks)
    rows = []
    for family, result in zip(cfg.families, results):
        if result.error is None:
            rows.append(dict(result.value, status="certified"))
        elif isinstance(result.error, SbfError):
            rows.append({"family": family, "status": result.error.code,
                         "reason": result.error.message})
        else:
            raise result.error
    storage.write_json("certify.json", {"beta": beta, "families": rows,
                                        "config": run_config(config_manager)})
    for row in rows:
        m = row.get("certified_m")
        print(f"{row['family']}: {row['status']}" + ("" if m is None else f" m={m}"))


COMMANDS = {
    "coeffs": cmd_coeffs,
    "centers": cmd_centers,
    "quadrature": cmd_quadrature,
    "interpolate": cmd_interpolate,
    "quasi-interp": cmd_quasi_interp,
    "stability": cmd_stability,
    "bernstein": cmd_bernstein,
    "rates": cmd_rates,
    "inverse": cmd_inverse,
    "besov": cmd_besov,
    "certify": cmd_certify,
}

# flags that map one-to-one onto config keys
OVERRIDE_KEYS = ("family", "dim_n", "centers_file", "generator", "count", "levels", "degree",
                 "degrees", "J", "p", "gamma", "beta", "seed", "output_dir", "target", "theta0",
                 "target_s", "mask_k", "grid_factor", "cell_resolution", "anchor",
                 "feasibility_threshold", "strict", "envelope", "smoothing_c",
                 "search_budget", "draws", "l_max", "rho_cap", "oversample", "exactness", "nus",
                 "synthetic", "tau", "r_grid", "families", "sequence_degrees", "max_m",
                 "workers")


def _common_parser() -> argparse.ArgumentParser:
    common = SbfArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run config; flags override its values")
    common.add_argument("--verbose", "-v", action="count", default=0,
                        help="-v for INFO, -vv for DEBUG logging")
    common.add_argument("--out", dest="output_dir", help="Output directory")
    common.add_argument("--seed", type=int, help="Seed of the run's random generator")
    common.add_argument("--workers", type=int, help="Worker threads for independent tasks")

    kernel = common.add_argument_group("kernel")
    kernel.add_argument("--family", help="green, tps, wendland, gaussian, multiquadric, "
                                         "generating, poisson")
    kernel.add_argument("--n", dest="dim_n", type=int, help="Sphere dimension")
    kernel.add_argument("--lmax", dest="l_max", type=int, help="Highest stored degree")
    kernel.add_argument("--beta", type=float, help="Smoothness order (Green order by default)")
    kernel.add_argument("--s", dest="kernel_s", type=float, help="Thin-plate exponent")
    kernel.add_argument("--d", dest="kernel_d", type=int, help="Wendland space dimension")
    kernel.add_argument("--k", dest="kernel_k", type=int, help="Wendland smoothness")
    kernel.add_argument("--t0", dest="kernel_t0", type=float, help="Wendland support shift")
    kernel.add_argument("--sigma", dest="kernel_sigma", type=float, help="Gaussian width")
    kernel.add_argument("--delta", dest="kernel_delta", type=float, help="Multiquadric shift")
    kernel.add_argument("--w", dest="kernel_w", type=float, help="Generating-function radius")
    kernel.add_argument("--continuation", dest="kernel_continuation",
                        choices=("positive", "raw"), help="Polynomial-part continuation")

    centers = common.add_argument_group("centers")
    centers.add_argument("--centers", dest="centers_file", help="Centers file ('n N' header)")
    centers.add_argument("--generator", help="equispaced, fibonacci, hammersley, "
                                             "octahedron, uniform")
    centers.add_argument("--count", type=int, help="Number of generated centers")
    centers.add_argument("--levels", type=int, help="Refinement levels after the base set")
    centers.add_argument("--grid-factor", type=float, help="Mesh-norm grid factor")
    centers.add_argument("--rho-cap", type=float, help="Mesh-ratio cap for refinement")

    norms = common.add_argument_group("norms")
    norms.add_argument("--p", help="Norm exponent in [1, inf]")
    norms.add_argument("--gamma", type=float, help="Sobolev order of the measured norm")
    norms.add_argument("--draws", type=int, help="Random draws per level")
    return common


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subcommand per operation."""
    parser = SbfArgumentParser(
        prog="sbfctl",
        description="Spherical basis function networks on S^n: kernels, quadrature, "
                    "stability and approximation rates"
    )
    common = _common_parser()
    subparsers = parser.add_subparsers(dest="command", help="Command to execute")

    subparsers.add_parser("coeffs", parents=[common], help="Kernel coefficients as CSV")
    subparsers.add_parser("centers", parents=[common], help="Generate and analyze centers")

    quad = subparsers.add_parser("quadrature", parents=[common], help="Positive-weight rule")
    quad.add_argument("--degree", type=int, help="Exactness degree L")
    quad.add_argument("--threshold", dest="feasibility_threshold", type=float,
                      help="Feasibility threshold for h (L + lambda)")
    quad.add_argument("--strict", action="store_true", default=None,
                      help="Fail instead of warning above the threshold")
    quad.add_argument("--anchor", choices=("voronoi", "grid"), help="Anchor cell method")
    quad.add_argument("--cell-resolution", type=int, help="Grid resolution for grid cells")

    frames = subparsers.add_parser("frames", parents=[common], help="Frame operator checks")
    frames.add_argument("--J", type=int, help="Frame level")
    frames.add_argument("--mask-k", type=int, help="Mask smoothness (C-infinity if omitted)")
    frames.add_argument("--check-partition", action="store_true",
                        help="Partition-of-unity and reproduction errors")
    frames.add_argument("--bernstein-poly", nargs=4, metavar=("N", "P", "GAMMA", "LMAX"),
                        help="Polynomial Bernstein ratios for L = 8, 16, ... up to LMAX")
    frames.add_argument("--degrees", type=int, nargs="+",
                        help="Polynomial degrees (replaces the dyadic list up to LMAX)")

    for name, help_text in (("interpolate", "Interpolate a target on the centers"),
                            ("quasi-interp", "Quasi-interpolant of a target")):
        sub = subparsers.add_parser(name, parents=[common], help=help_text)
        _target_args(sub)

    stab = subparsers.add_parser("stability", parents=[common], help="Stability-ratio bounds")
    stab.add_argument("--envelope", help="gaussian, bump, bump_high, mask, lowpass")
    stab.add_argument("--c", dest="smoothing_c", type=float, help="Smoothing factor eps = c q")
    stab.add_argument("--search-budget", type=int, help="Witness search evaluations")
    stab.add_argument("--strict", action="store_true", default=None,
                      help="Fail when the witness search runs out of budget")

    subparsers.add_parser("bernstein", parents=[common], help="Network Bernstein ratios")

    for name, help_text in (("rates", "Direct approximation rate"),
                            ("inverse", "Inverse-theorem rate recovery"),
                            ("besov", "Besov sequence-norm classification")):
        sub = subparsers.add_parser(name, parents=[common], help=help_text)
        _target_args(sub)
        sub.add_argument("--synthetic", type=float, nargs=2, metavar=("MU", "T"),
                         help="Use distances 2^(-MU j) j^(-T) instead of an experiment")
        if name == "inverse":
            sub.add_argument("--nus", type=float, nargs="+", help="Sobolev orders to follow")
        if name == "besov":
            sub.add_argument("--tau", help="Sequence exponent (number or inf)")
            sub.add_argument("--r", dest="r_grid", type=float, nargs="+", help="Orders r")

    cert = subparsers.add_parser("certify", parents=[common],
                                 help="Sequence conditions for smooth kernels")
    cert.add_argument("--families", nargs="+", help="Kernel families to certify")
    cert.add_argument("--degrees", dest="sequence_degrees", type=int, nargs="+",
                      help="Degrees L of the ratio profiles")
    cert.add_argument("--max-m", type=int, help="Largest m tried")
    return parser


def _target_args(sub: argparse.ArgumentParser):
    sub.add_argument("--target", help="polynomial, bump, cap, green, green_bump, green_cap")
    sub.add_argument("--theta0", type=float, help="Cap radius of bump and cap targets")
    sub.add_argument("--target-s", type=float, help="Green order applied to the target")
    sub.add_argument("--mask-k", type=int, help="Mask smoothness (C-infinity if omitted)")
    sub.add_argument("--oversample", type=float, help="N / dim Pi_M for the rule degree")
    sub.add_argument("--exactness", choices=("relaxed", "frame"),
                     help="Rule degree accounting: 2 deg S, or the frame degree 2^(J + j_n + 2)")


def spread_bernstein_poly(args):
    """Map the positional form 'n p gamma Lmax' onto the matching flags."""
    n, p, gamma, lmax = args.bernstein_poly
    args.dim_n, args.p, args.gamma = int(n), p, float(gamma)
    if args.degrees is None:
        top = int(lmax)
        args.degrees = [2 ** k for k in range(3, top.bit_length())] or [top]


def dispatch(argv: Optional[List[str]] = None) -> int:
    """Parse argv, run one subcommand and return the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return 2
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    configure_logging(level)
    try:
        if getattr(args, "tau", None) is not None:
            args.tau = math.inf if args.tau.lower() == "inf" else float(args.tau)
        if getattr(args, "bernstein_poly", None):
            spread_bernstein_poly(args)
        config_manager, storage = create_managers(args)
        if args.command == "frames":
            cmd_frames(config_manager, storage, args)
        else:
            COMMANDS[args.command](config_manager, storage)
    except SbfError as e:
        print(e.one_line(), file=sys.stderr)
        return e.exit_code
    except ValueError as e:
        print(ValidationError(str(e)).one_line(), file=sys.stderr)
        return 2
    logger.info(f"Wrote {len(storage.written)} file(s) to {storage.output_dir}")
    return 0


def main():
    """Main CLI entry point."""
    sys.exit(dispatch())


if __name__ == "__main__":
    main()

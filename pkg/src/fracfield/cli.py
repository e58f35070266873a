"""Command-line frontend: eigen runs, oracle cross-checks, synthesis,
norm computations, and limit-experiment campaigns with CSV/SVG reports.

Exit codes are stable across subcommands: 0 success, 1 numeric or module
failure, 2 usage/config error.  Every output is a pure function of
(config, seed) — no clocks, hostnames or environment enter the numbers —
so a rerun with the same inputs is byte-identical.  Module errors are
reported as a one-line JSON record on stderr.
"""
import argparse
import dataclasses
import json
import math
import os
import sys

import numpy as np

from . import field, mercer, report, rkhs
from . import limits as limits_mod
from .config import parse_config, load_config
from .errors import (ConfigError, CoverageError, DomainError,
                     FracfieldError, ResolutionError)
from .kernel import RadialKernelSpec, kernel_closed_form, kernel_quadrature

COVCHECK_TOL = 1e-8
CORRIDOR = (0.5, 1.3)


def _error_record(exc):
    rec = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(rec, sort_keys=True), file=sys.stderr)


def _ensure_out(cfg):
    os.makedirs(cfg.out, exist_ok=True)
    return cfg.out


def _eigensystems(params, m0, grid_size, n_keep):
    return {m: mercer.mercer_decompose(
        RadialKernelSpec(params=params, m=m), grid_size, n_keep)
        for m in range(m0 + 1)}


def cmd_eigs(cfg, args):
    """Decompose every azimuthal order and report grid-refinement steps."""
    out = _ensure_out(cfg)
    m0 = cfg.truncation[0]
    rows = []
    for m in range(m0 + 1):
        spec = RadialKernelSpec(params=cfg.params, m=m)
        es = mercer.mercer_decompose(spec, cfg.grid_size, cfg.n_keep)
        mercer.save_eigensystem(es, out, f"eigs_m{m}")
        _, steps = mercer.eigen_convergence(
            spec, cfg.eigs_grids, cfg.eigs_n_top,
            n_keep=max(cfg.n_keep, cfg.eigs_n_top))
        for (a, b), step in zip(zip(cfg.eigs_grids, cfg.eigs_grids[1:]),
                                steps):
            rows.append((m, a, b, step))
    report.write_csv(os.path.join(out, "eigs_convergence.csv"),
                     ["m", "grid_from", "grid_to", "max_rel_step"], rows)
    print(f"eigs: wrote {m0 + 1} bundles and eigs_convergence.csv to {out}")
    return 0


def cmd_covcheck(cfg, args):
    """Closed form vs quadrature residual table; nonzero exit over tol.

    --perturb-gamma adds 1e-6 to the log of the Gamma-ratio factor of the
    closed form (test-only fault injection); the residual check must then
    fail, which is how the check's own sensitivity is audited.
    """
    out = _ensure_out(cfg)
    perturb = bool(getattr(args, "perturb_gamma", False))
    params = cfg.params
    if params.N < 2:
        raise ConfigError("covcheck requires params.N >= 2")
    radii = [(i + 1) / cfg.covcheck_radii for i in range(cfg.covcheck_radii)]
    shift = math.exp(1e-6)
    pref = math.pi ** (params.N / 2.0) / math.gamma(params.N / 2.0)
    h2 = 2.0 * params.H
    rows = []
    worst = 0.0
    for m in range(cfg.covcheck_m_max + 1):
        spec = RadialKernelSpec(params=params, m=m)
        pairs = [(r, s) for r in radii for s in radii if s <= r]
        closed = [kernel_closed_form(spec, r, s) for r, s in pairs]
        if perturb:
            # b_m = pref*[(r^2H+s^2H)*delta_m0 - (Gamma-ratio)*(...)]; the
            # shifted ratio multiplies only the second term.
            closed = [
                c * shift if m >= 1 else
                pref * (r ** h2 + s ** h2)
                - (pref * (r ** h2 + s ** h2) - c) * shift
                for c, (r, s) in zip(closed, pairs)]
        scale = max(abs(c) for c in closed)
        for c, (r, s) in zip(closed, pairs):
            q = kernel_quadrature(spec, r, s, nodes=cfg.covcheck_nodes)
            rel = abs(c - q) / scale
            worst = max(worst, rel)
            rows.append((m, r, s, c, q, rel))
    report.write_csv(os.path.join(out, "covcheck.csv"),
                     ["m", "r", "s", "closed_form", "quadrature",
                      "rel_residual"], rows)
    status = "PASS" if worst <= COVCHECK_TOL else "FAIL"
    print(f"covcheck: max relative residual {worst:.3e} "
          f"(tol {COVCHECK_TOL:g}) -> {status}")
    return 0 if worst <= COVCHECK_TOL else 1


def cmd_simulate(cfg, args):
    """Synthesize one sample over the configured points and serialize it."""
    out = _ensure_out(cfg)
    if cfg.simulate_points is None:
        raise ConfigError("simulate.points is required for the simulate "
                          "subcommand")
    pts = np.asarray(cfg.simulate_points, dtype=np.float64)
    if cfg.simulate_method == "cholesky":
        sample = field.cholesky_synthesize(cfg.params, pts, cfg.seed,
                                           replica=cfg.simulate_replica)
    elif cfg.simulate_method == "kl":
        eigs = _eigensystems(cfg.params, cfg.truncation[0], cfg.grid_size,
                             cfg.n_keep)
        sample = field.kl_synthesize(cfg.params, eigs, cfg.truncation, pts,
                                     cfg.seed, replica=cfg.simulate_replica)
    else:
        band = cfg.simulate_band or (0.0, math.inf)
        sample = field.spectral_synthesize(cfg.params, band, cfg.freq_grid,
                                           pts, cfg.seed,
                                           replica=cfg.simulate_replica)
    path = os.path.join(out, "sample.csv")
    field.save_field_csv(sample, path)
    print(f"simulate: wrote {pts.shape[0]} rows ({sample.method}) to {path}")
    return 0


def cmd_rkhs_norm(cfg, args):
    """Norm of a coefficient table (file) or of a point's representer."""
    out = _ensure_out(cfg)
    if cfg.rkhs_coeffs is not None:
        f = rkhs.read_coeff_csv(cfg.rkhs_coeffs)
    elif cfg.rkhs_point is not None:
        eigs = _eigensystems(cfg.params, cfg.truncation[0], cfg.grid_size,
                             cfg.n_keep)
        f = rkhs.representer(np.asarray(cfg.rkhs_point, dtype=np.float64),
                             eigs, cfg.truncation)
    else:
        raise ConfigError("rkhs-norm needs rkhsnorm.coeffs or "
                          "rkhsnorm.point")
    eigs = _eigensystems(f.params, f.truncation[0], cfg.grid_size,
                         cfg.n_keep)
    norm = rkhs.strassen_norm(f, eigs)
    report.write_csv(os.path.join(out, "rkhs_norm.csv"),
                     ["strassen_norm"], [(norm,)])
    print("rkhs-norm: |f|_S = %.17g" % norm)
    return 0


def _synthesis_grid(N, radii, n_angles):
    """Deterministic evaluation grid inside the unit ball."""
    pts = []
    if N == 1:
        for r in radii:
            pts += [[r], [-r]]
    elif N == 2:
        ang = 2.0 * math.pi * np.arange(n_angles) / n_angles
        for r in radii:
            pts += [[r * math.cos(a), r * math.sin(a)] for a in ang]
    elif N == 3:
        ang = 2.0 * math.pi * np.arange(n_angles) / n_angles
        for r in radii:
            pts += [[r * math.cos(a), r * math.sin(a), 0.0] for a in ang]
            pts += [[0.0, 0.0, r], [0.0, 0.0, -r]]
    else:
        raise ConfigError(f"limits grids support N in 1..3, got {N}")
    return np.asarray(pts, dtype=np.float64)


def cmd_limits(cfg, args):
    """Run one campaign: per-scale statistics CSV plus trend charts."""
    out = _ensure_out(cfg)
    if cfg.limits_schedule is None:
        raise ConfigError("limits.schedule is required for the limits "
                          "subcommand")
    eigs = _eigensystems(cfg.params, cfg.truncation[0], cfg.grid_size,
                         cfg.n_keep)
    source = limits_mod.KlFieldSource(
        params=cfg.params, eigensystems=eigs, truncation=cfg.truncation,
        seed=cfg.seed)
    grid = _synthesis_grid(cfg.params.N, cfg.limits_grid_radii,
                           cfg.limits_grid_angles)
    target = None
    if cfg.limits_enter_point is not None:
        rep = rkhs.representer(
            np.asarray(cfg.limits_enter_point, dtype=np.float64), eigs,
            cfg.truncation)
        nrm = rkhs.strassen_norm(rep, eigs)
        factor = cfg.limits_enter_scale / nrm
        target = rkhs.RkhsFunction(
            params=rep.params, truncation=rep.truncation,
            coeffs={k: factor * v for k, v in rep.coeffs.items()})
    try:
        clouds = limits_mod.build_cloud(
            cfg.limits_example, cfg.limits_schedule, source, grid,
            member_cap=cfg.limits_member_cap)
    except (CoverageError, ResolutionError) as exc:
        raise type(exc)(f"campaign aborted while building clouds: {exc}")
    stats = []
    for cloud in clouds:         # CSV rows in schedule order, always
        try:
            stats.append(limits_mod.cloud_stats(
                cloud, source, eigs, cfg.truncation, target=target))
        except (CoverageError, ResolutionError) as exc:
            raise type(exc)(
                f"campaign aborted at scale {cloud.scale:g}: {exc}")
    csv_path = os.path.join(out, "limits.csv")
    report.write_stats_csv(csv_path, stats)
    charts = report.stats_charts(stats, hlines=CORRIDOR)
    for name in sorted(charts):
        report.write_text(os.path.join(out, f"limits_{name}.svg"),
                          charts[name])
    print(f"limits: wrote {len(stats)} rows to {csv_path} and "
          f"{len(charts)} charts")
    return 0


_COMMANDS = (
    ("eigs", cmd_eigs, "eigen-decomposition bundles + convergence report"),
    ("covcheck", cmd_covcheck, "closed form vs quadrature residuals"),
    ("simulate", cmd_simulate, "synthesize a sample over configured points"),
    ("rkhs-norm", cmd_rkhs_norm, "norm of a coefficient table or "
                                 "representer"),
    ("limits", cmd_limits, "limit-experiment campaign with CSV/SVG output"),
)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fracfield",
        description="fractional-field eigensystems, samplers and "
                    "limit-experiment campaigns")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, help_text in _COMMANDS:
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", metavar="PATH",
                        help="run configuration file")
        sp.add_argument("--seed", type=int, metavar="U64",
                        help="override the config seed")
        sp.add_argument("--out", metavar="DIR",
                        help="override the output directory")
        if name == "covcheck":
            sp.add_argument("--perturb-gamma", action="store_true",
                            help="test-only fault injection into the "
                                 "closed form's Gamma-ratio log")
        sp.set_defaults(func=func)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(args.config) if args.config else parse_config("")
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError(f"--seed must be nonnegative, got "
                                  f"{args.seed}")
            cfg = dataclasses.replace(cfg, seed=args.seed)
        if args.out is not None:
            cfg = dataclasses.replace(cfg, out=args.out)
        return args.func(cfg, args)
    except ConfigError as exc:
        _error_record(exc)
        return 2
    except FracfieldError as exc:
        _error_record(exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())

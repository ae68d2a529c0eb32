"""Command-line driver: parameter scans written as CSV/JSON tables, and the verification suite.

Every subcommand accepts ``--config file.json`` whose keys are flag names
(``theta2_stop`` or ``theta2-stop``); flags given on the command line win.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, fisher, limits, multi, povm, tables, verify
from .fisher import SingularMetricError
from .povm import ConvergenceError, IntegrationConfig
from .scene import SceneParams

EXIT_FAILED_CHECK = 1
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3


class ConfigError(ValueError):
    pass


def scan_range(start, stop, points, log=False):
    points = int(points)
    if points < 2:
        raise ConfigError("a scan needs at least 2 points")
    if log:
        if start <= 0 or stop <= 0:
            raise ConfigError("logarithmic scans need positive endpoints")
        return np.geomspace(start, stop, points)
    return np.linspace(start, stop, points)


def parallel_map(fn, items, threads):
    """Ordered map; results follow input order whatever the completion order."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _floats(values):
    if isinstance(values, (int, float)):
        return [float(values)]
    return [float(v) for v in values]


def _integration(args) -> IntegrationConfig:
    return IntegrationConfig(b=args.b_cutoff, radial_nodes=int(args.radial_nodes),
                             phase_nodes=int(args.phase_nodes), fd_step=float(args.fd_step),
                             check_convergence=not args.no_convergence_check)


def _integration_meta(cfg: IntegrationConfig):
    return {"b": cfg.b, "radial_nodes": cfg.radial_nodes, "phase_nodes": cfg.phase_nodes,
            "fd_step": cfg.fd_step, "check_convergence": cfg.check_convergence}


# -- subcommands -------------------------------------------------------------------------------
# Each returns (columns, rows, meta); rows are lists of plain numbers or strings.


def cmd_qfi_scan(args):
    u0 = float(args.u0)
    theta2 = scan_range(args.theta2_start, args.theta2_stop, args.points, args.log)
    rows = []
    for e in _floats(args.strengths):
        for t2 in theta2:
            dphi = u0 * t2
            f22 = float(fisher.qfi_separation(e, dphi, u0))
            f11 = float(fisher.qfi_centroid(e, dphi, u0))
            rows.append([e, float(t2), dphi, f22, f11, f22 / (e * u0**2), f11 / (e * u0**2)])
    cols = ["strength", "theta2", "dphi", "F22", "F11", "F22_per_strength", "F11_per_strength"]
    return cols, rows, {"u0": u0}


def cmd_pmn_scan(args):
    e, M, N = float(args.strength), int(args.mmax), int(args.nmax)
    dphis = scan_range(args.dphi_start, args.dphi_stop, args.points, args.log)
    c = float(args.misalignment)
    cfg = _integration(args)

    def point(dphi):
        if c == 0:
            d = povm.aligned_pmn_from_phases(e, dphi, M, N)
        else:
            # centroid phase 0, so the delay is -c
            d = povm.misaligned_pmn_from_phases(e, 0.5 * dphi, -0.5 * dphi, -c, cfg, M, N)
        return [float(dphi)] + [float(d.probs[m, n]) for m in range(M + 1) for n in range(N + 1)]

    rows = parallel_map(point, dphis, args.threads)
    cols = ["dphi"] + [f"P_{m}_{n}" for m in range(M + 1) for n in range(N + 1)]
    meta = {"strength": e, "misalignment": c}
    if c != 0:
        meta["integration"] = _integration_meta(cfg)
    return cols, rows, meta


def cmd_truncated_fi(args):
    e, u0 = float(args.strength), float(args.u0)
    theta2 = scan_range(args.theta2_start, args.theta2_stop, args.points, args.log)
    cutoffs = [int(k) for k in args.cutoffs]
    full = povm.full_counting_window(e)
    jobs = [(k, t2) for k in cutoffs + [full] for t2 in theta2]

    def point(job):
        k, t2 = job
        (row,) = povm.truncated_fi_scan(e, [t2], k, k, u0, overflow=args.overflow)
        _, fi, q = row
        return [k, float(t2), fi, q, fi / q if q > 0 else float("nan")]

    rows = parallel_map(point, jobs, args.threads)
    return ["cutoff", "theta2", "FI", "QFI", "FI_over_QFI"], rows, {
        "strength": e, "u0": u0, "overflow": bool(args.overflow), "full_counting_cutoff": full}


def cmd_cutoff_scan(args):
    e, u0 = float(args.strength), float(args.u0)
    M, N = int(args.mmax), int(args.nmax)
    bs = scan_range(args.b_start, args.b_stop, args.points, args.log)
    scene = SceneParams.reduced(e, 0.0, float(args.theta2), u0)
    base = _integration(args)
    q = fisher.qfi_separation_closed(scene)

    def point(b):
        cfg = IntegrationConfig(b=float(b), radial_nodes=base.radial_nodes, phase_nodes=base.phase_nodes,
                                fd_step=base.fd_step, check_convergence=base.check_convergence)
        fi = povm.misaligned_fi(scene, float(args.misalignment), cfg, M, N)
        return [float(b), fi, q, fi / q]

    rows = parallel_map(point, bs, args.threads)
    return ["b", "FI", "QFI", "FI_over_QFI"], rows, {
        "strength": e, "u0": u0, "theta2": float(args.theta2), "misalignment": float(args.misalignment),
        "M": M, "N": N, "default_b": base.cutoff(e), "integration": _integration_meta(base)}


def cmd_misalignment_scan(args):
    e, u0 = float(args.strength), float(args.u0)
    M, N = int(args.mmax), int(args.nmax)
    if args.theta2_values:
        theta2 = _floats(args.theta2_values)
    else:
        theta2 = scan_range(args.theta2_start, args.theta2_stop, args.points, args.log)
    if args.c_range:
        start, stop, points = args.c_range
        cs = list(scan_range(start, stop, points, log=True))
    else:
        cs = _floats(args.c_values)
    cfg = _integration(args)

    def point(job):
        t2, c = job
        (row,) = povm.misalignment_scan(e, [t2], [c], cfg, M, N, u0)
        return list(row) + [row[2] / row[3]]

    rows = parallel_map(point, [(t2, c) for t2 in theta2 for c in cs], args.threads)
    return ["theta2", "c", "FI", "QFI", "FI_over_QFI"], rows, {
        "strength": e, "u0": u0, "M": M, "N": N, "integration": _integration_meta(cfg)}


def cmd_compare_conventional(args):
    cfg = _integration(args)
    angles = _floats(args.angles_arcsec)

    def point(angle):
        scene = limits.array_scene(angle, args.wavelength, args.baseline, args.strength, args.centroid_phase)
        q = fisher.qfi_separation_closed(scene)
        conv = limits.conventional_fi_settings(scene, cfg, limits.CONVENTIONAL_DELAYS)
        quad = limits.conventional_fi_settings(scene, cfg, limits.QUADRATURE_DELAYS)
        return [angle, angle * limits.ARCSEC, q, conv[0], conv[1], q / np.mean(conv),
                quad[0], quad[1], q / np.mean(quad)]

    rows = parallel_map(point, angles, args.threads)
    cols = ["angle_arcsec", "angle_rad", "QFI", "FI_delay_0", "FI_delay_pi", "ratio",
            "FI_delay_0_alt", "FI_delay_pi_2_alt", "ratio_alt"]
    return cols, rows, {"wavelength": args.wavelength, "baseline": args.baseline, "strength": args.strength,
                        "centroid_phase": args.centroid_phase, "delays": list(limits.CONVENTIONAL_DELAYS),
                        "alt_delays": list(limits.QUADRATURE_DELAYS), "integration": _integration_meta(cfg)}


def cmd_weak_limit(args):
    if args.table == "consistency":
        dphis = scan_range(args.dphi_start, args.dphi_stop, args.points, args.log)
        rows = [list(r) for r in limits.strong_weak_consistency(_floats(args.strengths), dphis)]
        return ["strength", "dphi", "F22_per_strength", "P10_conditional", "D1", "k22", "k11"], rows, {}
    xis = scan_range(args.xi_start, args.xi_stop, args.points, args.log)
    scene = SceneParams.reduced(1e-3, 0.0, float(args.dphi))
    wq = limits.weak_qfi(scene)
    rows = []
    for xi in xis:
        I11, I22, I12 = limits.weak_fi_misaligned(scene, float(xi))
        rows.append([float(xi), I11, I22, I12, float(wq[0, 0]), float(wq[1, 1])])
    return ["xi", "I11", "I22", "I12", "Q11", "Q22"], rows, {"dphi": float(args.dphi), "u0": 1.0}


def cmd_dirty_beam(args):
    d = float(args.half_width)
    pattern = limits.SamplingPattern.rectangle(d, int(args.grid), float(args.spacing))
    beam = limits.dirty_beam(pattern)
    cell = 2 * math.pi / (int(args.grid) * float(args.spacing))
    rows = []
    for axis in (0, 1):
        null = limits.first_null(pattern, beam, axis)
        rows.append([axis, null, math.pi / d, abs(null - math.pi / d) / cell])
    if args.matrix_out:
        tables.write_matrix_csv(args.matrix_out, np.real(beam))
    if args.pgm:
        tables.write_pgm(args.pgm, np.real(beam))
    return ["axis", "first_null", "pi_over_d", "error_cells"], rows, {
        "half_width": d, "grid": int(args.grid), "spacing": float(args.spacing)}


def cmd_multi_qfi(args):
    if args.scene is None:
        raise ConfigError("multi-qfi needs --scene or a 'scene' entry in the config")
    doc = args.scene
    if isinstance(doc, str):
        with open(doc) as fh:
            doc = json.load(fh)
    ms = multi.MultiScene.from_dict(doc)
    if args.centroid_separation:
        F = multi.centroid_separation_qfi(ms, args.centroid_separation, thermal_floor=args.thermal_floor)
        names = [f"theta1_{args.centroid_separation}", f"theta2_{args.centroid_separation}"]
    else:
        sel = [(s, ax) for s in range(ms.n_sources) for ax in ("x", "y")]
        F = multi.multi_qfi(ms, sel, thermal_floor=args.thermal_floor)
        names = [f"{ax}{s}" for s, ax in sel]
    rows = [[names[i], names[j], float(F[i, j])] for i in range(len(names)) for j in range(len(names))]
    return ["param_i", "param_j", "F"], rows, {"scene": ms.to_dict()}


def cmd_verify(args):
    rows = [list(r) for r in verify.run_checks(int(args.seed), int(args.samples))]
    return ["check", "value", "tolerance", "passed"], rows, {"samples": int(args.samples)}


# -- parser ------------------------------------------------------------------------------------


def _add_range(p, name, start, stop, points=None, log=False):
    p.add_argument(f"--{name}-start", type=float, default=start)
    p.add_argument(f"--{name}-stop", type=float, default=stop)
    if points is not None:
        p.add_argument("--points", type=int, default=points)
        p.add_argument("--log", action="store_true", default=log, help="logarithmic spacing")


def _add_integration(p):
    g = p.add_argument_group("quadrature")
    g.add_argument("--b-cutoff", type=float, default=None, help="amplitude cutoff (default: adaptive)")
    g.add_argument("--radial-nodes", type=int, default=64)
    g.add_argument("--phase-nodes", type=int, default=128)
    g.add_argument("--fd-step", type=float, default=1e-5, help="finite-difference step in phase units")
    g.add_argument("--no-convergence-check", action="store_true")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of flag values (flags win)")
    common.add_argument("--out", default="-", help="output path ('-' for stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)

    ap = argparse.ArgumentParser(prog="thermal-superres", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="subcommand", required=True)
    subs = {}

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(handler=fn)
        subs[name] = p
        return p

    p = add("qfi-scan", cmd_qfi_scan, "closed-form QFI against separation")
    p.add_argument("--strengths", type=float, nargs="+", default=[0.2, 1.0, 5.0])
    p.add_argument("--u0", type=float, default=1.0)
    _add_range(p, "theta2", 0.0, 4 * math.pi, 201)

    p = add("pmn-scan", cmd_pmn_scan, "photon-count probabilities against phase difference")
    p.add_argument("--strength", type=float, default=0.1)
    p.add_argument("--mmax", type=int, default=1)
    p.add_argument("--nmax", type=int, default=1)
    p.add_argument("--misalignment", type=float, default=0.0, help="delay offset c (0 = aligned)")
    _add_range(p, "dphi", 0.0, 4 * math.pi, 201)
    _add_integration(p)

    p = add("truncated-fi", cmd_truncated_fi, "FI of photon counting resolved up to a cutoff")
    p.add_argument("--strength", type=float, default=0.1)
    p.add_argument("--u0", type=float, default=1.0)
    p.add_argument("--cutoffs", type=int, nargs="+", default=[1, 2, 3])
    p.add_argument("--overflow", action="store_true", help="keep the discarded mass as one outcome")
    _add_range(p, "theta2", 1e-4, 2 * math.pi, 101)

    p = add("cutoff-scan", cmd_cutoff_scan, "misaligned FI against the amplitude cutoff b")
    p.add_argument("--strength", type=float, default=0.01)
    p.add_argument("--u0", type=float, default=1.0)
    p.add_argument("--theta2", type=float, default=1e-3)
    p.add_argument("--misalignment", type=float, default=1e-6)
    p.add_argument("--mmax", type=int, default=3)
    p.add_argument("--nmax", type=int, default=3)
    _add_range(p, "b", 0.05, 1.0, 20)
    _add_integration(p)

    p = add("misalignment-scan", cmd_misalignment_scan, "misaligned FI against separation and c")
    p.add_argument("--strength", type=float, default=0.01)
    p.add_argument("--u0", type=float, default=1.0)
    p.add_argument("--c-values", type=float, nargs="+", default=[1e-4, 1e-3, 1e-2])
    p.add_argument("--c-range", type=float, nargs=3, default=None, metavar=("START", "STOP", "POINTS"),
                   help="log-spaced misalignments; replaces --c-values")
    p.add_argument("--theta2-values", type=float, nargs="+", default=None, help="replaces the theta2 range")
    p.add_argument("--mmax", type=int, default=3)
    p.add_argument("--nmax", type=int, default=3)
    _add_range(p, "theta2", 1e-4, 1e-1, 13, log=True)
    _add_integration(p)

    p = add("compare-conventional", cmd_compare_conventional, "optimal vs fixed-delay measurement")
    p.add_argument("--angles-arcsec", type=float, nargs="+", default=[0.05, 0.01, 0.005])
    p.add_argument("--wavelength", type=float, default=5e-3, help="metres")
    p.add_argument("--baseline", type=float, default=1e4, help="metres")
    p.add_argument("--strength", type=float, default=0.01)
    p.add_argument("--centroid-phase", type=float, default=2 * math.pi / 3)
    _add_integration(p)

    p = add("weak-limit", cmd_weak_limit, "one-photon limit tables")
    p.add_argument("--table", choices=("consistency", "misaligned"), default="consistency")
    p.add_argument("--strengths", type=float, nargs="+", default=[1e-4, 1e-3, 1e-2])
    p.add_argument("--dphi", type=float, default=1.0, help="phase difference for the misaligned table")
    _add_range(p, "dphi", 0.1, 2 * math.pi - 0.1, 9)
    _add_range(p, "xi", 0.0, 0.5 * math.pi)

    p = add("dirty-beam", cmd_dirty_beam, "dirty beam of a rectangular sampling pattern")
    p.add_argument("--half-width", type=float, default=8.0)
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--spacing", type=float, default=1.0)
    p.add_argument("--matrix-out", default=None, help="write the beam as a CSV matrix")
    p.add_argument("--pgm", default=None, help="write the beam as an 8-bit PGM image")

    p = add("multi-qfi", cmd_multi_qfi, "QFI matrix for many sources and detectors")
    p.add_argument("--scene", default=None, help="JSON file with k, s0, sources, detectors, eta")
    p.add_argument("--centroid-separation", choices=("x", "y"), default=None,
                   help="two sources: report (centroid, separation) along this axis")
    p.add_argument("--thermal-floor", type=float, default=0.0,
                   help="occupation added to every detector mode; needed when some mode is vacuum (try 1e-9)")

    p = add("verify", cmd_verify, "run the consistency and oracle checks")
    p.add_argument("--samples", type=int, default=10**6)

    return ap, subs


def _load_config(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    return {str(k).replace("-", "_"): v for k, v in doc.items()}


def parse_args(argv):
    ap, subs = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        cfg = _load_config(args.config)
        chosen = cfg.pop("subcommand", args.subcommand)
        if chosen != args.subcommand:
            raise ConfigError(f"config is for '{chosen}', not '{args.subcommand}'")
        known = set(vars(args)) - {"handler", "subcommand", "config"}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise ConfigError(f"unknown config keys for {args.subcommand}: {', '.join(unknown)}")
        subs[args.subcommand].set_defaults(**cfg)
        args = ap.parse_args(argv)
    if args.threads < 1:
        raise ConfigError("--threads must be at least 1")
    return args


def _meta(args, extra):
    skip = {"handler", "config", "out", "format", "threads"}
    params = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    meta = {"subcommand": args.subcommand, "version": __version__, "numpy": np.__version__}
    meta["params"] = params
    meta.update(extra)
    return meta


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
        cols, rows, extra = args.handler(args)
        text = tables.write_table(args.out, cols, rows, _meta(args, extra), args.format)
    except SystemExit as exc:
        return int(exc.code or 0)
    # SingularMetricError is a ValueError subclass, so it has to be caught first
    except (ConvergenceError, SingularMetricError) as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ConfigError, ValueError, KeyError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out in (None, "-"):
        sys.stdout.write(text)
    if args.subcommand == "verify" and not all(r[-1] for r in rows):
        return EXIT_FAILED_CHECK
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

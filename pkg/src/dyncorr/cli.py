"""``dyncorr`` command-line interface.

Exit codes::

    0   success                      5   integrator failure (two-atom)
    1   usage / configuration error  6   bracket failure (zz-thermal)
    2   channel file parse error     10  unitary is not maximally correlated
    3   CPT / unitarity violation    20  selftest failure
    4   dimension mismatch

Standard output carries only machine-readable results (JSON or the selftest
table); diagnostics go to standard error.  Each successful run writes one JSON
manifest.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, config
from .channels import Channel, ChannelFormatError, choi_state, load_channel
from .correlation import error_probability, i_bar, is_maximally_correlated, reshuffle_unitarity_defect
from .errors import (
    AsymmetricDimensions,
    BracketFailure,
    DimensionMismatch,
    DyncorrError,
    IntegrationError,
    InvariantViolation,
    NotUnitary,
)

log = logging.getLogger("dyncorr")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_CPT = 3
EXIT_DIMS = 4
EXIT_INTEGRATOR = 5
EXIT_BRACKET = 6
EXIT_NOT_MAXIMAL = 10
EXIT_SELFTEST = 20


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def float_list(text: str) -> list:
    items = [s for s in (x.strip() for x in text.split(",")) if s]
    if not items:
        raise argparse.ArgumentTypeError("expected a non-empty comma-separated list")
    try:
        return [float(x) for x in items]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def dims_pair(text: str) -> tuple:
    try:
        a, b = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected d_A,d_B") from None
    if a < 1 or b < 1:
        raise argparse.ArgumentTypeError("dimensions must be positive")
    return a, b


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")
    sys.stdout.flush()


def _manifest_path(args, default_name: str) -> Path:
    return Path(args.manifest) if args.manifest else Path(default_name)


def _write_manifest(path, command, parameters, outputs=(), extra=None):
    from .experiments import build_manifest, write_manifest

    write_manifest(path, build_manifest(command, parameters, outputs, extra))
    log.info("manifest written to %s", path)


def _load(path) -> Channel:
    try:
        return load_channel(path)
    except OSError as exc:
        raise ChannelFormatError(f"cannot read {path}: {exc}") from None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_measure(args) -> int:
    try:
        ch = _load(args.channel_file)
    except ChannelFormatError as exc:
        log.error("parse error: %s", exc)
        return EXIT_PARSE
    except DimensionMismatch as exc:
        log.error("dimension mismatch: %s", exc)
        return EXIT_DIMS
    except (InvariantViolation, NotUnitary) as exc:
        log.error("not a CPT map: %s", exc)
        return EXIT_CPT
    dims = tuple(args.dims) if args.dims else ch.dims
    if dims != ch.dims:
        log.error("dimension mismatch: --dims %s but file declares %s", dims, ch.dims)
        return EXIT_DIMS
    try:
        rho = choi_state(ch, *dims)
        report = i_bar(rho)
    except (AsymmetricDimensions, DimensionMismatch) as exc:
        log.error("dimension mismatch: %s", exc)
        return EXIT_DIMS
    result = {
        "i_bar": report.i_bar,
        "mutual_information_nats": report.mutual_information,
        "entropy_AA_nats": report.entropy_AA,
        "entropy_BB_nats": report.entropy_BB,
        "entropy_total_nats": report.entropy_total,
        "d": report.d,
        "p_error": error_probability(rho),
    }
    _write_manifest(_manifest_path(args, "dyncorr-measure.manifest.json"), "measure",
                    {"channel_file": str(args.channel_file), "dims": list(dims)},
                    extra={"result": result})
    _emit(result)
    return EXIT_OK


def cmd_verify_unitary(args) -> int:
    try:
        ch = _load(args.channel_file)
    except ChannelFormatError as exc:
        log.error("parse error: %s", exc)
        return EXIT_PARSE
    except DimensionMismatch as exc:
        log.error("dimension mismatch: %s", exc)
        return EXIT_DIMS
    except (InvariantViolation, NotUnitary) as exc:
        log.error("not a valid channel: %s", exc)
        return EXIT_CPT
    d_A, d_B = ch.dims
    if d_A != d_B:
        log.error("dimension mismatch: parties must have equal dimension, got %s", ch.dims)
        return EXIT_DIMS
    if ch.is_unitary:
        u = ch.matrix
    elif len(ch.operators) == 1:
        u = ch.operators[0]
    else:
        log.error("channel has %d Kraus operators; a maximally correlated map must be unitary",
                  len(ch.operators))
        return EXIT_CPT
    try:
        maximal = is_maximally_correlated(u, d_A)
    except NotUnitary as exc:
        log.error("not unitary: %s", exc)
        return EXIT_CPT
    result = {
        "maximally_correlated": bool(maximal),
        "i_bar": i_bar(choi_state(Channel.unitary(u), d_A, d_B)).i_bar,
        "reshuffle_unitarity_defect": reshuffle_unitarity_defect(u, d_A),
    }
    _write_manifest(_manifest_path(args, "dyncorr-verify-unitary.manifest.json"), "verify-unitary",
                    {"channel_file": str(args.channel_file)}, extra={"result": result})
    _emit(result)
    return EXIT_OK if maximal else EXIT_NOT_MAXIMAL


def _companion(path: Path, suffix: str) -> Path:
    return path.with_name(f"{path.stem}{suffix}{path.suffix or '.csv'}")


def cmd_two_atom(args) -> int:
    from .experiments import default_time_grid, distance_sweep, write_csv
    from .lindblad import EvolutionConfig
    from .models import TwoAtomParams

    if any(r < 0 for r in args.r):
        raise UsageError("--r values must be non-negative")
    if not (0 < args.t_min < args.t_max) or args.t_points < 2:
        raise UsageError("need 0 < --t-min < --t-max and --t-points >= 2")
    try:
        template = TwoAtomParams(omega=args.omega, dipole_norm=args.dipole, theta=args.theta)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    grid = default_time_grid(args.t_points, args.t_min, args.t_max)
    cfg = EvolutionConfig()
    started = time.perf_counter()
    try:
        sweep = distance_sweep(args.r, grid, template, cfg, workers=args.workers)
    except IntegrationError as exc:
        log.error("integrator failure: %s", exc)
        return EXIT_INTEGRATOR
    out = Path(args.out)
    peaks_path = _companion(out, "_peaks")
    write_csv(sweep.traces, out)
    write_csv(sweep.peaks, peaks_path)
    params = {
        "r": args.r, "omega": args.omega, "dipole_norm": args.dipole, "theta": args.theta,
        "gamma0": template.gamma0, "time_grid": {"unit": "1/gamma0", "min": args.t_min,
                                                 "max": args.t_max, "points": args.t_points,
                                                 "spacing": "log"},
        "evolution": {"rel_tol": cfg.rel_tol, "abs_tol": cfg.abs_tol, "max_steps": cfg.max_steps},
        "workers": args.workers,
    }
    stats = sweep.stats
    _write_manifest(
        args.manifest or f"{out}.manifest.json", "two-atom", params, [out, peaks_path],
        extra={"trajectory_stats": vars(stats), "elapsed_s": time.perf_counter() - started})
    return EXIT_OK


def cmd_zz_thermal(args) -> int:
    from .experiments import isoline_search, p_error_grid, write_csv
    from .lindblad import EvolutionConfig
    from .models import ZZThermalParams

    for target in args.target_p_error:
        if not 0.0 < target < 1.0:
            raise UsageError(f"--target-p-error values must lie in (0, 1), got {target}")
    if any(T < 0 for T in args.T):
        raise UsageError("--T values must be non-negative")
    if len(args.t_bracket) != 2 or not 0 < args.t_bracket[0] < args.t_bracket[1]:
        raise UsageError("--t-bracket must be lo,hi with 0 < lo < hi")
    try:
        template = ZZThermalParams(J=args.J, gamma0=args.gamma0, omega=args.omega)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cfg = EvolutionConfig()
    records = []
    try:
        for target in args.target_p_error:
            records.extend(isoline_search(template, target, args.T, tuple(args.t_bracket), cfg,
                                          workers=args.workers))
    except BracketFailure as exc:
        log.error("bracket failure at T=%s: %s", exc.T, exc)
        return EXIT_BRACKET
    except IntegrationError as exc:
        log.error("integrator failure: %s", exc)
        return EXIT_INTEGRATOR
    grid_times = np.linspace(args.grid_t_max / args.grid_t_points, args.grid_t_max, args.grid_t_points)
    try:
        grid = p_error_grid(template, grid_times, args.T, cfg, workers=args.workers)
    except IntegrationError as exc:
        log.error("integrator failure: %s", exc)
        return EXIT_INTEGRATOR
    out = Path(args.out)
    grid_path = _companion(out, "_grid")
    write_csv(records, out)
    write_csv(grid, grid_path)
    params = {
        "J": args.J, "gamma0": args.gamma0, "omega": args.omega,
        "target_p_error": args.target_p_error, "T": args.T,
        "t_bracket": {"unit": "1/gamma0", "values": args.t_bracket},
        "grid": {"unit": "1/gamma0", "t_max": args.grid_t_max, "points": args.grid_t_points},
        "include_local_hamiltonian": False,
        "evolution": {"rel_tol": cfg.rel_tol, "abs_tol": cfg.abs_tol, "max_steps": cfg.max_steps},
        "workers": args.workers,
    }
    _write_manifest(args.manifest or f"{out}.manifest.json", "zz-thermal", params, [out, grid_path])
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    results = run_selftest(seed=args.seed)
    width = max(len(r.name) for r in results)
    for r in results:
        sys.stdout.write(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.detail}\n")
    sys.stdout.flush()
    failed = [r.name for r in results if not r.passed]
    if failed:
        for name in failed:
            log.error("invariant failed: %s", name)
        return EXIT_SELFTEST
    _write_manifest(_manifest_path(args, "dyncorr-selftest.manifest.json"), "selftest",
                    {"seed": args.seed},
                    extra={"results": [{"name": r.name, "passed": r.passed, "detail": r.detail}
                                       for r in results]})
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dyncorr", description="Quantify spatial correlations of two-party quantum dynamics.")
    p.add_argument("--version", action="version", version=f"dyncorr {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    p.add_argument("--tol", action="append", default=[], metavar="KEY=VALUE",
                   help="override one entry of the tolerance record (repeatable)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--manifest", help="manifest path (default depends on the command)")

    m = sub.add_parser("measure", parents=[common], help="i_bar of a channel file")
    m.add_argument("channel_file")
    m.add_argument("--dims", type=dims_pair, help="expected d_A,d_B (must match the file)")
    m.set_defaults(func=cmd_measure)

    v = sub.add_parser("verify-unitary", parents=[common], help="maximal-correlation test of a unitary")
    v.add_argument("channel_file")
    v.set_defaults(func=cmd_verify_unitary)

    workers_default = os.cpu_count() or 1

    t = sub.add_parser("two-atom", parents=[common], help="distance sweep for two radiating atoms")
    t.add_argument("--r", type=float_list, default=[0.0, 0.1, 0.5, 1.0, 2.0, 10.0],
                   help="comma-separated separations in units of 1/omega")
    t.add_argument("--t-min", type=float, default=1e-3, help="first grid time, units of 1/gamma0")
    t.add_argument("--t-max", type=float, default=50.0, help="last grid time, units of 1/gamma0")
    t.add_argument("--t-points", type=int, default=200)
    t.add_argument("--theta", type=float, default=0.0)
    t.add_argument("--omega", type=float, default=1.0)
    t.add_argument("--dipole", type=float, default=2.0, help="|d|")
    t.add_argument("--workers", type=int, default=workers_default)
    t.add_argument("--out", default="two_atom.csv")
    t.set_defaults(func=cmd_two_atom)

    z = sub.add_parser("zz-thermal", parents=[common], help="constant-P_error isolines for ZZ-coupled qubits")
    z.add_argument("--J", type=float, default=1.0)
    z.add_argument("--gamma0", type=float, default=4.0 / 3.0)
    z.add_argument("--omega", type=float, default=1.0)
    z.add_argument("--target-p-error", type=float_list, default=[0.1])
    z.add_argument("--T", type=float_list, default=[float(x) for x in np.linspace(0.05, 5.0, 12)],
                   help="comma-separated bath temperatures in units of omega")
    z.add_argument("--t-bracket", type=float_list, default=[1e-4, 10.0], help="lo,hi in units of 1/gamma0")
    z.add_argument("--grid-t-max", type=float, default=1.0, help="inset grid extent, units of 1/gamma0")
    z.add_argument("--grid-t-points", type=int, default=50)
    z.add_argument("--workers", type=int, default=workers_default)
    z.add_argument("--out", default="zz_thermal.csv")
    z.set_defaults(func=cmd_zz_thermal)

    s = sub.add_parser("selftest", parents=[common], help="run the embedded invariant suites")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_selftest)
    return p


def _configure_logging(verbose: bool) -> None:
    pkg = logging.getLogger("dyncorr")
    for h in [h for h in pkg.handlers if getattr(h, "_dyncorr_cli", False)]:
        pkg.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    handler._dyncorr_cli = True
    pkg.addHandler(handler)
    pkg.setLevel(logging.INFO if verbose else logging.WARNING)
    pkg.propagate = False


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        tol = config.profile_from_env()
        if args.tol:
            tol = tol.replace(**config.parse_overrides(args.tol))
    except (ValueError, TypeError) as exc:
        log.error("bad tolerance configuration: %s", exc)
        return EXIT_USAGE
    try:
        with config.tolerances(tol):
            return args.func(args)
    except UsageError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except DyncorrError as exc:  # anything unanticipated still gets a clean message
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

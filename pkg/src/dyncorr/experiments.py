"""Sweeps over the two physical models, CSV output and run manifests.

* :func:`distance_sweep` -- i_bar(t) traces and their maxima versus atom
  separation for the radiating-atoms model.
* :func:`isoline_search` -- times at which the ZZ-thermal error map reaches a
  fixed error probability, and i_bar there, versus bath temperature.
* :func:`p_error_grid` -- error probability on a (t, T) grid.

Every parameter point is an independent job; ``workers > 1`` fans them out to
a process pool and results come back in input order.
"""
from __future__ import annotations

import csv
import dataclasses
import datetime as _dt
import hashlib
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import __version__, _kernels
from .config import get_tolerances
from .correlation import error_probability, i_bar
from .errors import BracketFailure, IntegrationError
from .lindblad import EvolutionConfig, TrajectoryStats, evolve_checkpoints, evolve_choi_checkpoints
from .channels import max_entangled_state
from .models import TwoAtomParams, ZZThermalParams, two_atom_generator, zz_thermal_generator

log = logging.getLogger(__name__)

DEFAULT_T_VALUES = tuple(float(x) for x in np.linspace(0.05, 5.0, 12))
# bisection target, well inside the 1e-6 contract so i_bar along the line is resolved
ISOLINE_P_TOL = 1e-10
DEFAULT_T_BRACKET = (1e-4, 10.0)


@dataclass
class SweepRecord:
    parameters: dict
    i_bar: float
    p_error: float | None = None

    def __post_init__(self):
        if not -1e-12 <= self.i_bar <= 1 + 1e-12:
            raise ValueError(f"i_bar {self.i_bar} outside [0, 1]")
        if self.p_error is not None and not -1e-12 <= self.p_error <= 1 + 1e-12:
            raise ValueError(f"p_error {self.p_error} outside [0, 1]")


@dataclass
class DistanceSweep:
    traces: list      # one record per (r, t)
    peaks: list       # one record per r
    stats: TrajectoryStats = field(default_factory=TrajectoryStats)


def default_time_grid(points: int = 200, lo: float = 1e-3, hi: float = 50.0) -> np.ndarray:
    """Log-spaced grid in units of 1/gamma0."""
    return np.geomspace(lo, hi, points)


def _pool_map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def _merge_stats(parts: Iterable[TrajectoryStats]) -> TrajectoryStats:
    out = TrajectoryStats()
    for s in parts:
        out.checkpoints += s.checkpoints
        out.steps += s.steps
        out.max_trace_drift = max(out.max_trace_drift, s.max_trace_drift)
        out.max_hermiticity_defect = max(out.max_hermiticity_defect, s.max_hermiticity_defect)
        out.min_eigenvalue = min(out.min_eigenvalue, s.min_eigenvalue)
    return out


# ---------------------------------------------------------------------------
# radiating atoms
# ---------------------------------------------------------------------------

def _distance_job(args):
    params, gamma0_times, cfg = args
    gen = two_atom_generator(params)
    g0 = params.gamma0
    times = np.asarray(gamma0_times, dtype=float) / g0
    stats = TrajectoryStats()
    try:
        states = evolve_choi_checkpoints(gen, times, cfg, stats=stats)
    except IntegrationError as exc:
        exc.context.setdefault("r", params.r)
        raise
    values = [i_bar(s).i_bar for s in states]
    traces = [
        SweepRecord({"r": params.r, "t": float(t) * params.omega, "gamma0_t": float(gt)}, v)
        for t, gt, v in zip(times, gamma0_times, values)
    ]
    k = int(np.argmax(values))
    at_boundary = k in (0, len(values) - 1)
    if at_boundary:
        log.warning("r=%g: i_bar peaks at the edge of the time grid (gamma0 t = %g)",
                    params.r, gamma0_times[k])
    peak = SweepRecord({
        "r": params.r,
        "t_peak": float(times[k]) * params.omega,
        "gamma0_t_peak": float(gamma0_times[k]),
        "peak_at_boundary": float(at_boundary),
    }, values[k])
    return traces, peak, stats


def distance_sweep(r_values: Sequence[float], time_grid: Sequence[float] | None = None,
                   template: TwoAtomParams | None = None, cfg: EvolutionConfig | None = None,
                   workers: int = 1) -> DistanceSweep:
    """i_bar along one trajectory per separation r (time grid in units of 1/gamma0).

    Separations and grid points must be non-empty; r may be zero, grid times
    must be positive and ascending.
    """
    r_values = [float(r) for r in r_values]
    if not r_values:
        raise ValueError("r_values must be non-empty")
    grid = default_time_grid() if time_grid is None else np.asarray(time_grid, dtype=float)
    if grid.size == 0 or grid[0] <= 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("time grid must be non-empty, positive and strictly ascending")
    template = template or TwoAtomParams()
    jobs = [(dataclasses.replace(template, r=r), grid, cfg) for r in r_values]
    results = _pool_map(_distance_job, jobs, workers)
    traces = [rec for tr, _, _ in results for rec in tr]
    peaks = [pk for _, pk, _ in results]
    return DistanceSweep(traces, peaks, _merge_stats(st for _, _, st in results))


# ---------------------------------------------------------------------------
# ZZ-coupled qubits in thermal baths
# ---------------------------------------------------------------------------

def _error_generator(template: ZZThermalParams, T: float):
    p = dataclasses.replace(template, T=float(T), include_local_hamiltonian=False)
    return zz_thermal_generator(p), p


def _isoline_job(args):
    template, target, T, bracket, coarse_points, cfg, p_tol = args
    tol = get_tolerances()
    p_tol = min(p_tol, tol.bisection)
    gen, p = _error_generator(template, T)
    ext = gen.extend(gen.dim)
    lo_t, hi_t = bracket[0] / p.gamma0, bracket[1] / p.gamma0
    coarse = np.geomspace(lo_t, hi_t, coarse_points)
    stats = TrajectoryStats()
    try:
        states = evolve_checkpoints(ext, max_entangled_state(gen.dim, (2, 2)), coarse, cfg, stats)
    except IntegrationError as exc:
        exc.context.setdefault("T", T)
        raise
    pe = np.array([error_probability(s) for s in states])
    if pe[0] >= target:
        raise BracketFailure(f"P_error={pe[0]:.6g} already >= target {target} at the bracket start", T)
    above = np.nonzero(pe >= target)[0]
    if above.size == 0:
        raise BracketFailure(f"P_error never reaches {target} (max {pe.max():.6g}) in the bracket", T)
    k = int(above[0])
    if np.any(np.diff(pe[: k + 1]) <= 0):
        raise BracketFailure("P_error is not increasing in t below the target crossing", T)
    t_lo, t_hi = coarse[k - 1], coarse[k]
    state_lo = states[k - 1]
    t_mid, state_mid, p_mid = t_hi, states[k], pe[k]
    for _ in range(tol.bisection_max_iter):
        if abs(p_mid - target) < p_tol:
            break
        t_mid = 0.5 * (t_lo + t_hi)
        try:
            state_mid = evolve_checkpoints(ext, state_lo, [t_mid - t_lo], cfg, stats)[0]
        except IntegrationError as exc:
            exc.context.setdefault("T", T)
            raise
        p_mid = error_probability(state_mid)
        if p_mid < target:
            t_lo, state_lo = t_mid, state_mid
        else:
            t_hi = t_mid
    if abs(p_mid - target) >= p_tol:
        raise BracketFailure(f"bisection did not reach |P_error - target| < {p_tol:g}", T)
    rec = SweepRecord(
        {"target": float(target), "T": float(T), "t": float(t_mid), "gamma0_t": float(t_mid * p.gamma0)},
        i_bar(state_mid).i_bar, float(p_mid))
    return rec, stats


def isoline_search(template: ZZThermalParams | None, target_p_error: float,
                   T_values: Sequence[float] = DEFAULT_T_VALUES,
                   t_bracket: tuple = DEFAULT_T_BRACKET, cfg: EvolutionConfig | None = None,
                   workers: int = 1, coarse_points: int = 48, p_tol: float = ISOLINE_P_TOL,
                   return_stats: bool = False):
    """Constant-P_error line in the (t, T) plane and i_bar along it.

    ``t_bracket`` is in units of 1/gamma0.  For each temperature a coarse
    log-spaced trajectory locates the first crossing of the target, P_error is
    checked to be increasing up to there, and bisection refines the crossing
    time until P_error is within ``p_tol`` (capped by the bisection tolerance
    of the active record) of the target.
    """
    if not 0.0 < target_p_error < 1.0:
        raise ValueError(f"target P_error must lie in (0, 1), got {target_p_error}")
    T_values = [float(T) for T in T_values]
    if not T_values:
        raise ValueError("T_values must be non-empty")
    lo, hi = (float(x) for x in t_bracket)
    if not 0 < lo < hi:
        raise ValueError(f"bad t bracket {t_bracket}")
    template = template or ZZThermalParams()
    jobs = [(template, float(target_p_error), T, (lo, hi), coarse_points, cfg, float(p_tol))
            for T in T_values]
    results = _pool_map(_isoline_job, jobs, workers)
    records = [rec for rec, _ in results]
    if return_stats:
        return records, _merge_stats(st for _, st in results)
    return records


def _grid_job(args):
    template, T, gamma0_times, cfg = args
    gen, p = _error_generator(template, T)
    times = np.asarray(gamma0_times, dtype=float) / p.gamma0
    try:
        states = evolve_choi_checkpoints(gen, times, cfg, (2, 2))
    except IntegrationError as exc:
        exc.context.setdefault("T", T)
        raise
    return [
        SweepRecord({"T": float(T), "t": float(t), "gamma0_t": float(gt)},
                    i_bar(s).i_bar, error_probability(s))
        for t, gt, s in zip(times, gamma0_times, states)
    ]


def p_error_grid(template: ZZThermalParams | None, gamma0_times: Sequence[float],
                 T_values: Sequence[float], cfg: EvolutionConfig | None = None,
                 workers: int = 1) -> list:
    """P_error and i_bar of the error map on a (t, T) grid, rows ordered by T then t."""
    template = template or ZZThermalParams()
    grid = np.asarray(gamma0_times, dtype=float)
    if grid.size == 0 or grid[0] <= 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("time grid must be non-empty, positive and strictly ascending")
    jobs = [(template, float(T), grid, cfg) for T in T_values]
    return [rec for rows in _pool_map(_grid_job, jobs, workers) for rec in rows]


# ---------------------------------------------------------------------------
# CSV and manifest
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    return "" if value is None else format(float(value), ".12g")


def csv_columns(records: Sequence[SweepRecord], default=("i_bar",)) -> list:
    names: list = []
    for rec in records:
        for key in rec.parameters:
            if key not in names:
                names.append(key)
    names.append("i_bar")
    if any(rec.p_error is not None for rec in records):
        names.append("p_error")
    return names if records else list(default)


def write_csv(records: Sequence[SweepRecord], path: str | os.PathLike,
              columns: Sequence[str] | None = None) -> None:
    """Write records with 12 significant digits, in input order.

    ``columns`` fixes the header (useful for empty record lists); otherwise it
    is the parameter names in first-seen order followed by ``i_bar`` and, if
    any record has one, ``p_error``.
    """
    cols = list(columns) if columns is not None else csv_columns(records)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for rec in records:
            row = []
            for c in cols:
                if c == "i_bar":
                    row.append(_fmt(rec.i_bar))
                elif c == "p_error":
                    row.append(_fmt(rec.p_error))
                else:
                    row.append(_fmt(rec.parameters.get(c)))
            writer.writerow(row)


def read_csv(path: str | os.PathLike) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        out = []
        for row in reader:
            params = {k: float(v) for k, v in row.items()
                      if k not in ("i_bar", "p_error") and v != ""}
            pe = row.get("p_error")
            out.append(SweepRecord(params, float(row["i_bar"]), float(pe) if pe else None))
    return out


def sha256_file(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return _jsonable(dataclasses.asdict(value))
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def build_manifest(command: str, parameters: dict, outputs: Sequence[str] = (),
                   extra: dict | None = None) -> dict:
    manifest = {
        "command": command,
        "tool": "dyncorr",
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "kernels": _kernels.BACKEND,
        "parameters": _jsonable(parameters),
        "tolerances": get_tolerances().as_dict(),
        "outputs": [
            {"path": os.fspath(p), "sha256": sha256_file(p), "bytes": os.path.getsize(p)}
            for p in outputs
        ],
    }
    if extra:
        manifest.update(_jsonable(extra))
    return manifest


def write_manifest(path: str | os.PathLike, manifest: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=False)
        fh.write("\n")

"""Command-line front end: JSON run configs in, CSV/JSON (optionally SVG) out.

Usage:
    dimerlab <critical|bifurcation|portrait|simulate|reduce> --config CFG
             [--out-dir DIR] [--svg]

One flat JSON object per run.  Outputs are deterministic: fixed field order,
floats at 12 significant digits, no timestamps.  Exit codes: 0 success,
2 config error, 3 numeric failure, 4 I/O error.  DIMERLAB_THREADS caps the
worker count used for eta sweeps.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import (
    DimerParams,
    PhasePoint,
    d2eta_at_zero,
    eta_plus,
    eta_star,
    hamiltonian,
    mu_threshold,
    to_amplitudes,
)
from .dynamics import ESCAPE_THRESHOLD, integrate_amplitudes, integrate_phase
from .errors import ConfigError, DimerlabError
from .reduction import (
    PotentialSpec,
    compute_c,
    cross_terms,
    map_epsilon_to_eta,
    solve_doublet,
)
from .stationary import (
    BranchLabel,
    StabilityTag,
    bifurcation_diagram,
    phase_portrait,
)
from . import svgplot

FLOAT_FMT = "%.12e"

REGIME_PITCHFORK = "supercritical pitchfork"
REGIME_SADDLE_NODE = "saddle-node + inverse pitchfork"


# ---------------------------------------------------------------------------
# deterministic serialization
# ---------------------------------------------------------------------------

def _csv_num(x: float) -> str:
    return FLOAT_FMT % float(x)


def _round12(obj):
    """Round every float to 12 significant digits so JSON bytes reproduce."""
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, (float, np.floating)):
        return float(FLOAT_FMT % float(obj))
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_round12(obj), indent=2, allow_nan=False) + "\n",
                    encoding="utf-8")


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else _csv_num(cell)
                              for cell in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: config must be a single JSON object")
    return cfg


class _Fields:
    """Field-by-field accessor that reports violations with the field name."""

    def __init__(self, cfg: dict, allowed: set[str]):
        self.cfg = cfg
        unknown = set(cfg) - allowed
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(sorted(unknown))}")

    def number(self, name, *, default=None, required=False, minimum=None,
               exclusive_minimum=None, maximum=None):
        if name not in self.cfg:
            if required:
                raise ConfigError(f"field '{name}': required")
            return default
        val = self.cfg[name]
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"field '{name}': must be a number, got {val!r}")
        val = float(val)
        if not math.isfinite(val):
            raise ConfigError(f"field '{name}': must be finite")
        if exclusive_minimum is not None and not val > exclusive_minimum:
            raise ConfigError(f"field '{name}': must be > {exclusive_minimum!r}, got {val!r}")
        if minimum is not None and val < minimum:
            raise ConfigError(f"field '{name}': must be >= {minimum!r}, got {val!r}")
        if maximum is not None and val > maximum:
            raise ConfigError(f"field '{name}': must be <= {maximum!r}, got {val!r}")
        return val

    def integer(self, name, *, default=None, required=False, minimum=None):
        if name not in self.cfg:
            if required:
                raise ConfigError(f"field '{name}': required")
            return default
        val = self.cfg[name]
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigError(f"field '{name}': must be an integer, got {val!r}")
        if minimum is not None and val < minimum:
            raise ConfigError(f"field '{name}': must be >= {minimum!r}, got {val!r}")
        return val

    def string(self, name, *, default=None, required=False, choices=None):
        if name not in self.cfg:
            if required:
                raise ConfigError(f"field '{name}': required")
            return default
        val = self.cfg[name]
        if not isinstance(val, str):
            raise ConfigError(f"field '{name}': must be a string, got {val!r}")
        if choices is not None and val not in choices:
            raise ConfigError(f"field '{name}': must be one of {sorted(choices)}, got {val!r}")
        return val

    def number_list(self, name, *, default=None):
        if name not in self.cfg:
            return default
        val = self.cfg[name]
        if (not isinstance(val, list) or
                any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in val)):
            raise ConfigError(f"field '{name}': must be a list of numbers")
        return [float(v) for v in val]


def _workers() -> int:
    raw = os.environ.get("DIMERLAB_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"DIMERLAB_THREADS must be an integer, got {raw!r}") from exc
    return max(1, min(n, os.cpu_count() or 1))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_critical(cfg: dict, out_dir: Path, svg: bool) -> None:
    f = _Fields(cfg, {"mu"})
    mu = f.number("mu", required=True, exclusive_minimum=0.0)
    thr = mu_threshold()
    e_star = eta_star(mu)
    e_plus = eta_plus(mu)
    d2 = d2eta_at_zero(mu)
    regime = REGIME_SADDLE_NODE if e_plus is not None else REGIME_PITCHFORK
    report = {
        "mu": mu,
        "mu_threshold": thr,
        "eta_star": e_star,
        "eta_plus": e_plus,
        "d2eta_dz2_at_zero": d2,
        "regime": regime,
    }
    _write_json(out_dir / "critical.json", report)
    print(f"mu                 {_csv_num(mu)}")
    print(f"mu_threshold       {_csv_num(thr)}")
    print(f"eta_star           {_csv_num(e_star)}")
    print(f"eta_plus           {'absent' if e_plus is None else _csv_num(e_plus)}")
    print(f"d2eta/dz2 at z=0   {_csv_num(d2)}")
    print(f"regime             {regime}")


def cmd_bifurcation(cfg: dict, out_dir: Path, svg: bool) -> None:
    f = _Fields(cfg, {"mu", "eta_min", "eta_max", "n_samples"})
    mu = f.number("mu", required=True, exclusive_minimum=0.0)
    eta_min = f.number("eta_min", required=True, exclusive_minimum=0.0)
    eta_max = f.number("eta_max", required=True, exclusive_minimum=0.0)
    if not eta_min < eta_max:
        raise ConfigError(f"field 'eta_max': must exceed eta_min, got {eta_max!r}")
    n_samples = f.integer("n_samples", required=True, minimum=2)

    branches = bifurcation_diagram(mu, (eta_min, eta_max), n_samples, workers=_workers())
    rows = []
    for br in branches:
        for s in br.samples:
            rows.append((s.eta, s.z, br.theta, s.stability.value, br.label.value))
    _write_csv(out_dir / "bifurcation.csv", ["eta", "z", "theta", "stability", "branch_label"],
               rows)
    meta = {
        "mu": mu,
        "eta_min": eta_min,
        "eta_max": eta_max,
        "n_samples": n_samples,
        "mu_threshold": mu_threshold(),
        "eta_star": eta_star(mu),
        "eta_plus": eta_plus(mu),
        "branches": [
            {
                "label": br.label.value,
                "n_samples": len(br.samples),
                "eta_first": br.samples[0].eta,
                "eta_last": br.samples[-1].eta,
            }
            for br in branches
        ],
    }
    _write_json(out_dir / "bifurcation_meta.json", meta)
    if svg:
        _bifurcation_svg(out_dir / "bifurcation.svg", mu, branches)
    print(f"bifurcation: {len(branches)} branches over eta in "
          f"[{_csv_num(eta_min)}, {_csv_num(eta_max)}]")


def _runs_by_tag(samples):
    """Split branch samples into maximal runs sharing a stability tag."""
    runs = []
    for s in samples:
        if runs and runs[-1][0] is s.stability:
            runs[-1][1].append(s)
        else:
            runs.append((s.stability, [s]))
    return runs


def _bifurcation_svg(path: Path, mu: float, branches) -> None:
    etas = [s.eta for br in branches for s in br.samples]
    frame = svgplot.Frame(min(etas), max(etas), -1.0, 1.0)
    elements = []
    for br in branches:
        for tag, run in _runs_by_tag(br.samples):
            if len(run) == 1:
                run = run * 2  # draw isolated samples as dots of zero length
            dashed = tag is not StabilityTag.CENTER
            color = "#1f77b4" if tag is StabilityTag.CENTER else "#d62728"
            elements.append(svgplot.polyline(frame, [s.eta for s in run],
                                             [s.z for s in run], color, dashed=dashed))
    path.write_text(svgplot.document(elements, f"stationary states, mu = {mu:g}",
                                     "eta", "z"), encoding="utf-8")


def cmd_portrait(cfg: dict, out_dir: Path, svg: bool) -> None:
    f = _Fields(cfg, {"mu", "eta", "nz", "ntheta", "energy_levels"})
    mu = f.number("mu", required=True, exclusive_minimum=0.0)
    eta = f.number("eta", required=True, exclusive_minimum=0.0)
    nz = f.integer("nz", default=401, minimum=16)
    ntheta = f.integer("ntheta", default=401, minimum=16)
    extra_levels = f.number_list("energy_levels", default=[])

    portrait = phase_portrait(DimerParams(mu, eta), nz, ntheta)
    rows = []
    for i, z in enumerate(portrait.z_grid):
        for j, th in enumerate(portrait.theta_grid):
            rows.append((z, th, portrait.energy[i, j]))
    _write_csv(out_dir / "portrait_grid.csv", ["z", "theta", "H"], rows)
    levels = sorted(set(portrait.separatrix_energies) | set(extra_levels))
    meta = {
        "mu": mu,
        "eta": eta,
        "nz": nz,
        "ntheta": ntheta,
        "fixed_points": [
            {
                "z": fp.point.z,
                "theta": fp.point.theta,
                "stability": fp.stability.value,
                "hessian_product": fp.hessian_product,
                "energy": hamiltonian(fp.point, portrait.params),
            }
            for fp in portrait.fixed_points
        ],
        "separatrix_energies": list(portrait.separatrix_energies),
        "energy_levels": levels,
    }
    _write_json(out_dir / "portrait_meta.json", meta)
    if svg:
        _portrait_svg(out_dir / "portrait.svg", portrait, levels)
    print(f"portrait: {len(portrait.fixed_points)} fixed points, "
          f"{len(portrait.separatrix_energies)} separatrix energies")


def _portrait_svg(path: Path, portrait, levels) -> None:
    th = portrait.theta_grid
    z = portrait.z_grid
    frame = svgplot.Frame(float(th[0]), float(th[-1]), -1.0, 1.0)
    elements = []
    for level in levels:
        segs = svgplot.marching_squares(th, z, portrait.energy, level)
        if segs:
            elements.append(svgplot.segments_path(frame, segs, "#d62728", width=1.2))
    for frac in (0.15, 0.35, 0.65, 0.85):
        level = float(np.quantile(portrait.energy, frac))
        segs = svgplot.marching_squares(th, z, portrait.energy, level)
        if segs:
            elements.append(svgplot.segments_path(frame, segs, "#1f77b4", width=0.8))
    for fp in portrait.fixed_points:
        if fp.stability is StabilityTag.SADDLE:
            elements.append(svgplot.cross(frame, fp.point.theta, fp.point.z, 5.0, "#d62728"))
        else:
            elements.append(svgplot.circle(frame, fp.point.theta, fp.point.z, 4.0, "#1f77b4"))
    path.write_text(svgplot.document(
        elements,
        f"phase portrait, mu = {portrait.params.mu:g}, eta = {portrait.params.eta:g}",
        "theta", "z"), encoding="utf-8")


def cmd_simulate(cfg: dict, out_dir: Path, svg: bool) -> None:
    f = _Fields(cfg, {"mu", "eta", "chart", "z0", "theta0", "global_phase",
                      "tau_end", "dt_init", "tol", "sample_stride"})
    mu = f.number("mu", required=True, exclusive_minimum=0.0)
    eta = f.number("eta", required=True, exclusive_minimum=0.0)
    chart = f.string("chart", default="phase", choices={"phase", "amplitude"})
    z0 = f.number("z0", required=True, minimum=-1.0, maximum=1.0)
    if chart == "phase" and abs(z0) > ESCAPE_THRESHOLD:
        raise ConfigError(
            "field 'z0': phase-chart runs need |z0| <= 1 - 1e-11; use the amplitude chart"
        )
    theta0 = f.number("theta0", required=True)
    gamma = f.number("global_phase", default=0.0)
    tau_end = f.number("tau_end", required=True, exclusive_minimum=0.0)
    dt_init = f.number("dt_init", default=1e-3, exclusive_minimum=0.0)
    tol = f.number("tol", default=1e-10, minimum=1e-14, maximum=1e-6)
    stride = f.number("sample_stride", default=0.01, exclusive_minimum=0.0)

    params = DimerParams(mu, eta)
    p0 = PhasePoint(z0, theta0)
    if chart == "phase":
        traj = integrate_phase(p0, params, tau_end, dt_init, tol, stride)
    else:
        traj = integrate_amplitudes(to_amplitudes(p0, gamma), params, tau_end,
                                    dt_init, tol, stride)
    z, theta, _ = traj.phase_coordinates()
    norms = traj.norms if traj.norms is not None else np.ones(traj.times.size)
    rows = [
        (traj.times[i], z[i], theta[i], traj.energies[i], norms[i])
        for i in range(traj.times.size)
    ]
    _write_csv(out_dir / "trajectory.csv", ["tau", "z", "theta", "H", "norm"], rows)
    summary = {
        "chart": traj.chart,
        "mu": mu,
        "eta": eta,
        "z0": z0,
        "theta0": theta0,
        "tau_end": tau_end,
        "tol": tol,
        "sample_stride": stride,
        "n_samples": int(traj.times.size),
        "tau_last": float(traj.times[-1]),
        "energy_definition": "H" if traj.chart == "phase" else "H_amp",
        "energy_drift": traj.energy_drift,
        "norm_drift": traj.norm_drift,
        "escaped": bool(traj.escaped),
    }
    _write_json(out_dir / "simulate_summary.json", summary)
    if svg:
        frame = svgplot.Frame(0.0, float(traj.times[-1]) or 1.0, -1.0, 1.0)
        elements = [svgplot.polyline(frame, traj.times, z, "#1f77b4")]
        (out_dir / "trajectory.svg").write_text(
            svgplot.document(elements, f"z(tau), mu = {mu:g}, eta = {eta:g}", "tau", "z"),
            encoding="utf-8")
    state = "escaped chart" if traj.escaped else "completed"
    print(f"simulate [{traj.chart}]: {state} at tau = {_csv_num(traj.times[-1])}, "
          f"energy drift {traj.energy_drift:.3e}")


def cmd_reduce(cfg: dict, out_dir: Path, svg: bool) -> None:
    f = _Fields(cfg, {"family", "hbar", "mu", "half_width", "grid_points", "epsilons",
                      "a", "b", "amplitude", "x0", "width", "table"})
    family = f.string("family", required=True,
                      choices={"quartic", "gaussian_wells", "tabulated"})
    hbar = f.number("hbar", required=True, exclusive_minimum=0.0)
    mu = f.number("mu", required=True, minimum=0.0)
    half_width = f.number("half_width", default=None, exclusive_minimum=0.0)
    grid_points = f.integer("grid_points", default=2049, minimum=128)
    epsilons = f.number_list("epsilons", default=[0.0, 0.25, 0.5, 1.0, 2.0])

    kw = {"half_width": half_width, "grid_points": grid_points}
    if family == "quartic":
        spec = PotentialSpec.quartic(
            f.number("a", required=True, exclusive_minimum=0.0),
            f.number("b", required=True, exclusive_minimum=0.0),
            hbar, **kw)
    elif family == "gaussian_wells":
        spec = PotentialSpec.gaussian_wells(
            f.number("amplitude", required=True, exclusive_minimum=0.0),
            f.number("x0", required=True, exclusive_minimum=0.0),
            f.number("width", required=True, exclusive_minimum=0.0),
            hbar, **kw)
    else:
        table = f.string("table", required=True)
        spec = PotentialSpec.from_table_file(table, hbar, **kw)

    result = solve_doublet(spec)
    c = compute_c(result, mu)
    result.c = c
    overlap, cross = cross_terms(result, mu)
    report = {
        "family": family,
        "hbar": hbar,
        "mu": mu,
        "half_width_used": result.half_width,
        "grid_nodes": int(result.x.size),
        "lambda_plus": result.lambda_plus,
        "lambda_minus": result.lambda_minus,
        "lambda_2": result.lambda_2,
        "omega": result.omega,
        "big_omega": result.Omega,
        "c": c,
        "overlap": overlap,
        "cross": cross,
        "beating_period": result.beating_period_T,
        "eta_of_epsilon": [
            {"epsilon": eps, "eta": map_epsilon_to_eta(result, c, eps)} for eps in epsilons
        ],
    }
    _write_json(out_dir / "reduction.json", report)
    rows = [
        (result.x[i], result.phi_plus[i], result.phi_minus[i],
         result.phi_R[i], result.phi_L[i])
        for i in range(result.x.size)
    ]
    _write_csv(out_dir / "eigenfunctions.csv",
               ["x", "phi_plus", "phi_minus", "phi_R", "phi_L"], rows)
    if svg:
        step = max(1, result.x.size // 2000)  # plot resolution only; CSV stays full
        xs = result.x[::step]
        frame = svgplot.Frame(float(result.x[0]), float(result.x[-1]),
                              float(min(result.phi_minus.min(), result.phi_R.min())),
                              float(max(result.phi_plus.max(), result.phi_R.max())))
        elements = [
            svgplot.polyline(frame, xs, result.phi_plus[::step], "#1f77b4"),
            svgplot.polyline(frame, xs, result.phi_minus[::step], "#d62728"),
            svgplot.polyline(frame, xs, result.phi_R[::step], "#2ca02c", dashed=True),
        ]
        (out_dir / "eigenfunctions.svg").write_text(
            svgplot.document(elements, f"doublet, hbar = {hbar:g}", "x", "phi"),
            encoding="utf-8")
    print(f"reduce: omega = {_csv_num(result.omega)}, c = {_csv_num(c)}, "
          f"overlap = {result.overlap:.3e}")


_COMMANDS = {
    "critical": cmd_critical,
    "bifurcation": cmd_bifurcation,
    "portrait": cmd_portrait,
    "simulate": cmd_simulate,
    "reduce": cmd_reduce,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dimerlab",
        description="Two-mode double-well reduction: critical constants, stationary "
                    "states, bifurcation diagrams, phase portraits, dynamics.",
    )
    parser.add_argument("--version", action="version", version=f"dimerlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} command")
        p.add_argument("--config", required=True, help="path to the JSON run configuration")
        p.add_argument("--out-dir", default=".", help="directory for output files")
        p.add_argument("--svg", action="store_true", help="also emit SVG plots")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config)
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        _COMMANDS[args.command](cfg, out_dir, args.svg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DimerlabError as exc:
        print(f"numeric failure [{type(exc).__module__}.{type(exc).__name__}]: {exc}",
              file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())

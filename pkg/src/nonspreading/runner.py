"""Scenario pipeline behind the ``construct`` and ``verify`` commands."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import AnalysisWindow, energy_expectation, invariance_metrics, residual_triple
from .config import DEFAULT_CONSTRUCT_TIME, Scenario
from .constructor import (
    ConsistencyReport,
    PhaseTrack,
    ShapeSolution,
    build_phase,
    consistency_check,
    effective_potential,
    force_double_integrals,
    gaussian_packet,
    motion_from_constraint,
    packet_values,
    solve_shape,
    time_lattice,
)
from .core import WaveFunction
from .errors import ConfigError, UnsupportedPotential
from .propagator import PropagationPlan, check_dirichlet, cn_step, propagate
from .specs import (
    ComplexAbsorber,
    MovingHarmonicDriven,
    MovingQuarticDriven,
    Rest,
    UniformForce,
    is_real,
    motion_from_dict,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VERDICT = 2
EXIT_BOUNDARY = 3

METRIC_COLUMNS = (
    "t",
    "shape_err_L2",
    "shape_err_Linf",
    "centroid_err",
    "norm",
    "flux_residual",
    "phase_residual",
    "residual_schrodinger",
)


def fmt(value) -> str:
    """17 significant digits: round-trips every double."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def real_part(pot):
    """Strip absorbers: construction works on the real potential."""
    while isinstance(pot, ComplexAbsorber):
        pot = pot.base
    return pot


@dataclass
class Construction:
    motion: object
    times: np.ndarray
    report: ConsistencyReport
    shape: ShapeSolution | None = None
    phase: PhaseTrack | None = None
    initial: WaveFunction | None = None


def _resolve_motion(sc: Scenario, pot, times):
    spec = sc.raw["motion"]
    kind = spec["kind"]
    if kind == "from_constraint":
        return motion_from_constraint(
            pot, spec.get("params", {}), v0=float(spec.get("v0", 0.0)), times=times, units=sc.units
        )
    if kind == "from_potential":
        if isinstance(pot, (MovingHarmonicDriven, MovingQuarticDriven)):
            return pot.motion
        raise ConfigError("motion 'from_potential' needs a moving trap potential")
    return motion_from_dict(spec)


def _lattice(sc: Scenario) -> np.ndarray:
    tb = sc.raw.get("time", DEFAULT_CONSTRUCT_TIME)
    t_final = float(tb["t_final"])
    if t_final == 0.0:
        t_final = DEFAULT_CONSTRUCT_TIME["t_final"]
    return time_lattice(t_final, float(tb["dt"]))


def _consistency_times(times: np.ndarray, n: int) -> np.ndarray:
    idx = np.unique(np.round(np.linspace(0, times.size - 1, n)).astype(int))
    return times[idx]


def construct(sc: Scenario) -> Construction:
    """Motion, consistency, shape and phase for a scenario."""
    pot = real_part(sc.potential)
    times = _lattice(sc)
    cfg = sc.consistency
    try:
        motion = _resolve_motion(sc, pot, times)
    except UnsupportedPotential as exc:
        # no admissible motion: report the consistency failure of the trap at rest
        log.warning("%s; checking consistency with the packet at rest", exc)
        motion = Rest()
        report = consistency_check(
            pot, motion, sc.grid, _consistency_times(times, cfg["n_times"]), sc.units, cfg["max_degree"], cfg["tol"]
        )
        if report.consistent:
            raise
        return Construction(motion, times, report)
    report = consistency_check(
        pot, motion, sc.grid, _consistency_times(times, cfg["n_times"]), sc.units, cfg["max_degree"], cfg["tol"]
    )
    if not report.consistent:
        return Construction(motion, times, report)

    init = sc.raw.get("initial")
    if init is not None:
        psi0 = gaussian_packet(sc.grid, float(init["sigma"]), float(init.get("x0", 0.0)), float(init.get("k0", 0.0)))
        if np.any(np.abs(np.imag(psi0.values)) > 0):
            # the shape is the real envelope; the boost enters through the phase
            env = np.abs(psi0.values)
        else:
            env = np.real(psi0.values)
        shape = ShapeSolution.from_samples(sc.grid, env)
        return Construction(motion, times, report, shape, None, psi0)

    veff = effective_potential(pot, motion, sc.grid, 0.0, sc.units, cfg["max_degree"])
    shape_cfg = sc.raw.get("shape", {"eigen_index": 0})
    want_airy = shape_cfg == "airy" or (isinstance(shape_cfg, dict) and shape_cfg.get("kind") == "airy")
    index = 0 if want_airy else int(shape_cfg["eigen_index"])
    shapes = solve_shape(veff, index + 1, sc.units)
    if want_airy and shapes[0].normalizable:
        raise ConfigError("shape 'airy' requested but the effective potential is confining")
    shape = shapes[0] if not shapes[0].normalizable else shapes[index]
    phase = build_phase(pot, motion, shape.E_eff, times, sc.units)
    return Construction(motion, times, report, shape, phase)


def write_construction(con: Construction, out: Path) -> list[str]:
    files = []
    rep = con.report
    write_csv(
        out / "consistency.csv",
        ("power", "max_variation", "offending"),
        ((n, rep.max_time_variation[n], int(n in rep.offending_powers)) for n in rep.powers_checked),
    )
    files.append("consistency.csv")
    if con.shape is not None:
        s = con.shape
        write_csv(
            out / "shape.csv",
            ("q", "f", "E_eff", "node_count"),
            ((q, f, s.E_eff, s.node_count) for q, f in zip(s.q_grid.x, s.f)),
        )
        files.append("shape.csv")
    if con.phase is not None:
        p = con.phase
        write_csv(out / "phase.csv", ("t", "d", "d_dot", "phi1", "phi0"), zip(p.times, p.d, p.d_dot, p.phi1, p.phi0))
        files.append("phase.csv")
    return files


def _boundary_fn(sc: Scenario, con: Construction):
    if con.shape is None or con.shape.normalizable:
        return None
    ends = sc.grid.x[[0, -1]]

    def boundary(t):
        vals = packet_values(con.shape, con.motion, con.phase, ends, t, sc.units)
        return complex(vals[0]), complex(vals[1])

    return boundary


def _neighbour(psi, sc, dt, step_sign, boundary):
    t = psi.time
    t_new = t + step_sign * dt
    bc = None if boundary is None else boundary(t_new)
    return cn_step(psi, sc.potential, t, step_sign * dt, sc.units, bc)


def _residual_series(snaps, sc, n_steps, dt, boundary, window):
    """Residual at each snapshot from one extra CN step on either side.

    At step 0 and the final step the triple is shifted inward by one step so
    that the potential is never evaluated outside [0, t_final].
    """
    out = []
    for snap in snaps:
        psi, k = snap.wavefunction, snap.step_index
        if n_steps < 2:
            out.append(float("nan"))
            continue
        if k == 0:
            a = psi
            b = _neighbour(a, sc, dt, +1, boundary)
            c = _neighbour(b, sc, dt, +1, boundary)
        elif k == n_steps:
            c = psi
            b = _neighbour(c, sc, dt, -1, boundary)
            a = _neighbour(b, sc, dt, -1, boundary)
        else:
            b = psi
            a = _neighbour(b, sc, dt, -1, boundary)
            c = _neighbour(b, sc, dt, +1, boundary)
        out.append(residual_triple(a, b, c, sc.potential, sc.units, window))
    return np.asarray(out)


@dataclass
class VerifyResult:
    exit_code: int
    report: dict
    metrics: dict | None = None


def verify(sc: Scenario, out: Path) -> VerifyResult:
    """Construct, propagate and score a scenario; writes all output files."""
    if "time" not in sc.raw:
        raise ConfigError("verify needs a 'time' block")
    tb = sc.raw["time"]
    wcfg = sc.raw.get("window", {})
    window = AnalysisWindow(float(wcfg.get("fraction", 0.6)), float(wcfg.get("density_floor", 1e-6)))
    thr = sc.thresholds

    con = construct(sc)
    files = write_construction(con, out)
    verdicts = {
        "consistency": con.report.consistent,
        "nonspreading": False,
        "flux_ok": False,
        "phase_ok": False,
        "energy_ok": None,
    }
    report = {
        "verdicts": verdicts,
        "thresholds": dict(thr),
        "consistency": {
            "offending_powers": list(con.report.offending_powers),
            "tolerance": con.report.tolerance_used,
        },
        "files": files,
    }
    if not con.report.consistent:
        _write_report(out, report)
        return VerifyResult(EXIT_VERDICT, report)

    plan = PropagationPlan(float(tb["dt"]), float(tb["t_final"]), int(tb.get("snapshot_stride", 100)), sc.potential, sc.units)
    boundary = _boundary_fn(sc, con)
    if con.initial is not None:
        psi0 = con.initial
    else:
        psi0 = WaveFunction(sc.grid, packet_values(con.shape, con.motion, con.phase, sc.grid.x, 0.0, sc.units), 0.0)
        if con.shape.normalizable:
            check_dirichlet(psi0)
    snaps = propagate(psi0, plan, waive_dirichlet=boundary is not None, boundary=boundary)
    met = invariance_metrics(snaps, con.shape, con.motion, window, sc.units)
    resid = _residual_series(snaps, sc, plan.n_steps, plan.dt, boundary, window)

    write_csv(
        out / "metrics.csv",
        METRIC_COLUMNS,
        zip(met.t, met.shape_err_L2, met.shape_err_Linf, met.centroid_err, met.norm, met.flux_residual, met.phase_residual, resid),
    )
    files.append("metrics.csv")
    for snap in snaps:
        name = f"density_{snap.step_index:06d}.csv"
        v = snap.wavefunction.values
        write_csv(out / name, ("x", "re", "im", "density"), zip(sc.grid.x, v.real, v.imag, np.abs(v) ** 2))
        files.append(name)

    verdicts["nonspreading"] = bool(np.all(met.shape_err_Linf <= thr["shape_linf"]))
    verdicts["flux_ok"] = bool(np.all(met.flux_residual <= thr["flux"]))
    verdicts["phase_ok"] = bool(np.all(met.phase_residual <= thr["phase"]))

    if is_real(sc.potential):
        energies = [energy_expectation(s.wavefunction, sc.potential, s.time, sc.units) for s in snaps]
        write_csv(
            out / "energy.csv",
            ("t", "kinetic", "potential", "total"),
            ((s.time, e.kinetic, e.potential, e.total) for s, e in zip(snaps, energies)),
        )
        files.append("energy.csv")
        refs = sc.raw.get("references", {})
        if "E_n" in refs and "E_cl" in refs:
            target = float(refs["E_n"]) + float(refs["E_cl"])
            dev = max(abs(e.total - target) for e in energies)
            verdicts["energy_ok"] = bool(dev <= thr["energy"])
            report["energy_reference_total"] = target

    report["centroid_kind"] = met.centroid_kind
    report["E_eff"] = con.shape.E_eff if con.initial is None else None
    report["n_steps"] = plan.n_steps
    pot = real_part(sc.potential)
    if isinstance(pot, UniformForce):
        nested, identity = force_double_integrals(pot.force, con.times)
        report["double_integral_identity_gap"] = float(np.max(np.abs(nested - identity)))
    _write_report(out, report)
    ok = all(v for v in verdicts.values() if v is not None)
    return VerifyResult(EXIT_OK if ok else EXIT_VERDICT, report, {"metrics": met, "residual": resid, "snapshots": snaps})


def _write_report(out: Path, report: dict) -> None:
    with open(out / "report.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")

"""Serialization of run outputs and the offline identity check."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from ..diagnostics import jensen_radius_bounds
from ..lagrange import to_eulerian
from .runner import TERMINATION_NOTE, RunOutput

# (column, description); the order is part of the file format
TIMESERIES_COLUMNS = [
    ("time", "output time"),
    ("energy", "entropy functional E(t): kinetic + R*Phi(v) + Phi(theta)"),
    ("dissipation", "entropy production V(t) >= 0"),
    ("dissipated", "time integral of V up to t (trapezoid over accepted steps)"),
    ("entropy_residual", "E(t) + int V - E(0)"),
    ("entropy_residual_rel", "entropy_residual / (E(0) + 1)"),
    ("mass_shell", "sum v dh = b^3/3"),
    ("mass_eta", "sum of shell widths = outer radius"),
    ("simple_energy", "sum m u^2/2 + sum theta dh (conserved)"),
    ("kinetic_energy", "sum m u^2/2"),
    ("mean_temp", "sum theta dh"),
    ("monitor_center", "max rho + max 1/rho + max |u| over the core"),
    ("monitor_rho_max", "max rho over the core"),
    ("monitor_rho_inv_max", "max 1/rho over the core"),
    ("monitor_u_max", "max |u| over the core"),
    ("serrin_norm", "running sup rho + windowed velocity norm"),
    ("serrin_rho", "running sup rho"),
    ("serrin_velocity", "windowed velocity part"),
    ("jensen_margin", "min Jensen margin over interior and exterior checks"),
    ("jensen_interior_min", "min interior Jensen margin"),
    ("jensen_exterior_min", "min exterior Jensen margin"),
    ("interior_rho_min", "running min rho over h >= interior_mass"),
    ("interior_rho_max", "running max rho over h >= interior_mass"),
    ("velocity_accumulator", "int max u^2 dt over h >= interior_mass"),
    ("temperature_ratio", "running max of max theta / (1 + max v * V)"),
    ("velocity_ratio", "running max of max (u/r)^2 / V"),
    ("mean_temp_margin", "running min of log(sum theta dh) minus its lower bound"),
    ("rep_residual", "max relative shell-volume reconstruction residual"),
    ("rep_B_min", "min B over tracked nodes"),
    ("rep_B_max", "max B over tracked nodes"),
    ("rep_Y_min", "min Y over tracked nodes"),
    ("rep_Y_max", "max Y over tracked nodes"),
    ("boundary_flux", "(r^2 u)(h0)"),
    ("dt", "last accepted step"),
]


def _fmt(x) -> str:
    return repr(float(x))


def _value(report, name):
    if name in report.extras:
        return report.extras[name]
    if hasattr(report, name):
        return getattr(report, name)
    return math.nan


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def boundary_flux_fit(out: RunOutput) -> dict:
    """Least-squares ``|flux| ~ a + c sqrt(V)`` over the output rows."""
    if not out.representation:
        return {}
    flux = np.abs([r["boundary_flux"] for r in out.representation])
    sv = np.sqrt([rep.dissipation for rep in out.reports[: len(flux)]])
    A = np.column_stack([np.ones_like(sv), sv])
    coef, *_ = np.linalg.lstsq(A, flux, rcond=None)
    return {"a": float(coef[0]), "c": float(coef[1])}


def y_growth_rate(out: RunOutput) -> float:
    """Largest ``|d log Y / dt|`` between consecutive output times."""
    reps = out.representation
    rate = 0.0
    for a, b in zip(reps[:-1], reps[1:]):
        dt = b["time"] - a["time"]
        if dt > 0:
            rate = max(rate, float(np.max(np.abs(np.subtract(b["log_Y"], a["log_Y"])))) / dt)
    return rate


def summary_dict(out: RunOutput) -> dict:
    cfg = out.config
    last = out.reports[-1]
    d = {
        "name": cfg.name,
        "termination": out.termination,
        "termination_note": TERMINATION_NOTE[out.termination],
        "final_time": out.final_state.time,
        "steps": out.steps,
        "rejected_steps": out.rejected,
        "rows": len(out.reports),
        "initial_energy": out.reports[0].energy,
        "final": {name: _value(last, name) for name, _ in TIMESERIES_COLUMNS},
        "peaks": dict(out.peaks),
        "interior": dict(out.interior),
        "config": cfg.to_dict(),
    }
    if out.representation:
        reps = out.representation
        d["representation"] = {
            "form": cfg.representation.form,
            "anchor_mass": cfg.representation.anchor_mass,
            "max_residual": max(r["max_residual"] for r in reps),
            "B_range": [min(r["B_min"] for r in reps), max(r["B_max"] for r in reps)],
            "Y_range": [min(r["Y_min"] for r in reps), max(r["Y_max"] for r in reps)],
            "log_Y_rate_max": y_growth_rate(out),
            "boundary_flux_fit": boundary_flux_fit(out),
        }
    # operational stand-in for the existential radius bounds, using E(0) / R as budget
    h = out.grid.nodes[1:-1]
    budget = out.reports[0].energy / cfg.physics.R
    r_min, r_max = jensen_radius_bounds(h, budget, cfg.physics.ball_radius)
    r = out.final_state.radii[1:-1]
    d["radius_bounds"] = {
        "note": "operational bisection bounds from the measured entropy budget, not the existential constants",
        "budget": budget,
        "min_gap_lower": float(np.min(r - r_min)),
        "min_gap_upper": float(np.min(r_max - r)),
    }
    return d


def write_timeseries(out: RunOutput, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([c for c, _ in TIMESERIES_COLUMNS])
        for rep in out.reports:
            w.writerow([_fmt(_value(rep, c)) for c, _ in TIMESERIES_COLUMNS])
    return path


def write_profile(out: RunOutput, path) -> Path:
    path = Path(path)
    e = to_eulerian(out.final_state, out.grid)
    h = out.grid.nodes
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kind", "index", "mass", "radius", "density", "velocity", "temperature"])
        for i in range(h.size):
            w.writerow(["node", i, _fmt(h[i]), _fmt(e.node_radii[i]), "", _fmt(e.velocity[i]), ""])
        for j, hc in enumerate(out.grid.centers):
            w.writerow(["cell", j, _fmt(hc), _fmt(e.cell_radii[j]), _fmt(e.density[j]), "", _fmt(e.temperature[j])])
    return path


def write_outputs(out: RunOutput, directory) -> dict:
    """Write ``timeseries.csv``, ``summary.json`` and ``final_profile.csv``.

    Failures are re-raised as ``OSError`` naming the offending path.
    """
    d = Path(directory)
    try:
        d.mkdir(parents=True, exist_ok=True)
        ts = write_timeseries(out, d / "timeseries.csv")
        summ = d / "summary.json"
        summ.write_text(json.dumps(_clean(summary_dict(out)), indent=2, sort_keys=True) + "\n")
        prof = write_profile(out, d / "final_profile.csv")
    except OSError as exc:
        raise OSError(f"cannot write outputs to {d}: {exc}") from exc
    return {"timeseries": ts, "summary": summ, "profile": prof}


def write_rows(rows: list[dict], path) -> Path:
    path = Path(path)
    keys = []
    for r in rows:
        for k in r:
            if k not in keys:
                keys.append(k)
    try:
        with path.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: (_fmt(v) if isinstance(v, float) else v) for k, v in r.items()})
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def read_timeseries(path) -> dict[str, np.ndarray]:
    with Path(path).open() as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return {k: np.array([float(r[k]) for r in rows]) for k in rows[0]}


def check_identities(ts: dict, entropy_tol: float = 1e-3) -> list[tuple[str, bool, str]]:
    """Re-validate the recorded identities; returns ``(name, ok, detail)`` rows."""
    res = []

    def add(name, ok, detail):
        res.append((name, bool(ok), detail))

    t = ts["time"]
    add("times increasing", np.all(np.diff(t) > 0), f"{t.size} rows")
    add("dissipation nonnegative", np.all(ts["dissipation"] >= 0), f"min {ts['dissipation'].min():.3e}")
    ms = ts["mass_shell"]
    drift = np.max(np.abs(ms - ms[0])) / ms[0]
    add("shell mass conserved", drift <= 1e-12, f"relative drift {drift:.3e}")
    me = ts["mass_eta"]
    drift = np.max(np.abs(me - me[0])) / me[0]
    add("outer radius fixed", drift <= 1e-10, f"relative drift {drift:.3e}")
    add("jensen margins", np.all(ts["jensen_margin"] >= -1e-12), f"min {ts['jensen_margin'].min():.3e}")
    se = ts["simple_energy"]
    drift = np.max(np.abs(se - se[0])) / abs(se[0])
    add("simple energy conserved", drift <= 1e-6, f"relative drift {drift:.3e}")
    r = np.abs(ts["entropy_residual_rel"])
    add("entropy balance", np.nanmax(r) <= entropy_tol, f"max relative residual {np.nanmax(r):.3e}")
    E = ts["energy"]
    add("energy bounded", np.all(E <= E[0] + np.abs(ts["entropy_residual"]) + 1e-14 * (1 + E[0])),
        f"max E - E0 {np.max(E - E[0]):.3e}")
    return res

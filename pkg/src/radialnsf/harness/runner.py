"""Drive the scheme, diagnostics and representation ledger for one scenario."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .. import diagnostics as dg
from .. import represent as rp
from ..core import FluidState, FunctionalReport, MassGrid
from ..scheme import DtUnderflow, PositivityLost, SingularTridiagonal, adaptive_dt, step
from .config import ScenarioConfig
from .scenarios import initial_state

log = logging.getLogger(__name__)

END_TIME = "end time reached"
DT_UNDERFLOW = "dt underflow"
REJECTION_CASCADE = "positivity rejection cascade"

# dt underflow is only an operational proxy for approaching a singular time
TERMINATION_NOTE = {
    END_TIME: "completed",
    DT_UNDERFLOW: "stability estimate fell below dt_min; numerical proxy only, not a proof of blowup",
    REJECTION_CASCADE: "repeated positivity rejections down to dt_min; numerical proxy only",
}


@dataclass
class RunOutput:
    config: ScenarioConfig
    grid: MassGrid
    reports: list
    representation: list
    final_state: FluidState
    termination: str
    steps: int = 0
    rejected: int = 0
    peaks: dict = field(default_factory=dict)
    interior: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return np.array([r.time for r in self.reports])

    def column(self, name: str) -> np.ndarray:
        return np.array([_report_value(r, name) for r in self.reports])


def _report_value(r: FunctionalReport, name: str):
    if hasattr(r, name) and name != "extras":
        return getattr(r, name)
    return r.extras[name]


def output_times(end_time: float, interval: float) -> np.ndarray:
    n = int(math.floor(end_time / interval * (1.0 + 1e-12)))
    return interval * np.arange(n + 1)


class _Tracker:
    """Everything updated once per accepted step."""

    def __init__(self, cfg: ScenarioConfig, s0: FluidState, g: MassGrid):
        self.cfg, self.g = cfg, g
        p = cfg.physics
        self.E0 = dg.energy_functional(s0, g, p)
        self.V = dg.dissipation_functional(s0, g, p)
        self.dissipated = 0.0
        self.shell0 = dg.mass_shell(s0, g)
        self.serrin = dg.SerrinAccumulator(g, cfg.monitor)
        self.serrin.update(s0.time, s0)
        self.interior = dg.InteriorMonitor(g, p, cfg.monitor, s0)
        self.interior.update(s0.time, s0, self.V)
        self.ledger = None
        if cfg.representation.enabled:
            rc = cfg.representation
            self.ledger = rp.new_ledger(s0, g, p, rc.anchor_mass, form=rc.form)
        self.peaks = {"monitor_center": 0.0, "monitor_rho_max": 0.0, "monitor_rho_inv_max": 0.0,
                      "monitor_u_max": 0.0, "rep_residual": 0.0}
        self._core(s0)

    def _core(self, s):
        mon = dg.blowup_monitor(s, self.g, self.cfg.monitor)
        for key, val in (("monitor_center", mon.total), ("monitor_rho_max", mon.rho_max),
                         ("monitor_rho_inv_max", mon.rho_inv_max), ("monitor_u_max", mon.u_max)):
            self.peaks[key] = max(self.peaks[key], val)
        return mon

    def accept(self, s: FluidState, dt: float):
        p = self.cfg.physics
        V = dg.dissipation_functional(s, self.g, p)
        self.dissipated += 0.5 * (self.V + V) * dt
        self.V = V
        self.serrin.update(s.time, s)
        self.interior.update(s.time, s, V)
        if self.ledger is not None:
            rp.accumulate_Y(self.ledger, s, self.g, p, dt)
        self._core(s)

    def report(self, s: FluidState, dt: float) -> tuple[FunctionalReport, dict | None]:
        g, p, cfg = self.g, self.cfg.physics, self.cfg
        mon = self._core(s)
        E = dg.energy_functional(s, g, p)
        residual = E + self.dissipated - self.E0
        jm = dg.jensen_radius_check(s, g)
        inter = self.interior
        extras = {
            "dissipated": self.dissipated,
            "entropy_residual_rel": residual / (self.E0 + 1.0),
            "kinetic_energy": dg.kinetic_energy(s, g),
            "jensen_interior_min": float(jm.interior.min()),
            "jensen_exterior_min": float(jm.exterior.min()),
            "serrin_rho": self.serrin.rho_part,
            "serrin_velocity": self.serrin.velocity_part,
            "interior_rho_min": inter.rho_min,
            "interior_rho_max": inter.rho_max,
            "velocity_accumulator": inter.velocity_accumulator,
            "temperature_ratio": inter.temperature_ratio,
            "velocity_ratio": inter.velocity_ratio,
            "mean_temp_margin": inter.mean_temp_margin,
            "dt": dt,
        }
        rep = None
        if self.ledger is not None:
            rec = rp.reconstruct_shell_volume(self.ledger, s, p)
            flux = rp.boundary_flux_term(s, g, self.ledger.anchor_mass)
            rep = {
                "time": s.time,
                "max_residual": rec.max_residual,
                "residual": rec.residual.tolist(),
                "B_min": float(rec.B.min()), "B_max": float(rec.B.max()),
                "Y_min": float(rec.Y.min()), "Y_max": float(rec.Y.max()),
                "log_Y": np.log(rec.Y).tolist(),
                "boundary_flux": flux,
                "boundary_flux_ratio": rp.boundary_flux_ratio(flux, self.V),
            }
            self.peaks["rep_residual"] = max(self.peaks["rep_residual"], rec.max_residual)
            extras.update(rep_residual=rec.max_residual, rep_B_min=rep["B_min"], rep_B_max=rep["B_max"],
                          rep_Y_min=rep["Y_min"], rep_Y_max=rep["Y_max"], boundary_flux=flux)
        report = FunctionalReport(
            time=s.time,
            energy=E,
            dissipation=self.V,
            mass_eta=dg.mass_eta(s),
            mass_shell=dg.mass_shell(s, g),
            simple_energy=dg.simple_energy(s, g),
            mean_temp=dg.mean_temperature(s, g),
            monitor_center=mon.total,
            monitor_rho_max=mon.rho_max,
            monitor_rho_inv_max=mon.rho_inv_max,
            monitor_u_max=mon.u_max,
            serrin_norm=self.serrin.total,
            jensen_margin=jm.minimum,
            entropy_residual=residual,
            extras=extras,
        )
        return report, rep


def _choose_dt(cfg: ScenarioConfig, s, g, remaining: float) -> float:
    if cfg.fixed_dt is not None:
        dt = cfg.fixed_dt
    else:
        dt = adaptive_dt(s, g, cfg.physics, cfg.scheme)
    # land exactly on the next output time instead of leaving a sliver
    if remaining <= dt * (1.0 + 1e-6):
        return remaining
    return dt


def run_simulation(cfg: ScenarioConfig, on_step=None) -> RunOutput:
    """Integrate ``cfg`` to its end time or until the scheme gives up.

    ``on_step(state, dt)`` is called after every accepted step, if given.
    Identical configs give identical outputs: there is no randomness here and
    no wall-clock dependence.
    """
    s, g, _ = initial_state(cfg)
    p, sc = cfg.physics, cfg.scheme
    tr = _Tracker(cfg, s, g)
    targets = output_times(cfg.end_time, cfg.output_interval)
    final_time = cfg.end_time
    reports, reps = [], []
    rep0, rrep0 = tr.report(s, 0.0)
    reports.append(rep0)
    if rrep0 is not None:
        reps.append(rrep0)
    next_k = 1
    steps = rejected = 0
    termination = END_TIME
    dt_last = 0.0
    while s.time < final_time:
        target = targets[next_k] if next_k < targets.size else final_time
        remaining = target - s.time
        try:
            dt = _choose_dt(cfg, s, g, remaining)
        except DtUnderflow as exc:
            log.info("terminating at t=%.6g: %s", s.time, exc)
            termination = DT_UNDERFLOW
            break
        retries = 0
        while True:
            try:
                s_new = step(s, g, p, sc, dt)
                break
            except (PositivityLost, SingularTridiagonal) as exc:
                rejected += 1
                retries += 1
                dt *= 0.5
                log.debug("rejected step at t=%.6g (%s); retrying with dt=%.3e", s.time, exc, dt)
                if dt < sc.dt_min or retries > cfg.max_retries:
                    s_new = None
                    break
        if s_new is None:
            termination = REJECTION_CASCADE
            break
        if dt == remaining:
            s_new = s_new.replace(time=float(target))
        s = s_new
        steps += 1
        dt_last = dt
        tr.accept(s, dt)
        if on_step is not None:
            on_step(s, dt)
        if next_k < targets.size and s.time == targets[next_k]:
            rep, rrep = tr.report(s, dt_last)
            reports.append(rep)
            if rrep is not None:
                reps.append(rrep)
            next_k += 1
    if termination != END_TIME and s.time > reports[-1].time:
        rep, rrep = tr.report(s, dt_last)
        reports.append(rep)
        if rrep is not None:
            reps.append(rrep)
    return RunOutput(cfg, g, reports, reps, s, termination, steps, rejected,
                     peaks=dict(tr.peaks), interior=tr.interior.summary())

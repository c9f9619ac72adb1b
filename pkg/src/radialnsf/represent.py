"""Representation of the shell volume away from the centre.

For an anchor mass ``h0`` the shell volume obeys

    v(t, h) = [v0(h) + int_0^t (R/nu) B Y theta dtau] / (B(t, h) Y(t, h))

with ``B`` an explicit functional of the current and initial states and ``Y``
a time-ordered exponential. This module evaluates both factors on the mass
grid, advances the time integrals alongside the solver and compares the
reconstructed ``v`` with the solver's.

Two groupings of ``Y`` are available. ``form="printed"`` divides the inner
bracket by ``W(tau) = int_{h0}^1 v dh`` inside the time integral.
``form="exact"`` integrates the bracket first and divides by ``W(t)``, which
is the grouping that makes the representation an identity when ``W`` varies
in time. Both coincide whenever ``W`` is constant.

Mass integrals treat node quantities as piecewise linear and cell
quantities as piecewise constant in ``h``; products of a cell quantity with
a running integral of a node quantity are integrated exactly per cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import FluidState, MassGrid, PhysParams, ValidationError
from .scheme import continuity_rhs

N_TRACKED = 9


class _Quadrature:
    """Integrals over ``[h0, 1]`` on a fixed mass grid."""

    def __init__(self, g: MassGrid, h0: float):
        h = g.nodes
        self.g = g
        if not h[1] < h0 < 1.0:
            raise ValidationError(f"anchor mass must lie in ({h[1]:.3g}, 1), got {h0}")
        self.h = h
        self.h0 = h0
        self.dh = g.widths
        self.centers = g.centers
        self.k = int(np.searchsorted(h, h0, side="right") - 1)  # cell holding h0
        lo = h[:-1].copy()
        lo[self.k] = h0
        self.lo = lo[self.k:]
        self.hi = h[self.k + 1:]

    def node_at(self, f, x):
        return np.interp(x, self.h, f)

    def cell_at(self, c, x):
        """Linear interpolation between cell centres, extrapolated at the ends."""
        xc = self.centers
        x = np.asarray(x, dtype=float)
        j = np.clip(np.searchsorted(xc, x) - 1, 0, xc.size - 2)
        w = (x - xc[j]) / (xc[j + 1] - xc[j])
        return c[j] + w * (c[j + 1] - c[j])

    def _cumulative_from_zero(self, f, x):
        C = np.concatenate(([0.0], np.cumsum(0.5 * self.dh * (f[1:] + f[:-1]))))
        x = np.asarray(x, dtype=float)
        i = np.clip(np.searchsorted(self.h, x, side="right") - 1, 0, self.h.size - 2)
        return C[i] + 0.5 * (x - self.h[i]) * (f[i] + self.node_at(f, x))

    def running(self, f, x):
        """``int_{h0}^x f dxi`` for a node function ``f``."""
        return self._cumulative_from_zero(f, x) - self._cumulative_from_zero(f, self.h0)

    def node_integral(self, f) -> float:
        return float(self.running(f, 1.0))

    def cell_integral(self, c) -> float:
        return float(np.sum(c[self.k:] * (self.hi - self.lo)))

    def cell_times_running(self, c, f) -> float:
        """``int_{h0}^1 c(h) int_{h0}^h f dxi dh`` by Simpson's rule per cell (exact)."""
        a, b = self.lo, self.hi
        Ga = self.running(f, a)
        Gb = self.running(f, b)
        Gm = self.running(f, 0.5 * (a + b))
        return float(np.sum(c[self.k:] * (b - a) * (Ga + 4.0 * Gm + Gb) / 6.0))


def sigma(s: FluidState, g: MassGrid, p: PhysParams) -> np.ndarray:
    """Cell values of ``-R theta / v + nu v_t / v``, with ``v_t`` from continuity."""
    return -p.R * s.theta / s.v + p.nu * continuity_rhs(s, g) / s.v


def _u_over_r2(s: FluidState) -> np.ndarray:
    f = np.zeros_like(s.u)
    f[1:] = s.u[1:] / s.radii[1:] ** 2
    return f


def _two_u2_over_r3(s: FluidState) -> np.ndarray:
    f = np.zeros_like(s.u)
    f[1:] = 2.0 * s.u[1:] ** 2 / s.radii[1:] ** 3
    return f


def boundary_flux_term(s: FluidState, g: MassGrid, h0: float) -> float:
    """``int_0^{h0} (r^2 u)_h dh``, which telescopes to ``(r^2 u)(h0)``."""
    return float(np.interp(h0, g.nodes, s.radii**2 * s.u))


def boundary_flux_ratio(value: float, V: float, offset: float = 0.0) -> float:
    """``(value - offset) / sqrt(V)``, or ``nan`` when ``V`` vanishes."""
    return (value - offset) / math.sqrt(V) if V > 0 else math.nan


@dataclass
class RepresentationLedger:
    anchor_mass: float
    tracked_nodes: np.ndarray
    initial_shell_volume: np.ndarray
    form: str = "exact"
    time: float = 0.0
    sigma_integral: float = 0.0
    y_exponent_integral: np.ndarray = None
    bracket_integral: float = 0.0
    theta_weighted_integral: np.ndarray = None
    # cached initial-state quantities
    _F0: np.ndarray = None
    _vF0: float = 0.0
    _W0: float = 0.0
    # previous integrands for the trapezoid rule
    _prev: dict = field(default_factory=dict)
    _quad: _Quadrature = None

    def snapshot(self) -> dict:
        return {
            "time": self.time,
            "sigma_integral": self.sigma_integral,
            "y_exponent_integral": self.y_exponent_integral.tolist(),
            "bracket_integral": self.bracket_integral,
            "theta_weighted_integral": self.theta_weighted_integral.tolist(),
        }


def _shell_integral(q: _Quadrature, s: FluidState) -> float:
    W = q.cell_integral(s.v)
    if not W > 1e-300:
        raise ValidationError("anchor too close to boundary: normalizer underflows")
    return W


def _bracket(q: _Quadrature, s: FluidState, p: PhysParams, sigma_int: float, h0: float) -> float:
    """The braced term in the exponent of ``Y`` before normalisation."""
    u2 = s.u**2
    f2 = _two_u2_over_r3(s)
    inner = q.node_integral(u2) + p.R * q.cell_integral(s.theta) + q.cell_times_running(s.v, f2)
    return inner + boundary_flux_term(s, q.g, h0) * sigma_int


def new_ledger(s0: FluidState, g: MassGrid, p: PhysParams, anchor_mass: float = 0.25,
               tracked=None, form: str = "exact") -> RepresentationLedger:
    if form not in ("exact", "printed"):
        raise ValidationError(f"unknown representation form {form!r}")
    q = _Quadrature(g, anchor_mass)
    hp = np.linspace(anchor_mass, 1.0, N_TRACKED) if tracked is None else np.asarray(tracked, dtype=float)
    if np.any(hp < anchor_mass) or np.any(hp > 1.0):
        raise ValidationError("tracked nodes must lie in [anchor_mass, 1]")
    led = RepresentationLedger(anchor_mass, hp, q.cell_at(s0.v, hp), form=form, time=s0.time,
                               y_exponent_integral=np.zeros(hp.size),
                               theta_weighted_integral=np.zeros(hp.size))
    led._quad = q
    f = _u_over_r2(s0)
    led._F0 = q.running(f, hp)
    led._vF0 = q.cell_times_running(s0.v, f)
    led._W0 = _shell_integral(q, s0)
    led._prev = _integrands(led, s0, g, p, np.ones(hp.size), np.ones(hp.size))
    return led


def factor_B(led: RepresentationLedger, s: FluidState, p: PhysParams) -> np.ndarray:
    q = led._quad
    f = _u_over_r2(s)
    W = _shell_integral(q, s)
    F = q.running(f, led.tracked_nodes)
    vF = q.cell_times_running(s.v, f)
    expo = led._F0 - F - (led._vF0 - vF + p.nu * W - p.nu * led._W0) / W
    return np.exp(expo / p.nu)


def factor_Y(led: RepresentationLedger, s: FluidState, p: PhysParams) -> np.ndarray:
    if led.form == "printed":
        total = led.bracket_integral
    else:
        total = led.bracket_integral / _shell_integral(led._quad, s)
    return np.exp((total - led.y_exponent_integral) / p.nu)


def _integrands(led, s, g, p, B, Y) -> dict:
    q = led._quad
    hp = led.tracked_nodes
    sig = float(q.cell_at(sigma(s, g, p), led.anchor_mass))
    local = q.running(_two_u2_over_r3(s), hp)
    br = _bracket(q, s, p, led.sigma_integral, led.anchor_mass)
    if led.form == "printed":
        br /= _shell_integral(q, s)
    tw = (p.R / p.nu) * B * Y * q.cell_at(s.theta, hp)
    return {"sigma": sig, "local": local, "bracket": br, "theta": tw}


def _log_mean(a, b):
    """(b - a) / log(b / a) for positive arrays, with the a == b limit."""
    x = np.log(b / a)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(x == 0.0, 1.0, np.expm1(x) / x)
    return a * ratio


def accumulate_Y(led: RepresentationLedger, s: FluidState, g: MassGrid, p: PhysParams,
                 dt: float | None = None) -> RepresentationLedger:
    """Advance all ledger integrals from ``led.time`` to ``s.time``.

    Trapezoid rule throughout, except the positive theta-weighted term, which
    grows like the exponential factors and uses the logarithmic mean (exact
    for exponentials, second order otherwise).

    The order matters: ``sigma_integral`` first, since the bracket at the new
    time contains it, then ``Y``, then the theta-weighted integral that needs
    the new ``B`` and ``Y``.
    """
    dt = s.time - led.time if dt is None else dt
    if not dt > 0:
        raise ValueError(f"ledger step must be positive, got {dt}")
    q = led._quad
    prev = led._prev
    half = 0.5 * dt
    sig = float(q.cell_at(sigma(s, g, p), led.anchor_mass))
    led.sigma_integral += half * (prev["sigma"] + sig)
    local = q.running(_two_u2_over_r3(s), led.tracked_nodes)
    led.y_exponent_integral = led.y_exponent_integral + half * (prev["local"] + local)
    br = _bracket(q, s, p, led.sigma_integral, led.anchor_mass)
    if led.form == "printed":
        br /= _shell_integral(q, s)
    led.bracket_integral += half * (prev["bracket"] + br)
    B = factor_B(led, s, p)
    Y = factor_Y(led, s, p)
    tw = (p.R / p.nu) * B * Y * q.cell_at(s.theta, led.tracked_nodes)
    led.theta_weighted_integral = led.theta_weighted_integral + dt * _log_mean(prev["theta"], tw)
    led._prev = {"sigma": sig, "local": local, "bracket": br, "theta": tw}
    led.time = s.time
    return led


@dataclass(frozen=True)
class Reconstruction:
    nodes: np.ndarray
    value: np.ndarray
    actual: np.ndarray
    B: np.ndarray
    Y: np.ndarray

    @property
    def residual(self) -> np.ndarray:
        return np.abs(self.value - self.actual) / self.actual

    @property
    def max_residual(self) -> float:
        return float(self.residual.max())


def reconstruct_shell_volume(led: RepresentationLedger, s: FluidState, p: PhysParams) -> Reconstruction:
    if not math.isclose(led.time, s.time, rel_tol=0.0, abs_tol=1e-12 * max(1.0, abs(s.time))):
        raise ValidationError(f"ledger at t={led.time} but state at t={s.time}")
    B = factor_B(led, s, p)
    Y = factor_Y(led, s, p)
    value = (led.initial_shell_volume + led.theta_weighted_integral) / (B * Y)
    return Reconstruction(led.tracked_nodes, value, led._quad.cell_at(s.v, led.tracked_nodes), B, Y)

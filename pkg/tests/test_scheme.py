from __future__ import annotations

import numpy as np
import pytest

from radialnsf.core import MassGrid, PhysParams, ValidationError, equilibrium_state
from radialnsf.lagrange import radial_grid, to_lagrangian
from radialnsf.scheme import (
    DtUnderflow,
    Geometry,
    PositivityLost,
    SchemeConfig,
    SingularTridiagonal,
    _solve_tridiagonal,
    adaptive_dt,
    continuity_rhs,
    momentum_rhs,
    shear_rate,
    stability_estimates,
    step,
    strain_components,
    temperature_rhs,
    viscous_heating,
)

from conftest import bump_profile


def total_energy(s, g):
    return np.sum(g.node_masses * s.u**2) / 2 + np.sum(g.widths * s.theta)


@pytest.mark.parametrize("kw", [{"theta_implicit": 0.4}, {"cfl_safety": 1.0}, {"dt_min": 1.0, "dt_max": 0.1},
                                {"positivity_floor": 0.0}])
def test_scheme_config_validation(kw):
    with pytest.raises(ValidationError):
        SchemeConfig(**kw)


def test_continuity_rhs(moving_state, params):
    s, g = moving_state
    assert np.sum(continuity_rhs(s, g) * g.widths) == pytest.approx(0.0, abs=1e-14)
    np.testing.assert_array_equal(continuity_rhs(s.replace(u=np.zeros_like(s.u)), g), 0.0)
    # u = r everywhere (boundary pin lifted): (r^2 u)_h = (r^3)_h = 3 v
    rate = continuity_rhs(s.replace(u=s.radii.copy()), g)
    np.testing.assert_allclose(rate, 3 * s.v, rtol=1e-11)


def test_momentum_rhs_equilibrium_and_pressure_sign(params):
    g = MassGrid.uniform(32)
    s = equilibrium_state(g, params)
    np.testing.assert_array_equal(momentum_rhs(s, g, params), 0.0)
    rng = np.random.default_rng(3)
    v = np.exp(rng.normal(0, 0.3, 32))
    v *= 1.0 / np.sum(v * g.widths)
    s = s.__class__.from_fields(0.0, v, np.zeros(33), np.ones(32), g)
    rate = momentum_rhs(s, g, params)
    grad = np.diff(1.0 / v)  # node differences of the pressure R theta / v
    assert np.all(rate[1:-1] * grad < 0)
    assert rate[0] == rate[-1] == 0.0


def test_temperature_rhs_conduction_only(params):
    g = MassGrid.uniform(32)
    s = equilibrium_state(g, params)
    np.testing.assert_array_equal(temperature_rhs(s, g, params), 0.0)
    th = 1 + 0.3 * np.cos(np.pi * g.centers)
    s = s.replace(theta=th)
    rate = temperature_rhs(s, g, params)
    assert np.sum(rate * g.widths) == pytest.approx(0.0, abs=1e-14)
    assert rate[0] < 0 < rate[-1]  # heat flows from hot centre to cold edge


def test_strain_and_heating_identities(moving_state, params):
    s, g = moving_state
    geo = Geometry.of(s, g)
    D, a, b = strain_components(s.u, geo)
    np.testing.assert_allclose(D, a + 2 * b, rtol=1e-13, atol=1e-14)
    sh = shear_rate(s.u, geo)
    ru2 = s.radii * s.u**2
    np.testing.assert_allclose(geo.vol * (D**2 - sh**2), 3 * np.diff(ru2), rtol=1e-10, atol=1e-14)
    Q = viscous_heating(s.u, s.v, geo, params)
    assert np.all(Q >= 0)
    # per-cell heating equals the viscous work minus a flux difference
    np.testing.assert_allclose(Q * g.widths, params.nu * s.v * D**2 * g.widths - 4 * params.mu * np.diff(ru2),
                               rtol=1e-9, atol=1e-13)
    assert b[0] == pytest.approx(s.u[1] / s.radii[1], rel=1e-12)


def test_tridiagonal_solver_matches_dense():
    rng = np.random.default_rng(0)
    n = 12
    lower, upper = rng.uniform(-1, 0, n), rng.uniform(-1, 0, n)
    diag = 3 + rng.uniform(0, 1, n)
    rhs = rng.normal(size=n)
    A = np.diag(diag) + np.diag(upper[:-1], 1) + np.diag(lower[1:], -1)
    np.testing.assert_allclose(_solve_tridiagonal(lower, diag, upper, rhs), np.linalg.solve(A, rhs), rtol=1e-12)
    with pytest.raises(SingularTridiagonal, match="singular tridiagonal"):
        _solve_tridiagonal(np.zeros(3), np.zeros(3), np.zeros(3), np.ones(3))


def test_equilibrium_is_fixed_point(params):
    g = MassGrid.uniform(64)
    s0 = equilibrium_state(g, params)
    s = s0
    for _ in range(50):
        s = step(s, g, params, SchemeConfig(), 1e-3)
    for name in ("v", "u", "theta", "radii"):
        assert np.max(np.abs(getattr(s, name) - getattr(s0, name))) <= 1e-12


@pytest.mark.parametrize("tau", [0.5, 0.75, 1.0])
def test_mass_and_energy_exact(moving_state, params, tau):
    s, g = moving_state
    m0, e0 = np.sum(s.v * g.widths), total_energy(s, g)
    cfg = SchemeConfig(theta_implicit=tau)
    for _ in range(100):
        s = step(s, g, params, cfg, 5e-4)
    assert abs(np.sum(s.v * g.widths) - m0) <= 1e-13 * m0
    assert abs(total_energy(s, g) - e0) <= 1e-13 * e0
    assert s.u[0] == s.u[-1] == 0.0


def test_zero_source_matches_no_source(moving_state, params):
    s, g = moving_state
    zero = lambda t: (np.zeros(g.M), np.zeros(g.M + 1), np.zeros(g.M))
    a = step(s, g, params, SchemeConfig(), 1e-3)
    b = step(s, g, params, SchemeConfig(), 1e-3, source=zero)
    np.testing.assert_array_equal(a.v, b.v)
    np.testing.assert_array_equal(a.theta, b.theta)


def test_positivity_rejection(moving_state, params):
    s, g = moving_state
    with pytest.raises(PositivityLost, match="positivity lost"):
        step(s.replace(u=s.u * 200), g, params, SchemeConfig(), 0.05)
    with pytest.raises(ValueError):
        step(s, g, params, SchemeConfig(), 0.0)


def test_adaptive_dt(params, moving_state):
    g = MassGrid.uniform(128)
    s = equilibrium_state(g, params)
    cfg = SchemeConfig()
    assert adaptive_dt(s, g, params, cfg) == cfg.dt_max
    ta, _ = stability_estimates(s, g, params)
    ta2, _ = stability_estimates(s.replace(theta=2 * s.theta), g, params)
    assert ta / ta2 == pytest.approx(2**0.5, rel=1e-14)
    s2, g2 = moving_state
    assert adaptive_dt(s2, g2, params, cfg) == adaptive_dt(s2, g2, params, cfg)
    with pytest.raises(DtUnderflow, match="dt underflow"):
        adaptive_dt(s, g, params, SchemeConfig(dt_min=0.5, dt_max=1.0))


def test_self_convergence_on_nested_radial_grids(params):
    """Differences between successive resolutions shrink at close to second order."""
    prof = bump_profile(params.ball_radius, u_amp=0.2, th_amp=0.2)
    final = {}
    for M in (64, 128, 256):
        g = radial_grid(prof, M)
        s = to_lagrangian(prof, g)
        for _ in range(250):
            s = step(s, g, params, SchemeConfig(), 2e-4)
        final[M] = (s, g)

    def restrict(s, g, M):
        w = g.widths.reshape(M, 2)
        m = w.sum(1)
        return (s.v.reshape(M, 2) * w).sum(1) / m, s.u[::2], (s.theta.reshape(M, 2) * w).sum(1) / m

    diffs = []
    for M in (64, 128):
        a, ga = final[M]
        b, gb = final[2 * M]
        np.testing.assert_allclose(ga.nodes, gb.nodes[::2], atol=1e-14)
        v, u, th = restrict(b, gb, M)
        diffs.append(np.array([np.abs(a.v - v).max(), np.abs(a.u - u).max(), np.abs(a.theta - th).max()]))
    ratio = diffs[0] / diffs[1]
    assert np.all(ratio >= 3.3), ratio

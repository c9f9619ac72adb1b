from __future__ import annotations

import numpy as np
import pytest

from radialnsf.core import (
    FluidState,
    FunctionalReport,
    MassGrid,
    PhysParams,
    ValidationError,
    equilibrium_state,
    radii_from_volume,
    validate_params,
    validate_state,
)


def test_default_params_accepted():
    p = validate_params(PhysParams(mu=1, lam=0, kappa=1, R=1, ball_radius=3 ** (1 / 3)))
    assert p.nu == 2.0
    assert p.gamma == 2.0


def test_viscosity_boundary_case_accepted():
    p = validate_params(PhysParams(lam=-2.0 / 3.0))
    assert p.mu + 1.5 * p.lam == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize(
    "kwargs, message",
    [
        ({"lam": -1.0}, "viscosity constraint violated"),
        ({"mu": 0.0}, "shear viscosity"),
        ({"kappa": -1.0}, "heat conductivity"),
        ({"R": 0.0}, "gas constant"),
        ({"ball_radius": -1.0}, "ball radius"),
        ({"cv": 2.0}, "cv = 1"),
        ({"dim": 2}, "dim = 3"),
    ],
)
def test_invalid_params_rejected(kwargs, message):
    with pytest.raises(ValidationError, match=message):
        validate_params(PhysParams(**kwargs))


def test_mass_grid_invariants():
    g = MassGrid.uniform(4)
    np.testing.assert_array_equal(g.widths, np.full(4, 0.25))
    assert g.node_masses.sum() == pytest.approx(1.0, abs=1e-15)
    assert g.node_masses[0] == 0.125
    for bad in ([0.0, 0.5, 0.5, 1.0], [0.1, 0.5, 1.0], [0.0, 0.5, 0.9], [0.0, 1.0]):
        with pytest.raises(ValidationError):
            MassGrid(np.array(bad))
    with pytest.raises(ValueError):
        g.nodes[1] = 0.3  # read-only


def test_radii_from_volume_arithmetic():
    g = MassGrid.uniform(4)
    r = radii_from_volume(np.ones(4), g.widths)
    expected = np.cbrt([0.0, 0.75, 1.5, 2.25, 3.0])
    np.testing.assert_allclose(r, expected, rtol=1e-15)


def test_equilibrium_state_valid(params):
    g = MassGrid.uniform(16)
    s = validate_state(equilibrium_state(g, params), g, params)
    assert np.sum(s.v * g.widths) == pytest.approx(params.ball_radius**3 / 3, rel=1e-12)
    np.testing.assert_array_equal(s.density, 1.0)


def test_validate_state_errors(params):
    g = MassGrid.uniform(8)
    s = equilibrium_state(g, params)
    th = s.theta.copy()
    th[3] = 0.0
    with pytest.raises(ValidationError, match="positivity violated: temperature at cell 3"):
        validate_state(s.replace(theta=th), g, params)
    u = s.u.copy()
    u[-1] = 0.1
    with pytest.raises(ValidationError, match="boundary velocity nonzero"):
        validate_state(s.replace(u=u), g, params)
    r = s.radii.copy()
    r[4] *= 1.001
    with pytest.raises(ValidationError, match="radius inconsistency"):
        validate_state(s.replace(radii=r), g, params)
    with pytest.raises(ValidationError, match="radius inconsistency"):
        validate_state(s, g, PhysParams(ball_radius=2.0))
    with pytest.raises(ValidationError, match="sizes"):
        validate_state(s.replace(v=s.v[:-1]), g, params)


def test_state_arrays_are_read_only(params):
    s = equilibrium_state(MassGrid.uniform(4), params)
    with pytest.raises(ValueError):
        s.v[0] = 2.0


def test_functional_report_rejects_negative_dissipation():
    kw = dict(time=0.0, energy=0.0, mass_eta=1.0, mass_shell=1.0, simple_energy=1.0, mean_temp=1.0,
              monitor_center=2.0, monitor_rho_max=1.0, monitor_rho_inv_max=1.0, monitor_u_max=0.0,
              serrin_norm=1.0, jensen_margin=0.0)
    FunctionalReport(dissipation=0.0, **kw)
    with pytest.raises(ValidationError, match="nonnegative"):
        FunctionalReport(dissipation=-1e-3, **kw)

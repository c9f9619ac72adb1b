"""Property-based invariants over randomized positive states."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from radialnsf import diagnostics as dg
from radialnsf.core import PhysParams
from radialnsf.harness.config import ScenarioConfig, from_dict
from radialnsf.represent import _log_mean
from radialnsf.scheme import PositivityLost, SchemeConfig, step

from conftest import random_state

P = PhysParams()
seeds = st.integers(0, 2**32 - 1)
positive = st.floats(1e-6, 1e6, allow_nan=False)


@given(positive)
def test_convex_penalties_nonnegative(x):
    assert dg.phi(x) >= 0.0
    assert dg.G(x) >= 0.0


@given(seeds)
def test_functionals_of_random_states(seed):
    s, g = random_state(np.random.default_rng(seed))
    assert dg.dissipation_functional(s, g, P) >= 0.0
    assert dg.energy_functional(s, g, P) >= 0.0
    assert np.all(np.diff(s.radii) > 0)
    assert s.radii[-1] == pytest.approx(P.ball_radius, rel=1e-12)


@given(seeds)
def test_jensen_margins_nonnegative(seed):
    s, g = random_state(np.random.default_rng(seed))
    assert dg.jensen_radius_check(s, g).minimum >= -1e-12


@given(seeds)
def test_radius_bounds_bracket_radii(seed):
    s, g = random_state(np.random.default_rng(seed))
    budget = dg.energy_functional(s, g, P) / P.R
    lo, hi = dg.jensen_radius_bounds(g.nodes[1:-1], budget, P.ball_radius)
    r = s.radii[1:-1]
    assert np.all(lo <= r * (1 + 1e-9)) and np.all(r <= hi * (1 + 1e-9))


@given(seeds, st.sampled_from([0.5, 1.0]))
def test_step_conserves_mass_and_energy(seed, tau):
    rng = np.random.default_rng(seed)
    s, g = random_state(rng)
    s = s.replace(u=0.1 * s.u)
    m0 = np.sum(s.v * g.widths)
    e0 = dg.simple_energy(s, g)
    try:
        s1 = step(s, g, P, SchemeConfig(theta_implicit=tau), 1e-4)
    except PositivityLost:
        return  # rejection is the contract when positivity fails
    assert np.all(s1.v > 0) and np.all(s1.theta > 0)
    assert abs(np.sum(s1.v * g.widths) - m0) <= 1e-13 * m0
    assert abs(dg.simple_energy(s1, g) - e0) <= 1e-12 * e0
    assert s1.u[0] == s1.u[-1] == 0.0


@given(seeds, st.floats(1.0, 10.0))
def test_monitor_dominance(seed, k):
    s, g = random_state(np.random.default_rng(seed), M=30)
    cfg = dg.MonitorConfig(core_mass=0.2)
    a = dg.blowup_monitor(s, g, cfg)
    b = dg.blowup_monitor(s.replace(u=k * s.u), g, cfg)
    assert b.total >= a.total
    assert a.total >= max(a.rho_max, a.rho_inv_max)


@given(st.lists(positive, min_size=1, max_size=5), st.lists(positive, min_size=1, max_size=5))
def test_log_mean_between_endpoints(a, b):
    n = min(len(a), len(b))
    a, b = np.array(a[:n]), np.array(b[:n])
    m = _log_mean(a, b)
    assert np.all(m >= np.minimum(a, b) * (1 - 1e-12))
    assert np.all(m <= np.maximum(a, b) * (1 + 1e-12))


@given(st.integers(2, 512), st.sampled_from(["constant", "gaussianBump", "vacuumCore", "shellConcentration"]),
       st.floats(1e-3, 10.0), st.floats(1e-3, 1.0))
def test_config_dict_round_trip(M, kind, T, dt_out):
    cfg = from_dict({"grid": {"M": M}, "initial_data": {"kind": kind}, "end_time": T, "output_interval": dt_out})
    assert isinstance(cfg, ScenarioConfig)
    assert from_dict(cfg.to_dict()) == cfg

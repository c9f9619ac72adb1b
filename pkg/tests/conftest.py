from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

from radialnsf.core import FluidState, MassGrid, PhysParams
from radialnsf.lagrange import RadialProfile, radial_grid, to_lagrangian

settings.register_profile("suite", max_examples=60, deadline=None)
settings.load_profile("suite")


@pytest.fixture
def params():
    return PhysParams()


def bump_profile(b, amp=0.3, u_amp=0.0, th_amp=0.0):
    return RadialProfile.sample(
        lambda r: 1 + amp * np.exp(-(((r - 0.7) / 0.2) ** 2)),
        lambda r: u_amp * np.sin(np.pi * r / b),
        lambda r: 1 + th_amp * np.cos(np.pi * r / b),
        b,
    )


@pytest.fixture
def moving_state(params):
    """Smooth state with nonzero velocity and temperature gradients on a radial grid."""
    prof = bump_profile(params.ball_radius, u_amp=0.2, th_amp=0.2)
    g = radial_grid(prof, 64)
    return to_lagrangian(prof, g), g


def random_state(rng, M=None, b3=3.0):
    """Random positive state with unit mass in the ball with b^3 = b3."""
    M = M or int(rng.integers(3, 40))
    w = rng.uniform(0.2, 1.0, M)
    h = np.concatenate(([0.0], np.cumsum(w) / w.sum()))
    h[-1] = 1.0
    g = MassGrid(h)
    v = np.exp(rng.normal(0.0, 1.0, M))
    v *= (b3 / 3.0) / np.sum(v * g.widths)
    u = np.concatenate(([0.0], rng.normal(0.0, 1.0, M - 1), [0.0]))
    th = np.exp(rng.normal(0.0, 0.5, M))
    return FluidState.from_fields(0.0, v, u, th, g), g


# one line per acceptance criterion, echoed at the end of the session
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])

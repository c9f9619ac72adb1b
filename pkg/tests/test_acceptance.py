"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line (printed immediately and repeated in
the session summary) before asserting, so a failure still reports its numbers.
"""

from __future__ import annotations

import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from radialnsf import diagnostics as dg
from radialnsf.core import MassGrid, PhysParams, equilibrium_state
from radialnsf.harness.config import load_config
from radialnsf.harness.mms import observed_orders, run_mms
from radialnsf.harness.runner import END_TIME, run_simulation
from radialnsf.scheme import SchemeConfig, step

from conftest import ACCEPTANCE, random_state

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
SUITE = sorted(CONFIGS.glob("*.yaml"))


def record(n: int, ok: bool, detail: str) -> bool:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[n] = line
    print(line)
    return ok


@pytest.fixture(scope="module")
def bump_runs():
    """gaussianBump to t = 0.1 at (M, dt) = (256, 2e-4), (512, 1e-4), (1024, 5e-5)."""
    base = load_config(CONFIGS / "gaussian_bump.yaml")
    return {M: run_simulation(base.with_updates({"grid.M": M, "fixed_dt": dt}))
            for M, dt in ((256, 2e-4), (512, 1e-4), (1024, 5e-5))}


@pytest.fixture(scope="module")
def vacuum_runs():
    base = load_config(CONFIGS / "vacuum_core.yaml")
    return {M: run_simulation(base.with_updates({"grid.M": M})) for M in (128, 256, 512)}


@pytest.fixture(scope="module")
def suite_runs():
    return {p.stem: run_simulation(load_config(p)) for p in SUITE}


@pytest.fixture(scope="module")
def all_runs(bump_runs, vacuum_runs, suite_runs):
    runs = {f"bump_M{M}": out for M, out in bump_runs.items()}
    runs.update({f"vacuum_M{M}": out for M, out in vacuum_runs.items()})
    runs.update(suite_runs)
    return runs


def test_criterion_1_equilibrium_stationarity():
    p = PhysParams()
    g = MassGrid.uniform(128)
    s0 = equilibrium_state(g, p)
    s = s0
    cfg = SchemeConfig()
    t0 = time.perf_counter()
    for _ in range(10_000):
        s = step(s, g, p, cfg, 1e-3)
    elapsed = time.perf_counter() - t0
    dev = max(np.max(np.abs(getattr(s, f) - getattr(s0, f))) for f in ("v", "u", "theta", "radii"))
    ok = dev <= 1e-10 and elapsed < 10.0
    assert record(1, ok, f"max deviation {dev:.2e} after 10000 steps (<= 1e-10), {elapsed:.2f} s (< 10 s)")


def test_criterion_2_mass_identities(all_runs):
    drifts = {}
    for name, out in all_runs.items():
        m = out.column("mass_shell")
        drifts[name] = float(np.max(np.abs(m - m[0])) / m[0])
    worst = max(drifts, key=drifts.get)
    ok = drifts[worst] <= 1e-12
    assert record(2, ok, f"max relative drift of sum v dh over {len(drifts)} runs {drifts[worst]:.2e} ({worst}) "
                         f"(<= 1e-12)")


def test_criterion_3_entropy_balance(bump_runs):
    res = {M: float(np.max(np.abs(out.column("entropy_residual")))) for M, out in bump_runs.items()}
    ratio = res[256] / res[512]
    vmin = min(float(out.column("dissipation").min()) for out in bump_runs.values())
    ok = ratio >= 2.0 and vmin >= 0.0
    assert record(3, ok, f"residual {res[256]:.3e} -> {res[512]:.3e}, ratio {ratio:.3f} (>= 2); "
                         f"min V {vmin:.2e} (>= 0)")


def test_criterion_4_simple_energy(bump_runs):
    e = bump_runs[512].column("simple_energy")
    drift = float(np.max(np.abs(e - e[0])) / abs(e[0]))
    assert record(4, drift <= 1e-6, f"relative drift at M=512 {drift:.2e} (<= 1e-6)")


def test_criterion_5_jensen_margins(all_runs):
    rng = np.random.default_rng(20240605)
    random_min = min(dg.jensen_radius_check(*random_state(rng)).minimum for _ in range(100))
    run_min = min(float(out.column("jensen_margin").min()) for out in all_runs.values())
    ok = random_min >= -1e-12 and run_min >= -1e-12
    assert record(5, ok, f"min margin on 100 random states {random_min:.2e}, over {len(all_runs)} runs "
                         f"{run_min:.2e} (>= -1e-12)")


def test_criterion_6_representation(bump_runs):
    fine, finer = bump_runs[512], bump_runs[1024]
    r512 = max(r["max_residual"] for r in fine.representation)
    r1024 = max(r["max_residual"] for r in finer.representation)
    ratio = r512 / r1024
    first = fine.representation[0]
    init_exact = (first["time"] == 0.0 and first["B_min"] == first["B_max"] == 1.0
                  and first["Y_min"] == first["Y_max"] == 1.0)
    # constant state: log Y grows at exactly 1/nu
    eq = load_config(CONFIGS / "equilibrium.yaml")
    out = run_simulation(eq.with_updates({"end_time": 0.1, "output_interval": 0.05}))
    last = out.representation[-1]
    rate = np.array(last["log_Y"]) / last["time"]
    rate_err = float(np.max(np.abs(rate * eq.physics.nu - 1.0)))
    ok = r512 <= 1e-2 and ratio >= 1.8 and init_exact and rate_err <= 1e-8
    assert record(6, ok, f"residual {r512:.3e} at M=512 (<= 1e-2), ratio to M=1024 {ratio:.3f} (>= 1.8), "
                         f"B(0)=Y(0)=1 {'exact' if init_exact else 'NOT exact'}, "
                         f"Y rate rel. error {rate_err:.1e} (<= 1e-8)")


def test_criterion_7_mms():
    cfg = load_config(CONFIGS / "mms.yaml")
    rows = run_mms(cfg.mms, cfg.physics, cfg.scheme)
    orders = observed_orders(rows)
    slowest = max(r.seconds for r in rows)
    by_m = {r.M: r for r in rows}
    ok = 256 in by_m and 512 in by_m and orders[-1] >= 1.9 and slowest < 60.0
    assert record(7, ok, f"orders {', '.join(f'{o:.3f}' for o in orders)}; 256->512 {orders[-1]:.3f} (>= 1.9); "
                         f"slowest run {slowest:.1f} s (< 60 s)")


def test_criterion_8_blowup_monitors(vacuum_runs):
    keys = ("rho_min", "rho_max", "mean_temp_max", "velocity_accumulator")
    peak = {M: out.peaks["monitor_rho_inv_max"] for M, out in vacuum_runs.items()}
    initial = {M: out.reports[0].monitor_rho_inv_max for M, out in vacuum_runs.items()}
    worst = 1.0
    finite = True
    for M in (128, 256):
        a, b = vacuum_runs[M].interior, vacuum_runs[2 * M].interior
        for k in keys:
            finite &= bool(np.isfinite(a[k]) and np.isfinite(b[k]))
            worst = max(worst, a[k] / b[k], b[k] / a[k])
    ok = min(peak.values()) > 20.0 and finite and worst <= 2.0
    assert record(8, ok, f"peak max 1/rho {min(peak.values()):.2f} from {max(initial.values()):.2f} (> 20); "
                         f"exterior monitors within factor {worst:.4f} of refined (<= 2)")


def test_criterion_9_determinism(tmp_path):
    identical = []
    for p in SUITE:
        outs = []
        for k in (0, 1):
            d = tmp_path / f"{p.stem}_{k}"
            subprocess.run([sys.executable, "-m", "radialnsf.harness.cli", "run", str(p), "--out", str(d)],
                           check=True, capture_output=True)
            outs.append((d / "timeseries.csv").read_bytes())
        identical.append(outs[0] == outs[1])
    ok = all(identical)
    assert record(9, ok, f"byte-identical timeseries.csv on {sum(identical)}/{len(identical)} suite configs")


def test_suite_runs_complete(suite_runs):
    for name, out in suite_runs.items():
        assert out.termination == END_TIME, name

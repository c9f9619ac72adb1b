"""
Reconstructing shell volumes from the temperature history
=========================================================

Away from the centre the specific volume can be written in closed form from
the initial data, two exponential factors B and Y, and a time integral of
theta. The ledger accumulates those integrals step by step; comparing the
reconstruction with the computed v measures how consistent the discrete
solution is with that formula.

Two groupings of the normalising shell volume W = int_{h0}^1 v dh are
available. "exact" divides the integrated bracket by W at the final time.
"printed" divides by W inside the time integral. They coincide when W is
constant, but here W changes and only the exact grouping converges.
"""

from __future__ import annotations

from radialnsf.harness import from_dict, run_simulation

base = {
    "name": "rep",
    "initial_data": {"kind": "gaussianBump", "amplitude": 0.3},
    "end_time": 0.1,
    "output_interval": 0.05,
}

for form in ("exact", "printed"):
    prev = None
    for M, dt in ((128, 4e-4), (256, 2e-4), (512, 1e-4)):
        cfg = from_dict({**base, "grid": {"M": M}, "fixed_dt": dt,
                         "representation": {"anchor_mass": 0.25, "form": form}})
        out = run_simulation(cfg)
        r = max(x["max_residual"] for x in out.representation)
        last = out.representation[-1]
        note = "" if prev is None else f"  ratio {prev / r:.2f}"
        print(f"{form:>7} M={M:4d}  residual {r:.3e}  Y in [{last['Y_min']:.6f}, {last['Y_max']:.6f}]{note}")
        prev = r

"""Cartesian parameter sweeps over independent simulations."""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor

from .config import ConfigError, ScenarioConfig
from .runner import run_simulation


def sweep_points(axes: dict, max_jobs: int) -> list[dict]:
    if not axes:
        return [{}]
    keys = sorted(axes)
    for k in keys:
        if not isinstance(axes[k], (list, tuple)) or not axes[k]:
            raise ConfigError(f"sweep axis {k!r} must be a nonempty list")
    n = 1
    for k in keys:
        n *= len(axes[k])
    if n > max_jobs:
        raise ConfigError(f"sweep has {n} runs, exceeding the job cap of {max_jobs}")
    return [dict(zip(keys, combo)) for combo in itertools.product(*(axes[k] for k in keys))]


def summarize(out) -> dict:
    last = out.reports[-1]
    row = {
        "termination": out.termination,
        "final_time": out.final_state.time,
        "steps": out.steps,
        "rejected": out.rejected,
        "entropy_residual": last.entropy_residual,
        "jensen_margin_min": min(r.jensen_margin for r in out.reports),
    }
    row.update({f"peak_{k}": v for k, v in out.peaks.items()})
    row.update({f"interior_{k}": v for k, v in out.interior.items()})
    return row


def _run_point(args):
    index, cfg, point = args
    row = {"index": index, **point}
    try:
        row.update(summarize(run_simulation(cfg.with_updates(point))), error="")
    except Exception as exc:  # recorded per row; the sweep carries on
        row.update(termination="failed", error=f"{type(exc).__name__}: {exc}")
    return row


def run_sweep(cfg: ScenarioConfig, axes: dict | None = None, max_jobs: int | None = None,
              workers: int | None = None) -> list[dict]:
    """One summary row per grid point, in a fixed order independent of scheduling."""
    axes = cfg.sweep.axes if axes is None else axes
    max_jobs = cfg.sweep.max_jobs if max_jobs is None else max_jobs
    workers = cfg.sweep.workers if workers is None else workers
    points = sweep_points(axes, max_jobs)
    # validate every override before anything runs
    for pt in points:
        cfg.with_updates(pt)
    jobs = [(i, cfg, pt) for i, pt in enumerate(points)]
    if workers <= 1 or len(jobs) == 1:
        rows = [_run_point(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_point, jobs))
    return sorted(rows, key=lambda r: r["index"])

"""Monte-Carlo estimate of the basin of the pitch set.

Each run draws a Haar-random orientation and an angular velocity uniform in a
ball, integrates the closed loop and records which critical component the
trajectory settles on. Run ``i`` uses its own generator seeded from
``(seed, i)``, so results are independent of worker count and scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .config import ExperimentConfig
from .dynamics import BodyState, NumericalAbort, Outcome, simulate_probe
from .so3 import pitch_decompose, random_rotation

WORKERS_ENV = "PITCHANCHOR_WORKERS"


@dataclass(frozen=True)
class BasinSummary:
    n_total: int
    n_converged_P: int
    n_converged_Q: int
    n_undecided: int
    median_time: float | None
    max_time: float | None
    seed: int
    omega_max: float
    T: float
    h: float
    template_enabled: bool

    def to_dict(self) -> dict:
        return asdict(self)


def run_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def sample_omega(rng: np.random.Generator, omega_max: float) -> np.ndarray:
    """Uniform sample from the ball of radius ``omega_max``."""
    v = rng.standard_normal(3)
    v /= np.linalg.norm(v)
    return omega_max * rng.random() ** (1.0 / 3.0) * v


def initial_state(cfg: ExperimentConfig, index: int) -> BodyState:
    mc = cfg["monte_carlo"]
    if mc["sampler"] == "initial_state":
        return cfg.initial_state()
    rng = run_rng(mc["seed"], index)
    R = random_rotation(rng)
    return BodyState(R, sample_omega(rng, mc["omega_max"]))


def _run_one(task) -> dict:
    cfg_data, index = task
    cfg = ExperimentConfig(cfg_data)
    s0 = initial_state(cfg, index)
    tol = cfg["tolerances"]
    row = {"run": index, "q0": s0.R.q.tolist(), "omega0": s0.omega.tolist()}
    try:
        res = simulate_probe(
            s0, cfg.inertia(), cfg.gains(), cfg.template(),
            h=cfg["integrator"]["h"], T=cfg["monte_carlo"]["T"],
            tol_angle=tol["angle"], tol_omega=tol["omega"])
    except NumericalAbort as exc:
        row.update(outcome=Outcome.UNDECIDED.value, time=None, aborted=str(exc))
        return row
    _, swing = pitch_decompose(res.final.R)
    w = res.final.omega
    row.update(
        outcome=res.convergence.outcome.value,
        time=res.convergence.time,
        final_swing=swing,
        final_transverse_omega=float(np.hypot(w[0], w[2])),
    )
    return row


def worker_count(default: int = 1) -> int:
    raw = os.environ.get(WORKERS_ENV)
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        return default


def run_basin(cfg: ExperimentConfig, workers: int | None = None) -> tuple[BasinSummary, list[dict]]:
    mc = cfg["monte_carlo"]
    workers = worker_count() if workers is None else workers
    tasks = [(cfg.data, i) for i in range(mc["n"])]
    # validate dataclass invariants once, in the parent
    cfg.inertia(), cfg.gains(), cfg.template()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_run_one, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        rows = [_run_one(t) for t in tasks]
    rows.sort(key=lambda r: r["run"])
    return summarize(cfg, rows), rows


def summarize(cfg: ExperimentConfig, rows: list[dict]) -> BasinSummary:
    mc = cfg["monte_carlo"]
    counts = {o.value: 0 for o in Outcome}
    for r in rows:
        counts[r["outcome"]] += 1
    times = [r["time"] for r in rows if r["outcome"] == Outcome.CONVERGED_P.value]
    return BasinSummary(
        n_total=len(rows),
        n_converged_P=counts[Outcome.CONVERGED_P.value],
        n_converged_Q=counts[Outcome.CONVERGED_Q.value],
        n_undecided=counts[Outcome.UNDECIDED.value],
        median_time=float(np.median(times)) if times else None,
        max_time=float(max(times)) if times else None,
        seed=int(mc["seed"]),
        omega_max=float(mc["omega_max"]),
        T=float(mc["T"]),
        h=float(cfg["integrator"]["h"]),
        template_enabled=bool(cfg["template"]["enabled"]),
    )

"""Command-line front end.

Exit codes: 0 success, 1 a verified property failed, 2 configuration error,
3 numerical abort, 4 output path not writable.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import potential
from ._backend import BACKEND
from .allocation import StanceGeometry, allocate, pitch_coupling_residual, reconstruct_wrench
from .basin import run_basin
from .config import ConfigError, load_config
from .control import Wrench
from .dynamics import COLUMNS, NumericalAbort, inertia_stance, simulate
from .stability import H_P, H_Q, definiteness, equilibrium, linearize
from .verify import run_all

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

FAULTS = ("grad-sign",)


def format_row(row) -> str:
    return ",".join(format(float(v), ".17g") for v in row)


def write_csv(path: Path, data: np.ndarray) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(COLUMNS) + "\n")
        for row in data:
            fh.write(format_row(row) + "\n")


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


def _complex_list(lam) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in lam]


def _open_out(path: str | None) -> Path:
    if path is None:
        raise ConfigError("--out is required")
    p = Path(path)
    # fail before the (possibly long) computation
    with open(p, "a"):
        pass
    return p


def _overrides(args) -> dict:
    out: dict = {}
    if getattr(args, "seed", None) is not None:
        out.setdefault("monte_carlo", {})["seed"] = args.seed
        out.setdefault("verify", {})["seed"] = args.seed
        out.setdefault("initial_state", {})["seed"] = args.seed
    if getattr(args, "steps_per_sec", None) is not None:
        if not args.steps_per_sec > 0:
            raise ConfigError("--steps-per-sec must be positive")
        out.setdefault("integrator", {})["h"] = 1.0 / args.steps_per_sec
    if getattr(args, "duration", None) is not None:
        key = "monte_carlo" if args.command == "basin" else "integrator"
        out.setdefault(key, {})["T"] = args.duration
    return out


def cmd_simulate(cfg, args) -> int:
    out = _open_out(args.out)
    integ = cfg["integrator"]
    traj = simulate(cfg.initial_state(), cfg.inertia(), cfg.gains(), cfg.template(),
                    h=integ["h"], T=integ["T"])
    write_csv(out, traj.data)
    return EXIT_OK


def cmd_basin(cfg, args) -> int:
    out = _open_out(args.out)
    runs_path = out.with_name(out.stem + ".runs.jsonl")
    with open(runs_path, "a"):
        pass
    summary, rows = run_basin(cfg)
    with open(runs_path, "w") as fh:
        for r in rows:
            fh.write(json.dumps(r, sort_keys=True) + "\n")
    out.write_text(_dumps(summary.to_dict()) + "\n")
    return EXIT_OK


def linearize_report(cfg) -> dict:
    inert = cfg.inertia()
    gains = cfg.gains(strict=False)
    tmpl = cfg.template(strict=False)
    report = {}
    for at, H in (("P", H_P), ("Q", H_Q)):
        lin = linearize(at, inert, gains, tmpl)
        on = 1.0 if tmpl.enabled else 0.0
        K = np.diag([0.0, on * tmpl.gamma, 0.0])
        B = np.diag([0.0, on * tmpl.beta, 0.0])
        KD = np.diag([gains.kappa1, 0.0, gains.kappa2])
        M = inertia_stance(equilibrium(at, tmpl), inert)
        report[at] = {
            "A": lin.A.tolist(),
            "eigenvalues": _complex_list(lin.eigenvalues),
            "classification": lin.classification.value,
            "definiteness": {
                "H+K": definiteness(H + K).value,
                "K_D+B": definiteness(KD + B).value,
                "M": definiteness(0.5 * (M + M.T)).value,
            },
        }
    return report


def cmd_linearize(cfg, args) -> int:
    print(_dumps(linearize_report(cfg)))
    return EXIT_OK


def cmd_verify(cfg, args) -> int:
    grad_fn = potential.grad
    if args.inject == "grad-sign":
        def grad_fn(R):
            return -potential.grad(R)
    results = run_all(cfg, grad_fn)
    ok = all(r.passed for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: max_error={r.max_error:.3e} tol={r.tolerance:.1e}", file=sys.stderr)
    report = {"passed": ok, "backend": BACKEND, "properties": [r.to_dict() for r in results]}
    print(_dumps(report))
    return EXIT_OK if ok else EXIT_FAILED


def allocation_report(cfg) -> dict:
    st = cfg["stance"]
    try:
        geom = StanceGeometry(st["p"], st["q"])
    except ValueError as exc:
        raise ConfigError(f"stance: {exc}") from exc
    wrench = Wrench(np.array(st["force"], dtype=float), np.array(st["torque"], dtype=float))
    forces = allocate(geom, wrench, st["f_min"], st["gravity_ff"])
    force, torque = reconstruct_wrench(forces, geom)
    diff_torque = torque - np.cross(geom.p, forces.s)
    return {
        "feasible": forces.feasible,
        "sigma": float(forces.sigma),
        "s": forces.s.tolist(),
        "d": forces.d.tolist(),
        "f_l": forces.f_l.tolist(),
        "f_r": forces.f_r.tolist(),
        "dropped_toe_line_torque": forces.dropped_torque,
        "reconstruction": {
            "force": force.tolist(),
            "torque": torque.tolist(),
            "force_residual": float(np.max(np.abs(force - forces.s))),
            "difference_torque_residual": float(
                np.max(np.abs(diff_torque - np.cross(geom.q, forces.sigma * forces.d)))),
        },
        "pitch_coupling_residual": pitch_coupling_residual(geom, forces.s).tolist(),
    }


def cmd_allocate(cfg, args) -> int:
    print(_dumps(allocation_report(cfg)))
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "basin": cmd_basin,
    "linearize": cmd_linearize,
    "verify": cmd_verify,
    "allocate": cmd_allocate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pitchanchor", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON experiment configuration")
        p.add_argument("--seed", type=int)
        p.add_argument("--steps-per-sec", type=float, dest="steps_per_sec",
                       help="integrator rate; overrides integrator.h")
        p.add_argument("--duration", type=float,
                       help="simulated time in seconds (monte_carlo.T for basin)")
        if name in ("simulate", "basin"):
            p.add_argument("--out", required=True)
        if name == "verify":
            p.add_argument("--inject", choices=FAULTS, help=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, _overrides(args))
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"pitchanchor: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalAbort as exc:
        print(f"pitchanchor: numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"pitchanchor: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

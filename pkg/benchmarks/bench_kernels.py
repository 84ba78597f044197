"""Compare the compiled and pure-Python integrator kernels.

Runs the same RK4 trajectory and convergence probe through both backends,
checks that they agree bit for bit, and reports time per step.

    python3 benchmarks/bench_kernels.py --steps 20000
"""

import argparse
import time

import numpy as np

from pitchanchor import _kernels_py
from pitchanchor.control import AnchorGains, TemplateParams
from pitchanchor.dynamics import BodyState, InertiaModel, kernel_params
from pitchanchor.so3 import random_rotation


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=20_000, help="RK4 steps per timing run")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--h", type=float, default=1e-3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    try:
        from pitchanchor import _kernels as compiled
    except ImportError:
        compiled = None

    rng = np.random.default_rng(args.seed)
    x0 = BodyState(random_rotation(rng), rng.uniform(-2, 2, 3)).to_vector()
    params = kernel_params(InertiaModel(), AnchorGains(), TemplateParams())
    backends = [("python", _kernels_py)] + ([("cython", compiled)] if compiled else [])

    results = {}
    print(f"{'backend':<8} {'kernel':<11} {'steps':>8} {'seconds':>9} {'us/step':>9}")
    for name, mod in backends:
        for kernel, call in (
            ("trajectory", lambda m=mod: m.trajectory(x0, params, args.h, args.steps)),
            ("probe", lambda m=mod: m.probe(x0, params, args.h, args.steps, 1e-3, 1e-3)),
        ):
            secs, out = best_of(call, args.repeat)
            results[name, kernel] = (secs, out)
            print(f"{name:<8} {kernel:<11} {args.steps:>8} {secs:>9.4f} {1e6 * secs / args.steps:>9.3f}")

    if compiled is None:
        print("compiled kernel not built; only the fallback was timed")
        return 0

    (tp, (dp, np_)), (tc, (dc, nc)) = results["python", "trajectory"], results["cython", "trajectory"]
    identical = np_ == nc and np.array_equal(dp, dc)
    pp, pc = results["python", "probe"][1], results["cython", "probe"][1]
    probe_same = pp[:3] == pc[:3] and np.array_equal(pp[3], pc[3]) and pp[4] == pc[4]
    print(f"trajectory speedup {tp / tc:.0f}x, probe speedup "
          f"{results['python', 'probe'][0] / results['cython', 'probe'][0]:.0f}x")
    print(f"outputs bit-identical: trajectory {identical}, probe {probe_same}")
    return 0 if identical and probe_same else 1


if __name__ == "__main__":
    raise SystemExit(main())

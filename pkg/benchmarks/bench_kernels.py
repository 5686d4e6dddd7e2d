#!/usr/bin/env python3
"""Time the numba and numpy kernel backends on the same inputs.

Compilation is excluded: every numba kernel is warmed up first.  Results
are checked for agreement before timing.

    python3 benchmarks/bench_kernels.py [--n-max 50] [--repeat 5] [--json out.json]
"""

import argparse
import json
import time

import numpy as np

from skewflow import _kernels
from skewflow.corpus import GeneratorSpec, random_block_cocycle


def inputs(n_max, seed):
    spec = GeneratorSpec(blocks=[(2, (-2.0, -0.5), "stable"), (1, (0.5, 1.5), "unstable")],
                         seed=seed, conjugation="similarity", length=n_max)
    system, _ = random_block_cocycle(spec)
    steps = system.steps
    phi = _kernels.transition_products(steps, use_numba=False)
    v = np.ones((1, 3)) / 3.0
    Y = _kernels.trajectory_norms(phi, v, "l1", use_numba=False)[0]
    Q = np.broadcast_to(Y[None, :, :], (n_max + 1,) * 3).copy()
    return {
        "transition_products": (steps,),
        "trajectory_norms": (phi, v, "l1"),
        "forward_ratios": (Y, 0.5, True),
        "backward_ratios": (Y, 0.5, True),
        "forward_sums": (Y, 0.25, 1.0, True),
        "backward_sums": (Y, 0.25, 1.0, True),
        "adjoint_sums": (Q, 0.25, 1.0, 1.0),
    }


def best_of(fn, args, use_numba, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args, use_numba=use_numba)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-max", type=int, default=50)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", help="write results here")
    args = ap.parse_args()

    if not _kernels.NUMBA_KERNELS:
        raise SystemExit("numba is not installed; nothing to compare")
    _kernels.warmup()
    data = inputs(args.n_max, args.seed)
    rows = []
    print(f"{'kernel':22s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s}")
    for name, a in data.items():
        fn = getattr(_kernels, name)
        ref = fn(*a, use_numba=False)
        got = fn(*a, use_numba=True)
        ref0 = ref[0] if isinstance(ref, tuple) else ref
        got0 = got[0] if isinstance(got, tuple) else got
        if not np.allclose(ref0, got0, rtol=1e-12, atol=0, equal_nan=True):
            raise SystemExit(f"{name}: backends disagree")
        t_np = best_of(fn, a, False, args.repeat)
        t_nb = best_of(fn, a, True, args.repeat)
        rows.append({"kernel": name, "numpy_s": t_np, "numba_s": t_nb, "speedup": t_np / t_nb})
        print(f"{name:22s} {1e3 * t_np:11.3f} {1e3 * t_nb:11.3f} {t_np / t_nb:8.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"n_max": args.n_max, "repeat": args.repeat, "results": rows}, fh, indent=2)


if __name__ == "__main__":
    main()

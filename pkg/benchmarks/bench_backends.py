#!/usr/bin/env python3
"""Time the numba kernels against the pure-numpy fallback.

The backend is fixed at import time by TSAGG_NUMBA, so each measurement
runs in a child interpreter with the flag set.  Reported numbers are the
best of --repeat runs after a warm-up call.

    python3 benchmarks/bench_backends.py [--hours 8760] [--trials 2000]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def _child(hours: int, trials: int, repeat: int) -> None:
    import numpy as np

    from tsagg._kernels import BACKEND
    from tsagg.data_io import default_spec, generate_synthetic
    from tsagg.dispatch_model import solve_full
    from tsagg.evaluation import run_theorem_trials
    from tsagg.lp_core import StandardFormLP, solve

    solve(StandardFormLP(np.array([1.0, 1.0]), np.array([[1.0, 1.0]]), np.array([1.0])))
    system = generate_synthetic(default_spec(hours=hours))

    def best(fn) -> float:
        times = []
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            times.append(time.perf_counter() - t0)
        return min(times)

    result = {
        "backend": BACKEND,
        "solve_full_s": best(lambda: solve_full(system)),
        "trials_s": best(lambda: run_theorem_trials(trials, seed=0)),
    }
    print(json.dumps(result))


def _measure(flag: str, args) -> dict:
    env = dict(os.environ, TSAGG_NUMBA=flag, TSAGG_THREADS="1")
    proc = subprocess.run(
        [sys.executable, __file__, "--child", "--hours", str(args.hours),
         "--trials", str(args.trials), "--repeat", str(args.repeat)],
        env=env, capture_output=True, text=True,
    )
    if proc.returncode != 0:
        sys.exit(f"child run (TSAGG_NUMBA={flag}) failed:\n{proc.stderr}")
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--hours", type=int, default=8760)
    parser.add_argument("--trials", type=int, default=2000)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()
    if args.child:
        _child(args.hours, args.trials, args.repeat)
        return

    numba = _measure("1", args)
    numpy_ = _measure("0", args)
    print(
        f"backend comparison: {args.hours} hourly LPs, {args.trials} "
        f"randomized trials, best of {args.repeat}, single-threaded\n"
    )
    print(f"{'':24} {'numba':>10} {'numpy':>10} {'speedup':>9}")
    for key, label in (("solve_full_s", "solve_full [s]"),
                       ("trials_s", "theorem trials [s]")):
        ratio = numpy_[key] / numba[key] if numba[key] > 0 else float("inf")
        print(f"{label:24} {numba[key]:>10.3f} {numpy_[key]:>10.3f} {ratio:>8.1f}x")


if __name__ == "__main__":
    main()

"""Benchmark the compiled tension kernel against the pure-Python twin.

Measures ``pd_batch`` — the per-tick hot path — on realistic batch sizes,
and optionally a whole closed-loop run under each backend.  The two
implementations produce bit-identical results (the test suite enforces
it); this script only quantifies the speed difference.

Usage:
    python benchmarks/compare_backends.py [--ticks N] [--full-run]
"""
from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np


def time_pd_batch(impl, batches, repeats: int) -> float:
    start = time.perf_counter()
    for _ in range(repeats):
        for args in batches:
            impl.pd_batch(*args)
    return (time.perf_counter() - start) / repeats


def make_batches(count: int, seed: int = 11):
    rng = np.random.default_rng(seed)
    batches = []
    for _ in range(count):
        k = int(rng.integers(4, 9))  # four to eight active wires per tick
        batches.append((
            rng.uniform(0.5, 3.5, k),
            rng.uniform(0.5, 3.5, k),
            rng.uniform(-0.3, 0.3, k),
            rng.uniform(0.0, 180.0, k),
            np.full(k, 180.0),
            500.0, 50.0, 0.025, 10.0,
        ))
    return batches


def bench_kernel(ticks: int) -> None:
    from wiredrive.kernel import _fallback

    try:
        from wiredrive.kernel import _speedups
    except ImportError:
        print("compiled kernel not built; nothing to compare")
        return

    batches = make_batches(ticks)
    # warm up, then repeat enough for a stable reading
    time_pd_batch(_fallback, batches[:100], 1)
    time_pd_batch(_speedups, batches[:100], 1)
    t_py = time_pd_batch(_fallback, batches, 5)
    t_c = time_pd_batch(_speedups, batches, 5)

    per_py = t_py / ticks * 1e6
    per_c = t_c / ticks * 1e6
    print(f"pd_batch over {ticks} simulated ticks (mean of 5 passes):")
    print(f"  python   {t_py * 1e3:8.2f} ms  ({per_py:6.2f} us/tick)")
    print(f"  compiled {t_c * 1e3:8.2f} ms  ({per_c:6.2f} us/tick)")
    print(f"  speedup  {t_py / t_c:8.2f}x")


def bench_full_run() -> None:
    """Time one short built-in run per backend in fresh interpreters."""
    script = (
        "import time\n"
        "from wiredrive.cli import apply_overrides\n"
        "from wiredrive.engine import run\n"
        "from wiredrive.model import scenario_from_dict, scenario_to_dict\n"
        "from wiredrive.scenarios import builtin_scenario\n"
        "doc = scenario_to_dict(builtin_scenario('pull_up'))\n"
        "apply_overrides(doc, [('sim.duration', 5.0)])\n"
        "s = scenario_from_dict(doc)\n"
        "t0 = time.perf_counter()\n"
        "run(s)\n"
        "print(time.perf_counter() - t0)\n"
    )
    print("\nfull 5 s pull-up run (fresh interpreter per backend):")
    for backend in ("python", "compiled"):
        env = dict(os.environ, WIREDRIVE_BACKEND=backend)
        proc = subprocess.run([sys.executable, "-c", script],
                              capture_output=True, text=True, env=env)
        if proc.returncode != 0:
            print(f"  {backend:8s} failed: {proc.stderr.strip()}")
            continue
        print(f"  {backend:8s} {float(proc.stdout):8.2f} s wall")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--ticks", type=int, default=20000,
                        help="simulated control ticks per timing pass")
    parser.add_argument("--full-run", action="store_true",
                        help="also time a whole closed-loop run per backend")
    args = parser.parse_args()
    bench_kernel(args.ticks)
    if args.full_run:
        bench_full_run()
    return 0


if __name__ == "__main__":
    sys.exit(main())

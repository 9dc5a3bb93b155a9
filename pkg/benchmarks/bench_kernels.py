"""Time the compiled kernels against the pure-Python ones.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each workload runs through ``fairdiv.kernels`` twice, once with
``use_compiled=True`` and once with ``use_compiled=False``; results are
checked for equality before timings are reported.
"""

import argparse
import random
import time

from fairdiv import kernels
from fairdiv.algorithms import perturb_for_efx0
from fairdiv.core import Instance


def _rows(rng, n, m, hi):
    return [[rng.randint(0, hi) for _ in range(m)] for _ in range(n)]


def workloads(rng):
    vals = _rows(rng, 4, 8, 9)
    yield "mnw_best 4x8", lambda c: tuple(kernels.mnw_best(vals, 0, 4**8, use_compiled=c))

    vals3 = _rows(rng, 3, 10, 9)
    total = 3**10

    def collect(c):
        key = kernels.mnw_best(vals3, 0, total, use_compiled=c)
        return list(kernels.mnw_collect(vals3, 0, total, *key, use_compiled=c))

    yield "mnw_best+collect 3x10", collect

    big = _rows(rng, 20, 100, 50)
    owners = [[rng.randrange(20) for _ in range(100)] for _ in range(2000)]

    def violations(c):
        return [
            None if (w := kernels.first_violation(big, o, kernels.EFX0, use_compiled=c)) is None else tuple(w)
            for o in owners
        ]

    yield "first_violation 20x100 x2000", violations

    orig = Instance.from_rows([[rng.choice([0, 1, 2, 3]) for _ in range(7)] for _ in range(3)])
    pert = perturb_for_efx0(orig).instance
    yield "perturbation scan 3x7", lambda c: tuple(
        kernels.perturbation_counterexample(pert.int_rows, orig.int_rows, use_compiled=c)
    )


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t)
    return min(times), result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    print(f"backend: {kernels.BACKEND}")
    if kernels.BACKEND != "cython":
        print("compiled extension not available; only the Python timings are meaningful")
    print(f"{'workload':32} {'compiled':>10} {'python':>10} {'speedup':>8}")
    for name, fn in workloads(random.Random(args.seed)):
        tc, rc = best_of(lambda: fn(True), args.repeat)
        tp, rp = best_of(lambda: fn(False), args.repeat)
        if rc != rp:
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:32} {tc:10.4f} {tp:10.4f} {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Throughput comparison of the numba kernel against the pure-numpy fallback.

Runs the same seeded workload through both backends, reports trials/second,
and checks that the two agree (they consume identical draw streams, so event
counts match up to last-ulp rounding of log()).

Usage: python benchmarks/bench_backends.py [--trials N]
"""

import argparse
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from backsec._kernels import HAVE_NUMBA
from backsec.config import loads_config, preset_text
from backsec.montecarlo import McConfig, estimate_all
from backsec.system import ProtocolKind


def run(backend: str, params, mc: McConfig):
    os.environ["BACKSEC_BACKEND"] = backend
    # warm-up pass so JIT compilation is not timed
    estimate_all(params, McConfig(trials=10_000, seed=mc.seed))
    t0 = time.perf_counter()
    result = estimate_all(params, mc)
    elapsed = time.perf_counter() - t0
    return result, elapsed


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=2_000_000)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    spec = loads_config(preset_text("fig2"))
    params = spec.base
    mc = McConfig(trials=args.trials, seed=2024, workers=args.workers)

    results = {}
    print(f"workload: {args.trials} trials, N={params.n_tags}, workers={args.workers}")
    for backend in ("numpy", "numba") if HAVE_NUMBA else ("numpy",):
        res, elapsed = run(backend, params, mc)
        results[backend] = res
        print(f"{backend:6s}: {elapsed:7.3f} s   {args.trials / elapsed / 1e6:6.2f} M trials/s")

    if len(results) == 2:
        worst = 0.0
        for proto in ProtocolKind:
            for metric in ("sop", "ip"):
                a = results["numpy"][(proto, metric)].p_hat
                b = results["numba"][(proto, metric)].p_hat
                worst = max(worst, abs(a - b))
        print(f"max backend estimate difference: {worst:.3g} "
              f"({worst * args.trials:.0f} events)")
    else:
        print("numba unavailable; fallback timing only")
    return 0


if __name__ == "__main__":
    sys.exit(main())

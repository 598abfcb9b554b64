"""Time the numba and numpy kernel backends on the same workloads.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each case runs once untimed (numba compiles on first call) and then reports
the best of N timed runs for each backend.
"""

import argparse
import timeit

import numpy as np

from entroflow import (
    BrownianHistory,
    DelayParams,
    FundamentalSolution,
    Gaussian1D,
    OUParams,
    SimConfig,
    get_backend,
    set_backend,
    simulate_ou_exact,
    simulate_sdde_em,
)
from entroflow._backend import HAS_NUMBA
from entroflow.mc_sim import em_scheme_variance


def fundamental():
    p = DelayParams(-0.4, -1.3, 0.7)
    F = FundamentalSolution(p, 40 * p.tau)
    return F(np.linspace(0.0, 40 * p.tau, 20_000))


def sdde_em():
    p = DelayParams(0.0, -1.0, 1.0, 0.25)
    cfg = SimConfig(p, BrownianHistory(1.0), 1e-3, 4.0, 4096, 42, output_times=(1.0, 2.0, 4.0))
    return simulate_sdde_em(cfg).variance


def ou_exact():
    cfg = SimConfig(OUParams(-1.0, 2 ** 0.5), Gaussian1D(0.0, 0.5), 1e-2, 5.0, 20_000, 42)
    return simulate_ou_exact(cfg).variance


def em_green():
    return em_scheme_variance(DelayParams(-0.3, -1.0, 1.0, 1.0), 1e-3, 4000)


CASES = {
    "fundamental solution, 20k evals": fundamental,
    "SDDE Euler-Maruyama, 4096 paths x 4000 steps": sdde_em,
    "OU exact sampler, 20k paths x 500 steps": ou_exact,
    "EM Green's function variance, 4000 steps": em_green,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = ("numba", "numpy") if HAS_NUMBA else ("numpy",)
    prev = get_backend()
    print(f"{'case':48s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    try:
        for name, fn in CASES.items():
            best, results = {}, {}
            for b in backends:
                set_backend(b)
                results[b] = fn()
                best[b] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
            row = f"{name:48s}" + "".join(f"{best[b]:11.4f}s" for b in backends)
            if len(backends) == 2:
                row += f"{best['numpy'] / best['numba']:11.1f}x"
                # both backends must produce the same numbers, not just similar timings
                scale = max(1.0, float(np.abs(results["numba"]).max()))
                assert np.allclose(results["numba"], results["numpy"], rtol=0, atol=1e-13 * scale), name
            print(row)
    finally:
        set_backend(prev)


if __name__ == "__main__":
    main()

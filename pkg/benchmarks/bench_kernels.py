"""Compiled vs pure-numpy kernel timings.

    python3 benchmarks/bench_kernels.py [--n 1000000] [--repeat 3] [--threads 1]

Times ``segment_variances`` at a few scales and a full fluctuation surface
(33 q values, 20 scales per decade) with each available backend, and checks
that the two backends agree.
"""

import argparse
import time

import numpy as np

from mfitt import kernels, mfdfa


def best_of(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("-m", type=int, default=2)
    a = ap.parse_args(argv)

    backends = sorted(kernels.BACKENDS)
    if "compiled" not in backends:
        print("compiled extension not built; only the fallback is timed")
    x = np.random.default_rng(0).standard_normal(a.n)
    print(f"N={a.n} m={a.m} threads={a.threads} backends={','.join(backends)}")
    print(f"{'case':<28}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")

    for s in (10, 100, 1000, 10_000):
        times = {}
        outs = {}
        for b in backends:
            times[b], outs[b] = best_of(lambda: kernels.segment_variances(x, s, a.m, a.threads, b),
                                        a.repeat)
        if len(outs) == 2:
            diff = np.max(np.abs(outs["compiled"] - outs["python"]) / outs["python"])
            assert diff < 1e-12, f"backends disagree at s={s}: {diff:.2e}"
        _row(f"segment_variances s={s}", times)

    times = {}
    for b in backends:
        cfg = mfdfa.MfdfaConfig(threads=a.threads, backend=b, m=a.m)
        times[b], _ = best_of(lambda: mfdfa.fluctuation_surface(x, cfg), 1)
    _row("fluctuation_surface (full)", times)


def _row(name, times):
    line = f"{name:<28}" + "".join(f"{times[b]:>11.4f}s" for b in sorted(times))
    if len(times) == 2:
        line += f"{times['python'] / times['compiled']:>9.1f}x"
    print(line)


if __name__ == "__main__":
    main()

"""Compiled kernels against the numpy fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat 3]

Prints one line per kernel with the median wall time of each backend and
the speed-up.  Exits non-zero if the two backends disagree on any input.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time

import numpy as np

from ffmwrc import code as lc
from ffmwrc import kernels
from ffmwrc.field import make_field
from ffmwrc.prob import NoisePmf, stream


def _time(fn, repeat):
    out, times = None, []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return statistics.median(times), out


def ml_binary_case(k=18, n=128):
    rng = stream(1)
    G = rng.integers(0, 2, (k, n))
    y = rng.integers(0, 2, n)
    args = (lc.pack_bits(G), lc.pack_bits(y))
    return f"ml_binary k={k} n={n}", lambda impl: impl.ml_binary(*args)


def ml_general_case(k=7, n=24):
    F = make_field(5)
    rng = stream(2)
    G = rng.integers(0, 5, (k, n))
    y = rng.integers(0, 5, n)
    pmf = NoisePmf(F, [0.6, 0.1, 0.1, 0.1, 0.1])
    nxt = np.roll(np.arange(5), -1)
    rowmul = F.mul_table[np.arange(5)[None, :, None], G[:, None, :]]
    delta = np.ascontiguousarray(F.sub_table[rowmul[:, nxt, :], rowmul])
    cls = np.ascontiguousarray(pmf.classes[F.sub_table])
    args = (delta, y, F.add_table, cls, pmf.class_logp)
    return f"ml_general GF(5) k={k} n={n}", lambda impl: impl.ml_general(*args)


def isd_case(k=77, n=256, iterations=200):
    F = make_field(2)
    rng = stream(3)
    code = lc.sample_code(F, k, n, rng, full_rank=True)
    y = F.vec_add(code.encode(rng.integers(0, 2, k)), (rng.random(n) < 0.1).astype(np.int64))
    p, ell, k1, sub1, sub2 = lc._stern_params(k, n, None, None)
    stop = np.full(n + 1, iterations, dtype=np.int64)  # fixed work for timing
    args = (lc.pack_bits(code.G), lc.pack_bits(F.vec_sub(y, code.q)), n, iterations,
            sub1, sub2, ell, 7, stop)
    return f"isd_binary k={k} n={n} x{iterations} iterations", lambda impl: impl.isd_binary(*args)


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return bool(np.array_equal(np.asarray(a), np.asarray(b)))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not kernels.COMPILED:
        print("compiled extension not available; only the fallback can be timed", file=sys.stderr)
        return 1
    ok = True
    for label, run in (ml_binary_case(), ml_general_case(), isd_case()):
        tc, oc = _time(lambda: run(kernels), args.repeat)
        tp, op = _time(lambda: run(kernels.fallback), args.repeat)
        agree = _same(oc, op)
        ok &= agree
        print(f"{label:<40} compiled {tc * 1e3:9.2f} ms  fallback {tp * 1e3:9.2f} ms  "
              f"x{tp / tc:7.1f}  {'agree' if agree else 'DISAGREE'}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())

"""Compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each case runs under both backends, checks the outputs agree and prints the
best wall-clock time of ``--repeat`` runs.
"""

import argparse
import time

import numpy as np

from rankstair import kernels
from rankstair.channels import random_full_rank
from rankstair.fields import base_rref, make_tower, matmul_mixed
from rankstair.staircase import StaircaseScheme, decode_efficient, plan, preprocess_all, staircase_encode


def _best(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return out, best


def cases():
    rng = np.random.default_rng(7)
    T = make_tower(2, 8, 64)
    A = T.random(rng, 32, 40)
    B = T.random(rng, 40, 40)
    yield "ext_matmul 32x40x40 F_256^64", lambda: T.matmul(A, B)
    M = T.random(rng, 24, 48)
    yield "ext_rref 24x48 F_256^64", lambda: T.rref(M)[0]
    a = T.random(rng, 4096)
    yield "ext_inv 4096 F_256^64", lambda: T.inv(a)
    T3 = make_tower(3, 2, 6)
    X = T3.base.random(rng, (200, 200))
    yield "base_rref 200x200 F_9", lambda: base_rref(T3.base, X)[0]
    P = plan(40, 24, 8, 0, [24, 40])
    sc = StaircaseScheme.build(T, P)
    S = T.random(rng, P.alpha, P.ell)
    C = staircase_encode(sc, S, rng)
    Afull = random_full_rank(T.base, 40, 40, rng)
    R = preprocess_all(sc, 40, matmul_mixed(T, C, Afull))
    yield "staircase decode d=40 (q=256, n=40)", lambda: decode_efficient(sc, R, Afull, 0)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    try:
        kernels.use("compiled")
    except ImportError:
        print("compiled kernels unavailable; build with `pip install -e . --no-build-isolation`")
        return
    print(f"{'case':44s} {'compiled':>10s} {'pure':>10s} {'speedup':>8s}")
    for name, fn in cases():
        kernels.use("compiled")
        ref, tc = _best(fn, args.repeat)
        kernels.use("pure")
        out, tp = _best(fn, args.repeat)
        kernels.use("compiled")
        if ref is not None and not np.array_equal(ref, out):
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:44s} {tc:10.4f} {tp:10.4f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()

"""Compare the compiled and pure-numpy kernels on representative workloads.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from edgetopo import build_harper, build_kane_mele, kernels
from edgetopo.model import fiber_blocks


def workloads():
    km = build_kane_mele(1.0, (1.0, 1.0, 0.9), lambda_so=1.0, lambda_r=0.3, lambda_st=0.45)
    harper = build_harper(3, 7, 1.0)
    out = []
    for name, model in (("kane_mele L=4 p=1", km), ("harper L=1 p=7", harper)):
        a = model.T2 + np.exp(0.3j) * model.T3
        bs = np.array([fiber_blocks(model, 0.3, c)[1] for c in range(model.p)])
        ai, aa = np.linalg.inv(a), np.ascontiguousarray(a.conj().T)
        out.append((f"transfer_product {name}", "transfer_product", (ai, aa, bs, 0.1)))
        out.append((f"green_top_block N=200 {name}", "green_top_block", (a, bs, 0.1, 200)))
    rng = np.random.default_rng(0)
    f, _ = np.linalg.qr(rng.normal(size=(48, 48, 4, 2)) + 1j * rng.normal(size=(48, 48, 4, 2)))
    out.append(("link_phases 48x48 rank 2", "link_phases", (np.ascontiguousarray(f),)))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    cy = kernels.compiled()
    if cy is None:
        print("compiled kernels not built; only the numpy backend is available")
    print(f"{'workload':45s} {'numpy [us]':>12s} {'cython [us]':>12s} {'speedup':>8s}")
    for label, fn, argv in workloads():
        t_py = min(timeit.repeat(lambda: getattr(kernels.python, fn)(*argv), number=args.repeat,
                                 repeat=3)) / args.repeat * 1e6
        if cy is None:
            print(f"{label:45s} {t_py:12.1f} {'-':>12s} {'-':>8s}")
            continue
        ref, got = getattr(kernels.python, fn)(*argv), getattr(cy, fn)(*argv)
        assert np.allclose(ref, got, rtol=1e-8, atol=1e-10), label
        t_cy = min(timeit.repeat(lambda: getattr(cy, fn)(*argv), number=args.repeat,
                                 repeat=3)) / args.repeat * 1e6
        print(f"{label:45s} {t_py:12.1f} {t_cy:12.1f} {t_py / t_cy:7.1f}x")


if __name__ == "__main__":
    main()

"""Compare the numba and pure-numpy kernels on vector enumeration and orbit labelling.

Usage: python benchmarks/bench_kernels.py [--repeat N]

The numpy backend is the one selected by PQSURF_NO_NUMBA=1; here both are
called explicitly through the ``backend`` argument so a single process can
time them side by side.  Results must agree exactly.
"""
import argparse
import time

import numpy as np

from pqsurf import kernels
from pqsurf.catalog import load_catalog
from pqsurf.moduli import move_words
from pqsurf.orbifold import Signature, vector_array

CASES = [
    ((8, 3), Signature(2)),
    ((12, 3), Signature(2)),
    ((24, 3), Signature(2)),
    ((24, 3), Signature(0, (3, 3, 4))),
    ((48, 29), Signature(0, (2, 3, 8))),
    ((16, 8), Signature(0, (2, 4, 8))),
]


def timed(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    cat = load_catalog()
    kernels.warmup()
    print(f"{'group':10} {'signature':16} {'vectors':>8} {'enum nb':>9} {'enum np':>9} {'orb nb':>9} {'orb np':>9}")
    for key, sig in CASES:
        G = cat.get(*key).group
        t_enb, V = timed(lambda: vector_array(G, sig, True, backend="numba"), args.repeat)
        t_enp, V2 = timed(lambda: vector_array(G, sig, True, backend="numpy"), args.repeat)
        assert np.array_equal(V, V2)
        words = move_words(sig.base_genus, sig.r, G.gen_indices, G.inv)
        t_onb, L = timed(lambda: kernels.orbit_labels(V, G.mul, G.inv, words, backend="numba"), args.repeat)
        t_onp, L2 = timed(lambda: kernels.orbit_labels(V, G.mul, G.inv, words, backend="numpy"), args.repeat)
        assert np.array_equal(L, L2)
        print(f"G{key!s:9} {str(sig):16} {len(V):8d} {t_enb:9.4f} {t_enp:9.4f} {t_onb:9.4f} {t_onp:9.4f}")


if __name__ == "__main__":
    main()

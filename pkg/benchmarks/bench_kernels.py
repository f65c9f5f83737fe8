"""Time the sweep/support kernels and a full propagation on each backend.

    python benchmarks/bench_kernels.py --sizes 1000 4000 16000 --reps 20
"""

import argparse
import itertools
import random
import statistics
import time

import numpy as np

from slidekit import ExtensionalTable, Model, SlideConstraint, build_chain, kernels, propagate_gac
from slidekit.propagator import _Locals, _gather_tuples, _overlap_keys, tuple_cap


def dense_chain(n, d=5, k=3, density=0.8, seed=0):
    rng = random.Random(seed)
    universe = list(itertools.product(range(d), repeat=k))
    table = ExtensionalTable(rng.sample(universe, round(density * len(universe))), arity=k)
    m = Model()
    xs = [m.new_variable(0, d - 1) for _ in range(n)]
    return m, SlideConstraint(build_chain(xs, k, 1), table)


def median_ms(fn, reps):
    fn()  # warm-up, includes jit compilation
    times = []
    for _ in range(reps):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return 1000 * statistics.median(times)


def kernel_inputs(m, c):
    loc = _Locals(c, m)
    tuples, starts = _gather_tuples(c, loc, tuple_cap())
    lkey, rkey, nkeys = _overlap_keys(c, tuples, starts, loc)
    lw = loc.index[c._windows]
    first = np.zeros(lw.size, dtype=np.bool_)
    first[np.unique(lw.ravel(), return_index=True)[1]] = True
    span = loc.hi - loc.lo + 1
    return tuples, starts, lkey, rkey, nkeys, lw, first.reshape(lw.shape), loc.lo, span, len(loc.vars)


def propagate_once(m, c):
    m.push_level()
    propagate_gac(c, m)
    m.pop_level()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1000, 4000, 16000])
    ap.add_argument("--reps", type=int, default=20)
    args = ap.parse_args()

    names = ["numpy", "numba"] if kernels.HAVE_NUMBA else ["numpy"]
    if not kernels.HAVE_NUMBA:
        print("numba not installed; timing the numpy backend only")
    print(f"{'n':>7} {'backend':>7} {'sweep ms':>9} {'support ms':>10} {'propagate ms':>12}")
    for n in args.sizes:
        m, c = dense_chain(n)
        tuples, starts, lkey, rkey, nkeys, lw, first, lo, span, nloc = kernel_inputs(m, c)
        ref = None
        for name in names:
            with kernels.backend(name):
                fwd, bwd = kernels.sweep(starts, lkey, rkey, nkeys)
                alive = fwd & bwd
                out = (fwd, bwd, kernels.supported_values(tuples, starts, alive, lw, first, lo, span, nloc))
                if ref is None:
                    ref = out
                assert all(np.array_equal(a, b) for a, b in zip(ref, out)), "backends disagree"
                sweep = median_ms(lambda: kernels.sweep(starts, lkey, rkey, nkeys), args.reps)
                support = median_ms(
                    lambda: kernels.supported_values(tuples, starts, alive, lw, first, lo, span, nloc), args.reps
                )
                full = median_ms(lambda: propagate_once(m, c), args.reps)
            print(f"{n:>7} {name:>7} {sweep:>9.2f} {support:>10.2f} {full:>12.2f}")


if __name__ == "__main__":
    main()

"""Time the compiled hidden layer against the numpy fallback.

    python benchmarks/bench_backends.py [--n 2000] [--k 256] [--repeat 20]
"""
import argparse
import timeit

import numpy as np

from stationet import ActivationKind, HmcConfig, TaskSpec, WeightPrior, banana, bnn_init
from stationet import _fallback
from stationet.bnn import _free, _potential, Hyperpriors

try:
    from stationet import _core
except ImportError:
    _core = None


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_layer(n, k, d, repeat):
    rng = np.random.default_rng(0)
    X = rng.normal(size=(n, d))
    W = rng.standard_t(3, size=(k, d))
    b = rng.uniform(-np.pi, np.pi, k)
    print(f"hidden_layer  n={n} K={k} d={d}  (best of {repeat}, ms)")
    print(f"{'activation':<10} {'grad':<5} {'python':>9} {'cython':>9} {'speedup':>8}")
    for kind in ActivationKind:
        for with_grad in (False, True):
            code = kind.code
            t_py = best(lambda: _fallback.hidden_layer(code, X, W, b, 1.0, with_grad), repeat)
            if _core is None:
                print(f"{kind.value:<10} {str(with_grad):<5} {1e3 * t_py:9.3f} {'n/a':>9}")
                continue
            t_c = best(lambda: _core.hidden_layer(code, X, W, b, 1.0, with_grad), repeat)
            print(f"{kind.value:<10} {str(with_grad):<5} {1e3 * t_py:9.3f} {1e3 * t_c:9.3f} "
                  f"{t_py / t_c:7.2f}x")


def bench_potential(repeat):
    # one HMC gradient evaluation on the banana task, K=30
    X, y = banana(100, 0.1, seed=0)
    task = TaskSpec.classification(X, y)
    prior = WeightPrior("student_t", dof=3.0)
    p = bnn_init(0, 2, 30, 2, "sin", prior)
    theta = _free(p, task)
    pot = _potential(p, task, "sin", prior, Hyperpriors())
    t = best(lambda: pot(theta), repeat * 10)
    print(f"\nbanana potential+gradient (sin, K=30, n=200): {1e6 * t:.1f} us per call; "
          f"one 32-step leapfrog trajectory ~ {32e3 * t:.2f} ms")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--k", type=int, default=256)
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    import stationet
    print(f"active backend: {stationet.backend}\n")
    bench_layer(args.n, args.k, args.d, args.repeat)
    bench_potential(args.repeat)


if __name__ == "__main__":
    main()

"""Compare the compiled hot loops against their pure Python / numpy versions.

    python3 benchmarks/bench_kernels.py

The pure versions are what runs under GPHELIX_NO_NUMBA=1.
"""

import time

import numpy as np

from gphelix import _kernels as K


def best_of(fn, repeat=5):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_profile():
    nodes = np.linspace(0.1, 8.0, 400)
    p0, q0 = 0.0578, 0.5668

    def run(impl):
        out_p = np.empty_like(nodes)
        out_q = np.empty_like(nodes)
        return impl(nodes, p0, q0, 1e-12, 1e-14, out_p, out_q)

    fast = K.dopri_profile
    slow = getattr(K.dopri_profile, "py_func", K.dopri_profile)
    run(fast)  # compile
    return best_of(lambda: run(fast), 5), best_of(lambda: run(slow), 2)


def bench_pairs(n=7, M=256):
    rng = np.random.default_rng(0)
    f = rng.standard_normal((n, M)) + 1j * rng.standard_normal((n, M))
    deg = np.ones(n)
    K.pair_interaction(f, deg)
    a = K.pair_interaction(f, deg)
    b = K.pair_interaction_numpy(f, deg)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)
    return best_of(lambda: K.pair_interaction(f, deg), 20), best_of(lambda: K.pair_interaction_numpy(f, deg), 20)


def main():
    print(f"numba active: {K.HAVE_NUMBA}")
    fast, slow = bench_profile()
    print(f"profile integration   compiled {fast * 1e3:8.2f} ms   python {slow * 1e3:8.2f} ms   speedup {slow / fast:6.1f}x")
    fast, slow = bench_pairs()
    print(f"filament interaction  compiled {fast * 1e6:8.1f} us   numpy  {slow * 1e6:8.1f} us   speedup {slow / fast:6.1f}x")


if __name__ == "__main__":
    main()

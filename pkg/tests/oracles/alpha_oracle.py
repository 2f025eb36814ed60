"""Independent estimate of the vortex slope at the origin.

Fixed-step classical RK4 shooting, vectorised over a fan of candidate
slopes that is narrowed until it collapses, repeated for three step sizes
and Richardson-extrapolated in h^4.  Shares no code with the package.

Run:  python tests/oracles/alpha_oracle.py
"""

import numpy as np


def rhs(r, p, q):
    return q, -q / r + p / r**2 - (1.0 - p * p) * p


def series(a, r):
    # odd Frobenius coefficients from sum a_k (k^2-1) r^(k-2) = rho^3 - rho
    a1 = a
    a3 = -a1 / 8.0
    a5 = (a1**3 - a3) / 24.0
    a7 = (3 * a1**2 * a3 - a5) / 48.0
    a9 = (3 * a1**2 * a5 + 3 * a1 * a3**2 - a7) / 80.0
    cs = [(1, a1), (3, a3), (5, a5), (7, a7), (9, a9)]
    p = sum(c * r**k for k, c in cs)
    q = sum(k * c * r ** (k - 1) for k, c in cs)
    return p, q


def classify(alphas, h, r0=0.1, r_end=30.0):
    p, q = series(alphas, r0)
    side = np.zeros(alphas.size, dtype=int)
    r = r0
    nsteps = int(round((r_end - r0) / h))
    for _ in range(nsteps):
        k1p, k1q = rhs(r, p, q)
        k2p, k2q = rhs(r + h / 2, p + h / 2 * k1p, q + h / 2 * k1q)
        k3p, k3q = rhs(r + h / 2, p + h / 2 * k2p, q + h / 2 * k2q)
        k4p, k4q = rhs(r + h, p + h * k3p, q + h * k3q)
        p = p + h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        q = q + h / 6 * (k1q + 2 * k2q + 2 * k3q + k4q)
        r += h
        side = np.where((side == 0) & (p >= 1.0), 1, side)
        side = np.where((side == 0) & (q < 0.0), -1, side)
        # freeze decided trajectories to keep the arithmetic finite
        p = np.where(side != 0, 0.5, p)
        q = np.where(side != 0, 0.1, q)
        if np.all(side != 0):
            break
    return side


def shoot(h, lo=0.55, hi=0.62, fan=33):
    for _ in range(12):
        alphas = np.linspace(lo, hi, fan)
        side = classify(alphas, h)
        below = np.where(side < 0)[0]
        above = np.where(side > 0)[0]
        lo_new = alphas[below.max()]
        hi_new = alphas[above.min()]
        if hi_new - lo_new >= hi - lo or hi_new - lo_new < 1e-15:
            lo, hi = lo_new, hi_new
            break
        lo, hi = lo_new, hi_new
    return 0.5 * (lo + hi)


if __name__ == "__main__":
    hs = [0.02, 0.01, 0.005, 0.0025]
    vals = [shoot(h) for h in hs]
    for h, a in zip(hs, vals):
        print(f"h={h:<6} alpha={a:.15f}")
    for k in range(1, len(hs)):
        extrap = vals[k] + (vals[k] - vals[k - 1]) / 15.0
        print(f"Richardson ({hs[k - 1]}, {hs[k]}): {extrap:.15f}")

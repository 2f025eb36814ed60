"""Hot loops: adaptive profile integration and filament interaction sums.

Set GPHELIX_NO_NUMBA=1 to run the same loops as plain Python (and the
interaction sum through a vectorised numpy path) instead of numba.
"""

import os

import numpy as np

NUMBA_DISABLED = os.environ.get("GPHELIX_NO_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    if NUMBA_DISABLED:
        raise ImportError("numba disabled by GPHELIX_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            fn = args[0]
            fn.py_func = fn
            return fn

        def wrap(fn):
            fn.py_func = fn
            return fn

        return wrap


# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)


@njit(cache=True)
def profile_rhs(r, p, q):
    """Right-hand side of the first-order form of the vortex profile ODE."""
    return q, -q / r + p / (r * r) - (1.0 - p * p) * p


@njit(cache=True)
def dopri_profile(r_nodes, p0, q0, rtol, atol, out_p, out_q):
    """Integrate the profile ODE through the given nodes.

    Starts from (p0, q0) at r_nodes[0] and stores the state at every node.
    Stops early when the trajectory leaves the admissible band.

    Returns (status, last_index): status 0 reached the end, 1 rose above 1,
    2 started to decrease (q < 0).
    """
    n = r_nodes.shape[0]
    out_p[0] = p0
    out_q[0] = q0
    p = p0
    q = q0
    r = r_nodes[0]
    h = 1e-3 * max(r, 1e-4)
    for i in range(1, n):
        r_end = r_nodes[i]
        while r < r_end:
            if r + h > r_end:
                h = r_end - r
            k1p, k1q = profile_rhs(r, p, q)
            k2p, k2q = profile_rhs(r + _C2 * h, p + h * _A21 * k1p, q + h * _A21 * k1q)
            k3p, k3q = profile_rhs(
                r + _C3 * h, p + h * (_A31 * k1p + _A32 * k2p), q + h * (_A31 * k1q + _A32 * k2q)
            )
            k4p, k4q = profile_rhs(
                r + _C4 * h,
                p + h * (_A41 * k1p + _A42 * k2p + _A43 * k3p),
                q + h * (_A41 * k1q + _A42 * k2q + _A43 * k3q),
            )
            k5p, k5q = profile_rhs(
                r + _C5 * h,
                p + h * (_A51 * k1p + _A52 * k2p + _A53 * k3p + _A54 * k4p),
                q + h * (_A51 * k1q + _A52 * k2q + _A53 * k3q + _A54 * k4q),
            )
            k6p, k6q = profile_rhs(
                r + h,
                p + h * (_A61 * k1p + _A62 * k2p + _A63 * k3p + _A64 * k4p + _A65 * k5p),
                q + h * (_A61 * k1q + _A62 * k2q + _A63 * k3q + _A64 * k4q + _A65 * k5q),
            )
            pn = p + h * (_B1 * k1p + _B3 * k3p + _B4 * k4p + _B5 * k5p + _B6 * k6p)
            qn = q + h * (_B1 * k1q + _B3 * k3q + _B4 * k4q + _B5 * k5q + _B6 * k6q)
            k7p, k7q = profile_rhs(r + h, pn, qn)
            ep = h * (_E1 * k1p + _E3 * k3p + _E4 * k4p + _E5 * k5p + _E6 * k6p + _E7 * k7p)
            eq = h * (_E1 * k1q + _E3 * k3q + _E4 * k4q + _E5 * k5q + _E6 * k6q + _E7 * k7q)
            sp = atol + rtol * max(abs(p), abs(pn))
            sq = atol + rtol * max(abs(q), abs(qn))
            err = np.sqrt(0.5 * ((ep / sp) ** 2 + (eq / sq) ** 2))
            if err <= 1.0:
                r = r + h
                p = pn
                q = qn
                if err < 1e-10:
                    fac = 5.0
                else:
                    fac = min(5.0, max(0.2, 0.9 * err ** (-0.2)))
                h = h * fac
            else:
                h = h * max(0.1, 0.9 * err ** (-0.2))
        r = r_end
        out_p[i] = p
        out_q[i] = q
        if p >= 1.0:
            return 1, i
        if q < 0.0:
            return 2, i
    return 0, n - 1


@njit(cache=True)
def _pair_sum_loops(re, im, degrees, out_re, out_im):
    n, m = re.shape
    for k in range(n):
        for s in range(m):
            ar = 0.0
            ai = 0.0
            for j in range(n):
                if j == k:
                    continue
                dx = re[k, s] - re[j, s]
                dy = im[k, s] - im[j, s]
                w = degrees[j] * degrees[k] / (dx * dx + dy * dy)
                ar += w * dx
                ai += w * dy
            out_re[k, s] = ar
            out_im[k, s] = ai


def _pair_sum_numpy(f, degrees):
    diff = f[:, None, :] - f[None, :, :]
    dist2 = np.abs(diff) ** 2
    n = f.shape[0]
    dist2[np.arange(n), np.arange(n), :] = np.inf
    weight = (degrees[:, None] * degrees[None, :])[:, :, None] / dist2
    return np.sum(weight * diff, axis=1)


def pair_interaction(f, degrees):
    """Sum_{j != k} d_j d_k (f_k - f_j) / |f_k - f_j|^2 for every filament k.

    ``f`` has shape (n, M) complex, ``degrees`` shape (n,).
    """
    f = np.asarray(f, dtype=complex)
    degrees = np.asarray(degrees, dtype=float)
    if not HAVE_NUMBA:
        return _pair_sum_numpy(f, degrees)
    re = np.ascontiguousarray(f.real)
    im = np.ascontiguousarray(f.imag)
    out_re = np.empty_like(re)
    out_im = np.empty_like(im)
    _pair_sum_loops(re, im, degrees, out_re, out_im)
    return out_re + 1j * out_im


def pair_interaction_numpy(f, degrees):
    return _pair_sum_numpy(np.asarray(f, dtype=complex), np.asarray(degrees, dtype=float))

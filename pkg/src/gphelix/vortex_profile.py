"""Radial profile of the degree-one Ginzburg-Landau vortex.

The profile rho solves

    rho'' + rho'/r - rho/r^2 + (1 - rho^2) rho = 0,   rho(0) = 0,  rho(inf) = 1,

and w(z) = rho(|z|) exp(i arg z) is the standard vortex.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.interpolate import BPoly

from ._kernels import dopri_profile

R_MIN = 1e-6
# below this radius the odd series is more accurate than the interpolant
R_SERIES = 1e-2
TOL_MATCH = 1e-6


class ProfileSolveError(RuntimeError):
    def __init__(self, message: str, bracket=None):
        super().__init__(message if bracket is None else f"{message} (last bracket {bracket})")
        self.bracket = bracket


def series_coefficient5(alpha: float) -> float:
    return (alpha / 8.0 + alpha**3) / 24.0


def near_origin(alpha: float, r):
    """Three-term odd expansion of rho and its first two derivatives."""
    r = np.asarray(r, dtype=float)
    a5 = series_coefficient5(alpha)
    rho = alpha * r - alpha * r**3 / 8.0 + a5 * r**5
    drho = alpha - 3.0 * alpha * r**2 / 8.0 + 5.0 * a5 * r**4
    d2rho = -6.0 * alpha * r / 8.0 + 20.0 * a5 * r**3
    return rho, drho, d2rho


def far_tail(r):
    """Two-term far-field law used beyond the matching radius."""
    r = np.asarray(r, dtype=float)
    return 1.0 - 0.5 / r**2, 1.0 / r**3, -3.0 / r**4


def far_tail_target(r: float) -> float:
    # one more term of the large-r expansion; used only as the shooting target
    return 1.0 - 0.5 / r**2 - 9.0 / (8.0 * r**4)


def ode_residual(r, rho, drho, d2rho):
    r = np.asarray(r, dtype=float)
    return d2rho + drho / r - rho / r**2 + (1.0 - rho**2) * rho


@dataclass(frozen=True)
class RadialProfile:
    grid: np.ndarray
    rho: np.ndarray
    rho_prime: np.ndarray
    alpha: float
    R_cut: float
    tol: float = 1e-10
    residual: float = float("nan")
    _poly: BPoly = field(default=None, repr=False, compare=False)
    _dpoly: BPoly = field(default=None, repr=False, compare=False)
    _d2poly: BPoly = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        rho = np.asarray(self.rho, dtype=float)
        drho = np.asarray(self.rho_prime, dtype=float)
        if grid.ndim != 1 or grid.shape != rho.shape or grid.shape != drho.shape:
            raise ValueError("grid, rho and rho_prime must be 1-D arrays of equal length")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        for arr in (grid, rho, drho):
            arr.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "rho_prime", drho)
        # quintic Hermite interpolant: values, slopes and ODE curvature at nodes
        d2 = -drho / grid + rho / grid**2 - (1.0 - rho**2) * rho
        poly = BPoly.from_derivatives(grid, np.column_stack([rho, drho, d2]))
        object.__setattr__(self, "_poly", poly)
        object.__setattr__(self, "_dpoly", poly.derivative())
        object.__setattr__(self, "_d2poly", poly.derivative(2))

    @property
    def r_min(self) -> float:
        return float(self.grid[0])

    def __call__(self, r):
        return eval_rho(self, r)


def _uniform_grid(R_cut: float, r_min: float, h: float) -> np.ndarray:
    r_geo = 0.05
    n_geo = int(np.ceil(np.log(r_geo / r_min) / np.log(1.12)))
    inner = np.geomspace(r_min, r_geo, n_geo + 1)
    n_uni = int(np.ceil((R_cut - r_geo) / h))
    outer = np.linspace(r_geo, R_cut, n_uni + 1)
    return np.concatenate([inner, outer[1:]])


def _bisect_stage(nodes, make_state, lo, hi, rtol, atol, probe=None, max_iter=200):
    """Bisection on a scalar shooting parameter.

    Without ``probe`` the trajectory is judged against the far-field target
    at nodes[-1].  With ``probe`` (a longer, coarse node set) it is judged
    only by whether it eventually rises above 1 or turns down, which does
    not bias the kept segment towards an approximate tail.
    """
    test_nodes = nodes if probe is None else probe
    out_p = np.empty(test_nodes.size)
    out_q = np.empty(test_nodes.size)
    target = far_tail_target(nodes[-1])

    def side(param):
        p0, q0 = make_state(param)
        status, last = dopri_profile(test_nodes, p0, q0, rtol, atol, out_p, out_q)
        if status == 1:
            return 1
        if status == 2:
            return -1
        if probe is not None:
            return 0
        return 1 if out_p[-1] > target else -1

    s_lo, s_hi = side(lo), side(hi)
    widen = 0
    while s_lo * s_hi >= 0 and widen < 20:
        span = hi - lo
        if s_lo > 0 or s_hi > 0:
            lo = lo - span
            s_lo = side(lo)
        else:
            hi = hi + span
            s_hi = side(hi)
        widen += 1
    if s_lo * s_hi >= 0:
        raise ProfileSolveError("shooting bracket does not straddle the far-field target", (lo, hi))
    if s_lo > 0:
        lo, hi = hi, lo
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        s_mid = side(mid)
        if s_mid == 0:
            lo = mid
            break
        if s_mid > 0:
            hi = mid
        else:
            lo = mid
    p0, q0 = make_state(lo)
    keep_p = np.empty(nodes.size)
    keep_q = np.empty(nodes.size)
    status, last = dopri_profile(nodes, p0, q0, rtol, atol, keep_p, keep_q)
    if status != 0:
        raise ProfileSolveError("kept segment left the admissible band", (lo, hi))
    return lo, keep_p, keep_q


def solve_profile(
    R_cut: float = 40.0,
    tol: float = 1e-10,
    r_min: float = R_MIN,
    h: float = 0.01,
    stage: float = 4.0,
    window: float = 12.0,
    lookahead: float = 40.0,
) -> RadialProfile:
    """Shoot from the origin series and match the far-field law at R_cut.

    The unstable direction grows like exp(sqrt(2) r), so a single shot
    cannot reach R_cut in double precision.  The solve is split into
    stages: the first bisects on the slope alpha at the origin, later
    ones keep rho fixed at the stage start and bisect on rho'.  A stage is
    judged by integrating far ahead until the trajectory either overshoots
    1 or turns down; only its first ``stage`` units are kept.  The last
    stage, once R_cut is within ``window``, is matched to the far-field law.
    """
    if not np.isfinite(R_cut) or R_cut < 20:
        raise ValueError(f"R_cut must be >= 20, got {R_cut}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    rtol = atol = 1e-14
    grid = _uniform_grid(R_cut, r_min, h)
    n = grid.size
    rho = np.empty(n)
    drho = np.empty(n)

    def origin_state(alpha):
        p, q, _ = near_origin(alpha, r_min)
        return float(p), float(q)

    i0 = 0
    alpha = None
    lo, hi = 0.55, 0.62
    while True:
        r0 = grid[i0]
        last = r0 + window >= R_cut
        if i0 == 0:
            make_state = origin_state
        else:
            p_start = rho[i0]
            make_state = lambda q, p_start=p_start: (p_start, q)
        if last:
            keep = n - 1
            probe = None
        else:
            keep = min(int(np.searchsorted(grid, r0 + stage)), n - 1)
            probe = np.concatenate([grid[i0 : keep + 1], np.arange(grid[keep] + 0.5, r0 + lookahead, 0.5)])
        param, out_p, out_q = _bisect_stage(grid[i0 : keep + 1], make_state, lo, hi, rtol, atol, probe)
        if i0 == 0:
            alpha = param
        rho[i0 : keep + 1] = out_p
        drho[i0 : keep + 1] = out_q
        if last:
            break
        i0 = keep
        q0 = drho[i0]
        lo, hi = 0.8 * q0, 1.2 * q0

    if not (np.all(rho > 0) and np.all(rho < 1) and np.all(drho > 0)):
        raise ProfileSolveError("solved profile is not monotone in (0, 1)")
    prof = RadialProfile(grid, rho, drho, float(alpha), float(R_cut), float(tol))
    res = profile_residual(prof)
    object.__setattr__(prof, "residual", res)
    if abs(rho[-1] - (1.0 - 0.5 / R_cut**2)) > TOL_MATCH:
        raise ProfileSolveError("far-field matching failed", (rho[-1], 1.0 - 0.5 / R_cut**2))
    return prof


def residual_at(p: RadialProfile, r):
    """ODE residual of the evaluated profile at radii r > 0.

    Inside the series region the linear part is summed term by term, which
    avoids the cancellation between rho'/r and rho/r^2.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    f, df, d2f = eval_rho(p, r)
    out = np.empty_like(r)
    small = r < max(R_SERIES, p.grid[0])
    big = ~small
    out[big] = ode_residual(r[big], f[big], df[big], d2f[big])
    rs = r[small]
    a = p.alpha
    a5 = series_coefficient5(a)
    # sum over k of a_k (k^2 - 1) r^(k-2) for the odd series
    lin = -a * rs + 24.0 * a5 * rs**3
    out[small] = lin + (1.0 - f[small] ** 2) * f[small]
    return out


def profile_residual(p: RadialProfile, samples_per_cell: int = 1) -> float:
    """Max ODE residual at points strictly between table nodes."""
    g = p.grid
    ts = (np.arange(samples_per_cell) + 0.5) / samples_per_cell
    r = (g[:-1, None] + ts[None, :] * np.diff(g)[:, None]).ravel()
    return float(np.max(np.abs(residual_at(p, r))))


def tangential_defect(p: RadialProfile, r):
    """T(r) = rho'(r) - rho(r)/r, summed from the series near the origin."""
    scalar = np.ndim(r) == 0
    r = np.atleast_1d(np.asarray(r, dtype=float))
    f, df, _ = eval_rho(p, r)
    out = np.empty_like(r)
    small = r < max(R_SERIES, p.grid[0])
    out[~small] = df[~small] - f[~small] / r[~small]
    rs = r[small]
    out[small] = -p.alpha * rs**2 / 4.0 + 4.0 * series_coefficient5(p.alpha) * rs**4
    return float(out[0]) if scalar else out


def eval_rho(p: RadialProfile, r):
    """(rho, rho', rho'') at radii r >= 0; scalar in, scalars out."""
    scalar = np.ndim(r) == 0
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < 0):
        raise ValueError("radius must be non-negative")
    f = np.empty_like(r)
    df = np.empty_like(r)
    d2f = np.empty_like(r)
    small = r < max(R_SERIES, p.grid[0])
    far = r > p.R_cut
    mid = ~(small | far)
    if np.any(small):
        f[small], df[small], d2f[small] = near_origin(p.alpha, r[small])
    if np.any(far):
        f[far], df[far], d2f[far] = far_tail(r[far])
    if np.any(mid):
        rm = r[mid]
        f[mid] = p._poly(rm)
        df[mid] = p._dpoly(rm)
        d2f[mid] = p._d2poly(rm)
    if scalar:
        return float(f[0]), float(df[0]), float(d2f[0])
    return f, df, d2f


def _polar_parts(p: RadialProfile, z):
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    f, df, d2f = eval_rho(p, r)
    f, df, d2f = np.asarray(f), np.asarray(df), np.asarray(d2f)
    safe = np.where(r > 0, r, 1.0)
    phase = np.where(r > 0, z / safe, 1.0)
    cos, sin = phase.real, phase.imag
    # rho/r, finite at the origin
    rho_over_r = np.where(r > 0, f / safe, p.alpha)
    return r, f, df, d2f, phase, cos, sin, rho_over_r


def eval_w(p: RadialProfile, z):
    """Standard vortex and its Cartesian first derivatives at complex z."""
    r, f, df, _, phase, cos, sin, ror = _polar_parts(p, z)
    w = f * phase
    w_x1 = phase * (df * cos - 1j * ror * sin)
    w_x2 = phase * (df * sin + 1j * ror * cos)
    return w, w_x1, w_x2


def eval_w_second(p: RadialProfile, z):
    """Second derivatives (w_x1x1, w_x1x2, w_x2x2) away from the origin."""
    r, f, df, d2f, phase, cos, sin, ror = _polar_parts(p, z)
    safe = np.where(r > 0, r, 1.0)
    # rho'/r - rho/r^2 vanishes like r at the origin
    g = np.where(r > 0, (df - ror) / safe, 0.0)
    c2, s2, sc = cos * cos, sin * sin, sin * cos
    w11 = phase * (d2f * c2 + g * s2 - 2j * sc * g)
    w12 = phase * ((d2f - g) * sc + 1j * (c2 - s2) * g)
    w22 = phase * (d2f * s2 + g * c2 + 2j * sc * g)
    return w11, w12, w22


def winding_number(p: RadialProfile, radius: float = 5.0, n: int = 512) -> int:
    theta = np.linspace(0.0, 2 * np.pi, n + 1)
    w, _, _ = eval_w(p, radius * np.exp(1j * theta))
    dphase = np.angle(w[1:] / w[:-1])
    return int(round(dphase.sum() / (2 * np.pi)))


def tail_law_table(p: RadialProfile, radii=(10.0, 20.0, 40.0)):
    """r^4 |rho - 1 + 1/(2 r^2)| at the requested radii."""
    radii = np.asarray(radii, dtype=float)
    f, _, _ = eval_rho(p, radii)
    return radii, radii**4 * np.abs(f - 1.0 + 0.5 / radii**2)


@lru_cache(maxsize=4)
def default_profile(R_cut: float = 40.0, tol: float = 1e-10) -> RadialProfile:
    return solve_profile(R_cut=R_cut, tol=tol)


def save_profile(p: RadialProfile, path) -> tuple[Path, Path]:
    """Write the table as CSV and a JSON side header next to it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["r", "rho", "rho_prime"])
        for row in zip(p.grid, p.rho, p.rho_prime):
            wr.writerow([repr(float(x)) for x in row])
    header = path.with_suffix(".json")
    header.write_text(
        json.dumps(
            {"schema_version": 1, "alpha": p.alpha, "R_cut": p.R_cut, "tol": p.tol, "residual": p.residual},
            indent=2,
        )
    )
    return path, header


def load_profile(path) -> RadialProfile:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    return RadialProfile(
        data[:, 0],
        data[:, 1],
        data[:, 2],
        float(meta["alpha"]),
        float(meta["R_cut"]),
        float(meta.get("tol", 1e-10)),
        float(meta.get("residual", float("nan"))),
    )

"""Closed-form error of the ansatz, even/odd splits and sampled weighted norms.

The error E = S(V_d) is split as E_a + E_b + E_c (Ginzburg-Landau part,
eps^2 angular part, speed part) and written E = i V_d R.  All closed forms
are evaluated as ratios E/V_d, which stay finite-valued away from the
vortex centres and avoid dividing by a vanishing V_d.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .ansatz import VortexConfiguration, cutoffs, eta1, eval_Vd, vortex_terms
from .vortex_profile import RadialProfile

PARTS = ("a", "b", "c")


def _one_minus_prod_minus_sum(a):
    """1 - prod(1 - a_j) - sum(a_j) without cancellation (leading axis j)."""
    q = np.zeros_like(a[0])
    u = np.zeros_like(a[0])
    for aj in a:
        q = q - aj * u
        u = u + aj * (1.0 - u)
    return q


def error_ratio(cfg: VortexConfiguration, prof: RadialProfile, z, part: str = "total"):
    """E_part / V_d at points z away from the vortex centres."""
    t = vortex_terms(cfg, prof, z)
    lr = t.drho / t.rho
    if part == "total":
        return sum(_ratio(cfg, t, lr, p) for p in PARTS)
    if part not in PARTS:
        raise ValueError(f"unknown error component {part!r}")
    return _ratio(cfg, t, lr, part)


def _angular_logderiv(t, lr):
    # d_s V / V - i n
    return (t.b * lr + 1j * t.deg * t.a / t.r).sum(axis=0)


def _ratio(cfg, t, lr, part):
    L = cfg.log_eps
    e2 = cfg.eps**2
    if part == "a":
        out = _one_minus_prod_minus_sum(1.0 - t.rho**2)
        N = t.r.shape[0]
        for i in range(N):
            for j in range(i + 1, N):
                cij = t.cos[i] * t.cos[j] + t.sin[i] * t.sin[j]
                sij = t.sin[i] * t.cos[j] - t.cos[i] * t.sin[j]
                re = (lr[i] * lr[j] - t.deg[i] * t.deg[j] / (t.r[i] * t.r[j])) * cij
                im = (t.deg[j] * lr[i] / t.r[j] - t.deg[i] * lr[j] / t.r[i]) * sij
                out = out + 2.0 * (re + 1j * im)
        return out
    M = _angular_logderiv(t, lr)
    if part == "c":
        return 1j * cfg.c * L * e2 * M
    # part b: eps^2 (M^2 + sum_j D_j)
    a, b, r = t.a, t.b, t.r
    D = (a + a * a / r) * lr + b * b * (t.d2rho / t.rho - lr * lr) + 1j * t.deg * (-b / r - 2.0 * a * b / (r * r))
    return e2 * (M * M + D.sum(axis=0))


def closed_form_Ea(cfg, prof, z):
    return eval_Vd(cfg, prof, z) * error_ratio(cfg, prof, z, "a")


def closed_form_Eb(cfg, prof, z):
    return eval_Vd(cfg, prof, z) * error_ratio(cfg, prof, z, "b")


def closed_form_Ec(cfg, prof, z):
    return eval_Vd(cfg, prof, z) * error_ratio(cfg, prof, z, "c")


def closed_form_E(cfg, prof, z):
    return eval_Vd(cfg, prof, z) * error_ratio(cfg, prof, z, "total")


def error_R(cfg: VortexConfiguration, prof: RadialProfile, part: str = "total") -> Callable:
    """Sampler of R with E = i V_d R for the chosen component."""

    def R(z):
        return -1j * error_ratio(cfg, prof, z, part)

    return R


@dataclass
class ErrorField:
    component: str
    points: np.ndarray
    R: np.ndarray

    @property
    def R1(self):
        return self.R.real

    @property
    def R2(self):
        return self.R.imag


def error_field(cfg, prof, z, component: str = "total") -> ErrorField:
    z = np.asarray(z, dtype=complex)
    return ErrorField(component, z, error_R(cfg, prof, component)(z))


# ------------------------------------------------------------ even / odd


def reflect(cfg: VortexConfiguration, j: int, z):
    """Mirror image across the vertical line through vortex j."""
    z = np.asarray(z, dtype=complex)
    return 2.0 * cfg.positions[j].real - z.real + 1j * z.imag


def odd_part_j(h: Callable, cfg: VortexConfiguration, j: int) -> Callable:
    def hoj(z):
        return 0.5 * (h(z) + np.conj(h(reflect(cfg, j, z))))

    return hoj


def odd_even_split(h: Callable, cfg: VortexConfiguration, R: float | None = None):
    """(h^o, h^e): cut-off weighted sum of per-vortex odd parts, and the rest."""
    R = cfg.R_eps if R is None else R
    parts = [odd_part_j(h, cfg, j) for j in range(cfg.n_vortices)]

    def h_odd(z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for j, hoj in enumerate(parts):
            wt = eta1(np.abs(z - cfg.positions[j]) / R)
            mask = wt > 0
            if np.any(mask):
                out[mask] = out[mask] + wt[mask] * hoj(z[mask])
        return out

    def h_even(z):
        return h(z) - h_odd(z)

    return h_odd, h_even


@dataclass
class FourierModes:
    radii: np.ndarray
    h1: np.ndarray
    h2: np.ndarray

    def evaluate(self, r_index: int, theta, parity: str = "all"):
        theta = np.asarray(theta, dtype=float)
        ks = np.arange(self.h1.shape[1])
        sel = np.ones(ks.size, bool)
        if parity == "odd":
            sel = ks % 2 == 1
        elif parity == "even":
            sel = ks % 2 == 0
        kt = np.outer(theta, ks[sel])
        return np.sin(kt) @ self.h1[r_index, sel] + 1j * (np.cos(kt) @ self.h2[r_index, sel])


def fourier_decompose(
    h: Callable,
    cfg: VortexConfiguration,
    j: int,
    radii,
    K_max: int = 32,
    n_theta: int = 256,
    sym_tol: float = 1e-8,
) -> FourierModes:
    """Modes h = sum_k h1^k sin(k theta_j) + i h2^k cos(k theta_j) on rings about xi_j."""
    radii = np.asarray(radii, dtype=float)
    if n_theta < 2 * K_max + 2:
        raise ValueError("need at least 2 K_max + 2 angular samples")
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    z = cfg.positions[j] + radii[:, None] * np.exp(1j * theta[None, :])
    vals = h(z)
    zc = cfg.positions[j] + radii[:, None] * np.exp(-1j * theta[None, :])
    scale = max(1.0, float(np.max(np.abs(vals))))
    if np.max(np.abs(h(zc) + np.conj(vals))) > sym_tol * scale:
        raise ValueError("input lacks the symmetry h(conj z~) = -conj h(z~) about this vortex")
    fr = np.fft.rfft(vals.real, axis=1) / n_theta
    fi = np.fft.rfft(vals.imag, axis=1) / n_theta
    h1 = np.zeros((radii.size, K_max + 1))
    h2 = np.zeros((radii.size, K_max + 1))
    h1[:, 1:] = -2.0 * fr[:, 1 : K_max + 1].imag
    h2[:, 0] = fi[:, 0].real
    h2[:, 1:] = 2.0 * fi[:, 1 : K_max + 1].real
    return FourierModes(radii, h1, h2)


# ----------------------------------------------------------------- norms


@dataclass
class NormReport:
    norm: str
    value: float
    breakdown: dict
    params: dict = field(default_factory=dict)

    def to_json(self, path=None) -> str:
        payload = {"schema_version": 1, **asdict(self)}
        text = json.dumps(payload, indent=2, default=float)
        if path is not None:
            Path(path).write_text(text)
        return text


def _halton(n, base):
    out = np.empty(n)
    for i in range(n):
        f, x, k = 1.0, 0.0, i + 1
        while k > 0:
            f /= base
            x += f * (k % base)
            k //= base
        out[i] = x
    return out


def _disc_points(center, radius, n):
    u = _halton(n, 2)
    v = _halton(n, 3)
    return center + radius * np.sqrt(u) * np.exp(2j * np.pi * v)


def _directions(n):
    golden = np.pi * (3.0 - np.sqrt(5.0))
    return np.exp(1j * golden * np.arange(n))


def holder_in_disc(f: Callable, center, radius, alpha, n_pts=96, n_dir=4):
    """Sampled Holder seminorm of f on a disc, pairs at three dyadic separations."""
    x = _disc_points(center, radius, n_pts)
    fx = f(x)
    best = 0.0
    for delta in (radius / 2, radius / 4, radius / 8):
        for d in _directions(n_dir):
            y = x + delta * d
            inside = np.abs(y - center) < radius
            if not np.any(inside):
                continue
            val = np.abs(fx[inside] - f(y[inside])) / delta**alpha
            best = max(best, float(np.max(val)))
    return best


def _nearest(cfg, z):
    dist = np.abs(np.asarray(z)[None, ...] - cfg.positions.reshape((-1,) + (1,) * np.ndim(z)))
    return dist


def far_samples(cfg: VortexConfiguration, r_in=2.0, r_out=None, n_r=40, n_theta=64, global_rings=24):
    """Rings around every vortex plus rings about the origin out to 4/eps."""
    r_out = 2 * cfg.R_eps if r_out is None else r_out
    radii = np.geomspace(r_in * 1.0001, r_out, n_r)
    th = 2 * np.pi * (np.arange(n_theta) + 0.5) / n_theta
    pts = [cfg.positions[j] + radii[:, None] * np.exp(1j * th[None, :]) for j in range(cfg.n_vortices)]
    big = np.geomspace(max(cfg.d_eps * 0.25, 2.0), 4.0 / cfg.eps, global_rings)
    thg = 2 * np.pi * (np.arange(2 * n_theta) + 0.25) / (2 * n_theta)
    pts.append(big[:, None] * np.exp(1j * thg[None, :]))
    z = np.concatenate([p.ravel() for p in pts])
    dist = _nearest(cfg, z)
    keep = np.all(dist > r_in, axis=0) & (np.abs(z) <= 4.0 / cfg.eps)
    return z[keep]


def _core_cnorm(cfg, prof, h, j, radius, alpha):
    def Vh(z):
        return eval_Vd(cfg, prof, z) * h(z)

    xi = cfg.positions[j]
    pts = _disc_points(xi, radius, 256)
    sup = float(np.max(np.abs(Vh(pts))))
    return sup + holder_in_disc(Vh, xi, radius, alpha)


def imag_floor(eps: float, sigma: float, literal: bool = False) -> float:
    """Constant added to the imaginary-part weights: eps^(2-sigma), or eps^(sigma-2) if ``literal``."""
    return eps ** (sigma - 2.0) if literal else eps ** (2.0 - sigma)


def norm_star_star(
    h: Callable,
    cfg: VortexConfiguration,
    prof: RadialProfile,
    alpha=0.5,
    sigma=0.5,
    extra_points=None,
    literal_floor: bool = False,
    **samp,
) -> NormReport:
    """Sampled weighted norm used for right-hand sides (errors)."""
    e = cfg.eps
    core = [_core_cnorm(cfg, prof, h, j, 3.0, alpha) for j in range(cfg.n_vortices)]
    z = far_samples(cfg, **samp)
    if extra_points is not None:
        z = np.concatenate([z, np.ravel(np.asarray(extra_points, dtype=complex))])
    dist = _nearest(cfg, z)
    hz = h(z)
    w_re = 1.0 / ((dist**-2.0).sum(axis=0) + e**2)
    w_im = 1.0 / ((dist ** (-2.0 + sigma)).sum(axis=0) + imag_floor(e, sigma, literal_floor))
    sup_re = float(np.max(np.abs(hz.real) * w_re))
    sup_im = float(np.max(np.abs(hz.imag) * w_im))
    # Holder parts on 2 < r_j < 2 R_eps, ball radius r_j/2 (real) or 1 (imag)
    rj = dist.min(axis=0)
    zin = z[rj < 2 * cfg.R_eps]
    dj = _nearest(cfg, zin)
    rmin = dj.min(axis=0)
    w_hre = 1.0 / (dj ** (-2.0 - alpha)).sum(axis=0)
    w_him = 1.0 / (dj ** (-2.0 + sigma)).sum(axis=0)
    hz0 = h(zin)
    hol_re = np.zeros(zin.size)
    hol_im = np.zeros(zin.size)
    for k in range(3):
        for d in _directions(3):
            dre = 0.5 * rmin * 0.9 / 2**k
            dim = 0.9 / 2**k
            y_re = zin + dre * d
            y_im = zin + dim * d
            hol_re = np.maximum(hol_re, np.abs(hz0.real - h(y_re).real) / dre**alpha)
            hol_im = np.maximum(hol_im, np.abs(hz0.imag - h(y_im).imag) / dim**alpha)
    hre = float(np.max(hol_re * w_hre)) if zin.size else 0.0
    him = float(np.max(hol_im * w_him)) if zin.size else 0.0
    breakdown = {
        "core_holder": float(sum(core)),
        "far_sup_re": sup_re,
        "far_sup_im": sup_im,
        "holder_re": hre,
        "holder_im": him,
    }
    return NormReport(
        "**",
        float(sum(breakdown.values())),
        breakdown,
        {
            "alpha": alpha,
            "sigma": sigma,
            "R_eps": cfg.R_eps,
            "far_truncation": 4.0 / cfg.eps,
            "imag_floor": imag_floor(e, sigma, literal_floor),
            "holder_balls": "radius r_j/2 (real part) and 1 (imaginary part), r_j = distance to nearest vortex",
        },
    )


def _grad_hess(f: Callable, z, step):
    """Central-difference gradient and Hessian of a real sampler."""
    e1, e2 = step, 1j * step
    f0 = f(z)
    fp1, fm1 = f(z + e1), f(z - e1)
    fp2, fm2 = f(z + e2), f(z - e2)
    g = np.stack([(fp1 - fm1) / (2 * step), (fp2 - fm2) / (2 * step)])
    h11 = (fp1 - 2 * f0 + fm1) / step**2
    h22 = (fp2 - 2 * f0 + fm2) / step**2
    h12 = (f(z + e1 + e2) - f(z + e1 - e2) - f(z - e1 + e2) + f(z - e1 - e2)) / (4 * step**2)
    H = np.sqrt(h11**2 + 2 * h12**2 + h22**2)
    return f0, np.hypot(g[0], g[1]), H


def _core_c2norm(cfg, prof, psi, j, radius, alpha, step=1e-3):
    def Vp(z):
        return eval_Vd(cfg, prof, z) * psi(z)

    xi = cfg.positions[j]
    pts = _disc_points(xi, radius, 256)
    tot = 0.0
    for part in (np.real, np.imag):
        f = lambda z, part=part: part(Vp(z))
        f0, g, H = _grad_hess(f, pts, step)
        tot += float(np.max(np.abs(f0)) + np.max(g) + np.max(H))
        hess = lambda z, f=f: _grad_hess(f, z, step)[2]
        tot += holder_in_disc(hess, xi, radius, alpha, n_pts=48, n_dir=2)
    return tot


def norm_star(
    psi: Callable,
    cfg: VortexConfiguration,
    prof: RadialProfile,
    alpha=0.5,
    sigma=0.5,
    step=1e-3,
    extra_points=None,
    literal_floor: bool = False,
) -> NormReport:
    """Sampled solution norm: cores in C^{2,alpha}, weighted far-field parts."""
    e = cfg.eps
    floor = imag_floor(e, sigma, literal_floor)
    core = sum(_core_c2norm(cfg, prof, psi, j, 3.0, alpha, step) for j in range(cfg.n_vortices))
    z = far_samples(cfg)
    if extra_points is not None:
        z = np.concatenate([z, np.ravel(np.asarray(extra_points, dtype=complex))])
    dist = _nearest(cfg, z)
    rmin = dist.min(axis=0)
    p1 = lambda x: np.real(psi(x))
    p2 = lambda x: np.imag(psi(x))
    f1, g1, H1 = _grad_hess(p1, z, step)
    f2, g2, H2 = _grad_hess(p2, z, step)
    inv1 = (dist**-1.0).sum(axis=0)
    inv2 = (dist**-2.0).sum(axis=0)
    invs = (dist ** (-2.0 + sigma)).sum(axis=0)
    near = rmin < 2.0 / e
    inner = rmin < cfg.R_eps
    far = np.abs(z) > 1.0 / e
    # polar partials about the origin for the far region
    zr = z / np.maximum(np.abs(z), 1e-300)
    dr1 = (p1(z + step * zr) - p1(z - step * zr)) / (2 * step)
    ds1 = (p1(z * np.exp(1j * step / np.abs(z))) - p1(z * np.exp(-1j * step / np.abs(z)))) / (2 * step / np.abs(z)) / np.abs(z)
    dr2 = (p2(z + step * zr) - p2(z - step * zr)) / (2 * step)
    ds2 = (p2(z * np.exp(1j * step / np.abs(z))) - p2(z * np.exp(-1j * step / np.abs(z)))) / (2 * step / np.abs(z)) / np.abs(z)

    def smax(x, m=None):
        x = x if m is None else x[m]
        return float(np.max(x)) if x.size else 0.0

    breakdown = {
        "core_c2alpha": core,
        "psi1_sup": cfg.n_vortices * smax(np.abs(f1)),
        "psi1_grad": smax(g1 / inv1, near),
        "psi1_far": smax(np.abs(dr1) / e + np.abs(ds1), far),
        "psi1_hess": smax(H1 / inv2, inner),
        "psi2_sup": smax(np.abs(f2) / (invs + floor)),
        "psi2_grad": smax(g2 / invs, near),
        "psi2_far": smax(np.abs(dr2) / e ** (2.0 - sigma) + np.abs(ds2) / e ** (1.0 - sigma), far),
        "psi2_hess": smax(H2 / invs, inner),
    }
    params = {"alpha": alpha, "sigma": sigma, "R_eps": cfg.R_eps, "step": step, "imag_floor": floor}
    return NormReport("*", float(sum(breakdown.values())), breakdown, params)


def seminorm_sharp(psi: Callable, cfg: VortexConfiguration, prof: RadialProfile, alpha=0.5, sigma=0.5, step=1e-3) -> NormReport:
    """Growth-tolerant seminorm for the odd part of psi."""
    core = sum(_core_c2norm(cfg, prof, psi, j, 3.0, alpha, step) for j in range(cfg.n_vortices)) / cfg.log_eps
    z = far_samples(cfg, r_out=cfg.R_eps)
    dist = _nearest(cfg, z)
    z = z[dist.min(axis=0) < cfg.R_eps]
    dist = _nearest(cfg, z)
    lg = np.log(2 * cfg.R_eps / dist)
    f1, g1, _ = _grad_hess(lambda x: np.real(psi(x)), z, step)
    f2, g2, _ = _grad_hess(lambda x: np.imag(psi(x)), z, step)
    s1 = float(np.max(np.abs(f1) / (dist * lg).sum(axis=0) + g1 / lg.sum(axis=0))) if z.size else 0.0
    w2 = (dist ** (-1.0 + sigma) + lg / dist).sum(axis=0)
    s2 = float(np.max((np.abs(f2) + g2) / w2)) if z.size else 0.0
    breakdown = {"core": core, "sharp1": s1, "sharp2": s2}
    return NormReport("#", core + s1 + s2, breakdown, {"alpha": alpha, "sigma": sigma, "R_eps": cfg.R_eps})


def seminorm_sharpsharp(h: Callable, cfg: VortexConfiguration, prof: RadialProfile, alpha=0.5, sigma=0.5) -> NormReport:
    """Seminorm for slowly decaying odd right-hand sides."""
    core = [_core_cnorm(cfg, prof, h, j, 4.0, alpha) for j in range(cfg.n_vortices)]
    z = far_samples(cfg, r_out=cfg.R_eps)
    dist = _nearest(cfg, z)
    z = z[dist.min(axis=0) < cfg.R_eps]
    dist = _nearest(cfg, z)
    hz = h(z)
    sup = 0.0
    if z.size:
        sup = float(
            np.max(np.abs(hz.real) / (dist**-1.0).sum(axis=0) + np.abs(hz.imag) / (dist ** (-1.0 + sigma)).sum(axis=0))
        )
    breakdown = {"core_holder": float(sum(core)), "far_sup": sup}
    return NormReport("##", float(sum(core)) + sup, breakdown, {"alpha": alpha, "sigma": sigma, "R_eps": cfg.R_eps})


# ------------------------------------------------- slow odd error piece


def build_Rj(cfg: VortexConfiguration, j: int) -> Callable:
    """Explicit slowly decaying odd combination attached to vortex j."""
    if cfg.n_minus != 0:
        raise ValueError("the explicit odd combination is defined for configurations without a central vortex")
    L = cfg.log_eps
    dh = cfg.d_hat
    xi = cfg.positions[: cfg.n_plus]

    def Rj(z):
        z = np.asarray(z, dtype=complex)
        dz = z[None, ...] - xi.reshape((-1,) + (1,) * z.ndim)
        r = np.abs(dz)
        rot = dz * np.conj(xi / np.abs(xi)).reshape((-1,) + (1,) * z.ndim) / r
        c, s = rot.real, rot.imag
        others = np.arange(cfg.n_plus) != j
        t1 = -dh * cfg.eps / np.sqrt(L) * (s / r).sum(axis=0)
        t2 = -2.0 * dh**2 / L * (s * c / r**2)[others].sum(axis=0)
        cr = c / r
        brace = (cr**2)[others].sum(axis=0) + cr.sum(axis=0) * cr[others].sum(axis=0)
        return t1 + t2 + 1j * dh**2 / L * brace

    return Rj


def build_Rhat_o(cfg: VortexConfiguration, prof: RadialProfile):
    """(Rhat^o, Rtilde^o, R^o) samplers for the odd part of the total error."""
    R = error_R(cfg, prof)
    R_odd, _ = odd_even_split(R, cfg)
    pieces = [odd_part_j(build_Rj(cfg, j), cfg, j) for j in range(cfg.n_plus)]

    def Rhat(z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for j, pj in enumerate(pieces):
            wt = eta1(np.abs(z - cfg.positions[j]) / cfg.R_eps)
            m = wt > 0
            if np.any(m):
                out[m] = out[m] + wt[m] * pj(z[m])
        return out

    def Rtilde(z):
        return R_odd(z) - Rhat(z)

    return Rhat, Rtilde, R_odd


def scaling_table(values: dict, exponent_of_log: float = 1.0):
    """Rows (eps, value, value * |log eps|^p) for an eps-scaling study."""
    rows = []
    for e, v in sorted(values.items(), reverse=True):
        rows.append((e, v, v * abs(np.log(e)) ** exponent_of_log))
    return rows

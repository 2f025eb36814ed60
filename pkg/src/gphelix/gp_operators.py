"""Finite-difference operators of the rescaled traveling-wave problem.

Everything here acts on sampled fields (``ComplexField``) and serves as the
oracle side for the closed-form error expressions.  ``s`` is the rotation
angle about the origin, so d_s = x1 d_2 - x2 d_1 on Cartesian grids and
d_s = d_theta on polar ones.  Nodes whose stencil leaves a non-periodic
grid come back as NaN; ``valid_mask`` tells which ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ansatz import ComplexField, VortexConfiguration, eval_logderiv_Vd, eval_Vd
from .vortex_profile import RadialProfile, eval_w

D1 = {2: (np.array([-1, 1]), np.array([-0.5, 0.5])), 4: (np.array([-2, -1, 1, 2]), np.array([1, -8, 8, -1]) / 12.0)}
D2 = {
    2: (np.array([-1, 0, 1]), np.array([1.0, -2.0, 1.0])),
    4: (np.array([-2, -1, 0, 1, 2]), np.array([-1, 16, -30, 16, -1]) / 12.0),
}


@dataclass(frozen=True)
class OperatorParams:
    eps: float
    c: float
    n: int
    order: int = 2

    def __post_init__(self):
        if self.order not in (2, 4):
            raise ValueError("stencil order must be 2 or 4")

    @property
    def log_eps(self) -> float:
        return abs(np.log(self.eps))

    @classmethod
    def from_config(cls, cfg: VortexConfiguration, order: int = 2) -> "OperatorParams":
        return cls(cfg.eps, cfg.c, cfg.n, order)


def _shift(a, k, axis, periodic):
    if periodic:
        return np.roll(a, -k, axis=axis)
    out = np.full_like(a, np.nan)
    src = [slice(None)] * a.ndim
    dst = [slice(None)] * a.ndim
    n = a.shape[axis]
    if k >= 0:
        src[axis] = slice(k, n)
        dst[axis] = slice(0, n - k)
    else:
        src[axis] = slice(0, n + k)
        dst[axis] = slice(-k, n)
    out[tuple(dst)] = a[tuple(src)]
    return out


def _apply(a, stencil, h, power, axis, periodic):
    offs, wts = stencil
    acc = np.zeros_like(a)
    for k, c in zip(offs, wts):
        acc = acc + c * _shift(a, int(k), axis, periodic)
    return acc / h**power


def _step(axis):
    d = np.diff(axis)
    if not np.allclose(d, d[0], rtol=1e-9, atol=0):
        raise ValueError("finite differences need a uniform grid")
    return float(d[0])


def derivatives(fld: ComplexField, order: int = 2) -> dict:
    """First and second partials plus the Laplacian and angular derivatives."""
    v = fld.values
    h0 = _step(fld.axis0)
    h1 = _step(fld.axis1)
    per1 = fld.periodic and fld.kind == "polar"
    d0 = _apply(v, D1[order], h0, 1, 0, False)
    d1 = _apply(v, D1[order], h1, 1, 1, per1)
    d00 = _apply(v, D2[order], h0, 2, 0, False)
    d11 = _apply(v, D2[order], h1, 2, 1, per1)
    d01 = _apply(d0, D1[order], h1, 1, 1, per1)
    A, B = np.meshgrid(fld.axis0, fld.axis1, indexing="ij")
    if fld.kind == "cartesian":
        out = {"x1": d0, "x2": d1, "x11": d00, "x22": d11, "x12": d01}
        out["lap"] = d00 + d11
        out["s"] = A * d1 - B * d0
        out["ss"] = A**2 * d11 - 2 * A * B * d01 + B**2 * d00 - A * d0 - B * d1
    else:
        if np.any(fld.axis0 <= 0):
            raise ValueError("polar grids must stay off the axis r = 0")
        out = {"r": d0, "rr": d00, "s": d1, "ss": d11, "rs": d01}
        out["lap"] = d00 + d0 / A + d11 / A**2
        c, s = np.cos(B), np.sin(B)
        # Cartesian gradient from polar partials
        out["x1"] = c * d0 - s * d1 / A
        out["x2"] = s * d0 + c * d1 / A
    return out


def valid_mask(fld: ComplexField, order: int = 2) -> np.ndarray:
    probe = fld.with_values(np.ones_like(fld.values))
    return np.isfinite(derivatives(probe, order)["lap"])


def _values(V, fld):
    if isinstance(V, ComplexField):
        return V.values
    if callable(V):
        return np.asarray(V(fld.points), dtype=complex)
    return np.asarray(V, dtype=complex)


def apply_S_parts(fld: ComplexField, params: OperatorParams):
    """(S_a, S_b, S_c) of the sampled field."""
    d = derivatives(fld, params.order)
    v = fld.values
    e2 = params.eps**2
    n = params.n
    sa = d["lap"] + (1.0 - np.abs(v) ** 2) * v
    sb = e2 * (d["ss"] - 2j * n * d["s"] - n**2 * v)
    sc = -1j * params.c * params.log_eps * e2 * (1j * n * v - d["s"])
    tags = ("S_a",), ("S_b",), ("S_c",)
    return tuple(fld.with_values(x, t) for x, t in zip((sa, sb, sc), tags))


def apply_S(fld: ComplexField, params: OperatorParams) -> ComplexField:
    sa, sb, sc = apply_S_parts(fld, params)
    return fld.with_values(sa.values + sb.values + sc.values, ("S",))


def transport_terms(d, v, params):
    """eps^2 angular and speed terms of the linear operator, from precomputed derivatives."""
    e2 = params.eps**2
    n = params.n
    return e2 * (d["ss"] - 2j * n * d["s"] - n**2 * v) - 1j * params.c * params.log_eps * e2 * (1j * n * v - d["s"])


def apply_L0(phi: ComplexField, Vd, params: OperatorParams) -> ComplexField:
    """Linearisation of S at V_d (real-linear because of the projection term)."""
    V = _values(Vd, phi)
    d = derivatives(phi, params.order)
    p = phi.values
    out = d["lap"] + transport_terms(d, p, params) + (1.0 - np.abs(V) ** 2) * p - 2.0 * np.real(np.conj(V) * p) * V
    return phi.with_values(out, ("L0",))


def apply_Lprime(psi: ComplexField, cfg: VortexConfiguration, prof: RadialProfile, params: OperatorParams) -> ComplexField:
    """Far-field form of the linear operator acting on psi = phi / (i V_d)."""
    z = psi.points
    grad, ds = eval_logderiv_Vd(cfg, prof, z)
    V = eval_Vd(cfg, prof, z)
    d = derivatives(psi, params.order)
    p = psi.values
    e2 = params.eps**2
    n = params.n
    out = (
        d["lap"]
        + 2.0 * (grad[0] * d["x1"] + grad[1] * d["x2"])
        - 2j * np.abs(V) ** 2 * np.imag(p)
        + e2 * (d["ss"] + 2.0 * ds * d["s"] - 2j * n * d["s"])
        + 1j * params.c * params.log_eps * e2 * d["s"]
    )
    return psi.with_values(out, ("Lprime",))


def frame_factor(cfg: VortexConfiguration, prof: RadialProfile, j: int, z_tilde):
    """V_d(z~ + xi_j) / w_j(z~): the product of the other vortices seen from vortex j."""
    z_tilde = np.asarray(z_tilde, dtype=complex)
    xi = cfg.positions[j]
    wj, _, _ = eval_w(prof, z_tilde)
    wj = wj if cfg.degrees[j] > 0 else np.conj(wj)
    if np.any(np.abs(wj) == 0):
        raise ValueError("grid hits the vortex centre; offset the patch")
    return eval_Vd(cfg, prof, z_tilde + xi) / wj


def apply_Lj(
    phi_j: ComplexField,
    j: int,
    cfg: VortexConfiguration,
    prof: RadialProfile,
    params: OperatorParams,
    error=None,
) -> ComplexField:
    """Operator in the frame of vortex j: L0(alpha_j phi_j)/alpha_j - (E/V_d) phi_j.

    ``phi_j`` lives on a Cartesian grid in the translated variable
    z~ = z - xi_j.  ``error`` may supply E at the global points; by default
    it is S(V_d) by finite differences on the same grid.
    """
    if phi_j.kind != "cartesian":
        raise ValueError("apply_Lj expects a Cartesian patch around the vortex")
    xi = cfg.positions[j]
    glob = ComplexField("cartesian", phi_j.axis0 + xi.real, phi_j.axis1 + xi.imag, phi_j.values)
    z = glob.points
    V = eval_Vd(cfg, prof, z)
    alpha = frame_factor(cfg, prof, j, phi_j.points)
    L0 = apply_L0(glob.with_values(alpha * phi_j.values), V, params)
    if error is None:
        E = apply_S(glob.with_values(V), params).values
    else:
        E = _values(error, glob)
    out = L0.values / alpha - E / V * phi_j.values
    return phi_j.with_values(out, (f"L_{j}",))


def apply_L_gl(phi: ComplexField, prof: RadialProfile, order: int = 2) -> ComplexField:
    """Linearised 2D Ginzburg-Landau operator around the standard vortex."""
    w, _, _ = eval_w(prof, phi.points)
    d = derivatives(phi, order)
    p = phi.values
    out = d["lap"] + (1.0 - np.abs(w) ** 2) * p - 2.0 * np.real(np.conj(w) * p) * w
    return phi.with_values(out, ("L",))


def kernel_residual(prof: RadialProfile, h: float, half_width: float = 4.0, mode: str = "x1", order: int = 2) -> float:
    """max |L(phi)| on a square patch for phi in {w_x1, w_x2, i w}."""
    m = int(round(half_width / h))
    ax = h * np.arange(-m, m + 1)
    fld = ComplexField("cartesian", ax, ax, np.zeros((ax.size, ax.size)))
    w, w1, w2 = eval_w(prof, fld.points)
    phi = {"x1": w1, "x2": w2, "iw": 1j * w}[mode]
    res = apply_L_gl(fld.with_values(phi), prof, order).values
    return float(np.nanmax(np.abs(res)))


def nonlinear_N_far(psi: ComplexField, params: OperatorParams) -> ComplexField:
    """i (grad psi)^2 + eps^2 (d_s psi)^2 + i (exp(-2 Im psi) - 1 + 2 Im psi)."""
    d = derivatives(psi, params.order)
    p = psi.values
    im = np.imag(p)
    out = 1j * (d["x1"] ** 2 + d["x2"] ** 2) + params.eps**2 * d["s"] ** 2 + 1j * (np.expm1(-2 * im) + 2 * im)
    return psi.with_values(out, ("N",))


def stencil_patch(center: complex, h: float, order: int = 2) -> ComplexField:
    """Smallest Cartesian patch whose centre node has a full stencil."""
    m = order // 2
    offs = h * np.arange(-m, m + 1)
    return ComplexField("cartesian", center.real + offs, center.imag + offs, np.zeros((2 * m + 1, 2 * m + 1)))


def at_centre(fld: ComplexField):
    i = fld.values.shape[0] // 2
    j = fld.values.shape[1] // 2
    return fld.values[i, j]

"""Polygonal multi-vortex configurations and the product ansatz.

A configuration places n_plus degree +1 vortices on a regular polygon of
radius d_eps = d_hat / (eps sqrt|log eps|), optionally with one degree -1
vortex at the origin.  The ansatz is the product of translated standard
vortices, conjugated for the negative one.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .vortex_profile import RadialProfile, eval_rho, eval_w


@dataclass(frozen=True)
class VortexConfiguration:
    n_plus: int
    n_minus: int
    eps: float
    c: float
    d_hat: float
    alpha0: float
    positions: np.ndarray = field(repr=False)
    degrees: np.ndarray = field(repr=False)

    @property
    def log_eps(self) -> float:
        return abs(np.log(self.eps))

    @property
    def n(self) -> int:
        return self.n_plus - self.n_minus

    @property
    def d_eps(self) -> float:
        return self.d_hat / (self.eps * np.sqrt(self.log_eps))

    @property
    def R_eps(self) -> float:
        return self.alpha0 / (self.eps * self.log_eps)

    @property
    def n_vortices(self) -> int:
        return self.positions.size

    def to_dict(self) -> dict:
        return {
            "n_plus": self.n_plus,
            "n_minus": self.n_minus,
            "eps": self.eps,
            "c": self.c,
            "d_hat": self.d_hat,
            "alpha0": self.alpha0,
            "d_eps": self.d_eps,
            "R_eps": self.R_eps,
            "positions": [[float(p.real), float(p.imag)] for p in self.positions],
            "degrees": [int(d) for d in self.degrees],
        }


def half_spacing_alpha0(eps: float, d_hat: float) -> float:
    """alpha0 that makes R_eps exactly d_eps / 2."""
    return 0.5 * d_hat * np.sqrt(abs(np.log(eps)))


def make_config(
    n_plus: int,
    n_minus: int,
    eps: float,
    c: float,
    d_hat: float,
    alpha0: float | None = None,
    diagnostic: bool = False,
) -> VortexConfiguration:
    """Validate parameters and place the vortices.

    ``alpha0=None`` picks the largest admissible ball, R_eps = d_eps / 2.
    ``diagnostic=True`` also admits a single vortex (n_plus=1, n_minus=0).
    """
    if n_minus not in (0, 1):
        raise ValueError("n_minus must be 0 or 1")
    if not (0.0 < eps < np.exp(-2.0)):
        raise ValueError(f"eps must lie in (0, e^-2), got {eps}")
    if not c < 1.0:
        raise ValueError(f"speed coefficient c must be < 1, got {c}")
    if not d_hat > 0:
        raise ValueError("d_hat must be positive")
    if n_minus == 0:
        if n_plus < 2 and not (diagnostic and n_plus == 1):
            raise ValueError("need n_plus >= 2 without a central vortex")
    elif n_plus < 4:
        raise ValueError("need n_plus >= 4 with a central degree -1 vortex")
    if alpha0 is None:
        alpha0 = half_spacing_alpha0(eps, d_hat)
    if not alpha0 > 0:
        raise ValueError("alpha0 must be positive")
    L = abs(np.log(eps))
    d_eps = d_hat / (eps * np.sqrt(L))
    R_eps = alpha0 / (eps * L)
    if R_eps > 0.5 * d_eps * (1 + 1e-12):
        raise ValueError(f"R_eps={R_eps:.4g} exceeds d_eps/2={0.5 * d_eps:.4g}; lower alpha0 or eps")
    k = np.arange(n_plus)
    pos = d_eps * np.exp(2j * np.pi * k / n_plus)
    deg = np.ones(n_plus)
    if n_minus == 1:
        pos = np.append(pos, 0.0 + 0.0j)
        deg = np.append(deg, -1.0)
    pos.setflags(write=False)
    deg.setflags(write=False)
    return VortexConfiguration(int(n_plus), int(n_minus), float(eps), float(c), float(d_hat), float(alpha0), pos, deg)


def with_d_hat(cfg: VortexConfiguration, d_hat: float, keep_alpha0: bool = False) -> VortexConfiguration:
    return make_config(cfg.n_plus, cfg.n_minus, cfg.eps, cfg.c, d_hat, cfg.alpha0 if keep_alpha0 else None)


def _stack(cfg, z):
    z = np.asarray(z, dtype=complex)
    shape = (-1,) + (1,) * z.ndim
    return z, z[None, ...] - cfg.positions.reshape(shape), cfg.degrees.reshape(shape)


def eval_Vd(cfg: VortexConfiguration, prof: RadialProfile, z):
    z, dz, deg = _stack(cfg, z)
    w, _, _ = eval_w(prof, dz)
    w = np.where(deg > 0, w, np.conj(w))
    return np.prod(w, axis=0)


def eval_Vd_with_gradient(cfg: VortexConfiguration, prof: RadialProfile, z):
    """V_d together with its Cartesian first derivatives (product rule)."""
    z, dz, deg = _stack(cfg, z)
    w, w1, w2 = eval_w(prof, dz)
    neg = deg < 0
    w = np.where(neg, np.conj(w), w)
    w1 = np.where(neg, np.conj(w1), w1)
    w2 = np.where(neg, np.conj(w2), w2)
    V = np.prod(w, axis=0)
    V1 = np.zeros_like(V)
    V2 = np.zeros_like(V)
    for j in range(w.shape[0]):
        others = np.prod(np.delete(w, j, axis=0), axis=0)
        V1 = V1 + w1[j] * others
        V2 = V2 + w2[j] * others
    return V, V1, V2


@dataclass
class VortexTerms:
    """Per-vortex polar data at a set of points (leading axis = vortex)."""

    r: np.ndarray
    cos: np.ndarray
    sin: np.ndarray
    rho: np.ndarray
    drho: np.ndarray
    d2rho: np.ndarray
    deg: np.ndarray
    # |xi_j| cos(theta_j - phi_j) and |xi_j| sin(theta_j - phi_j)
    a: np.ndarray
    b: np.ndarray


def vortex_terms(cfg: VortexConfiguration, prof: RadialProfile, z) -> VortexTerms:
    z, dz, deg = _stack(cfg, z)
    r = np.abs(dz)
    if np.any(r == 0):
        raise ValueError("evaluation point coincides with a vortex centre")
    f, df, d2f = eval_rho(prof, r)
    xi = cfg.positions.reshape((-1,) + (1,) * z.ndim)
    proj = dz * np.conj(xi) / r
    return VortexTerms(r, dz.real / r, dz.imag / r, f, df, d2f, deg, proj.real, proj.imag)


def eval_logderiv_Vd(cfg: VortexConfiguration, prof: RadialProfile, z):
    """(grad V_d / V_d as a pair, d_s V_d / V_d) away from the vortex centres."""
    t = vortex_terms(cfg, prof, z)
    lr = t.drho / t.rho
    gx = lr * t.cos - 1j * t.deg * t.sin / t.r
    gy = lr * t.sin + 1j * t.deg * t.cos / t.r
    grad = np.stack([gx.sum(axis=0), gy.sum(axis=0)])
    ds = 1j * cfg.n + (t.b * lr + 1j * t.deg * t.a / t.r).sum(axis=0)
    return grad, ds


def lift_3d(cfg: VortexConfiguration, prof: RadialProfile, r, theta, x3):
    """Screw-symmetric 3D field in physical cylindrical coordinates."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r must be non-negative")
    z = np.asarray(r / cfg.eps * np.exp(1j * np.asarray(theta)), dtype=complex)
    rot = np.exp(1j * np.asarray(x3, dtype=float))
    out = np.ones(np.broadcast(z, rot).shape, dtype=complex)
    for xi, d in zip(cfg.positions, cfg.degrees):
        w, _, _ = eval_w(prof, z - xi * rot)
        out = out * (w if d > 0 else np.conj(w))
    return out


def check_psi_symmetries(psi: Callable, cfg: VortexConfiguration, samples) -> tuple[float, float]:
    """Deviation from psi(x1,-x2) = -conj psi(x1,x2) and from n_plus-fold rotation invariance."""
    z = np.asarray(samples, dtype=complex)
    v = psi(z)
    dev_reflect = np.max(np.abs(psi(np.conj(z)) + np.conj(v)))
    dev_rot = np.max(np.abs(psi(np.exp(2j * np.pi / cfg.n_plus) * z) - v))
    return float(dev_reflect), float(dev_rot)


def eta1(t):
    """Quintic smoothstep cut-off: 1 for t <= 1, 0 for t >= 2, C^2 in between."""
    s = np.clip(np.asarray(t, dtype=float) - 1.0, 0.0, 1.0)
    return 1.0 - s**3 * (10.0 - 15.0 * s + 6.0 * s**2)


def cutoffs(cfg: VortexConfiguration, z):
    """(eta, eta_{j,R_eps} per vortex, chi_j per positive vortex)."""
    z, dz, _ = _stack(cfg, z)
    dist = np.abs(dz)
    eta = eta1(dist).sum(axis=0)
    eta_jR = eta1(dist / cfg.R_eps)
    chi = eta1(dist[: cfg.n_plus] / 2.0)
    return eta, eta_jR, chi


# ---------------------------------------------------------------- fields


@dataclass(frozen=True)
class ComplexField:
    """Complex samples on a tensor grid.

    kind 'cartesian': axes are (x1, x2) coordinates; values[i, j] at (x1[i], x2[j]).
    kind 'polar': axes are (r, s); s is periodic on [0, 2pi) when ``periodic``.
    """

    kind: str
    axis0: np.ndarray
    axis1: np.ndarray
    values: np.ndarray
    periodic: bool = False
    tags: tuple = ()

    def __post_init__(self):
        if self.kind not in ("cartesian", "polar"):
            raise ValueError("kind must be 'cartesian' or 'polar'")
        a0 = np.asarray(self.axis0, dtype=float)
        a1 = np.asarray(self.axis1, dtype=float)
        if np.any(np.diff(a0) <= 0) or np.any(np.diff(a1) <= 0):
            raise ValueError("grid axes must be strictly increasing")
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (a0.size, a1.size):
            raise ValueError(f"values shape {vals.shape} does not match grid {(a0.size, a1.size)}")
        object.__setattr__(self, "axis0", a0)
        object.__setattr__(self, "axis1", a1)
        object.__setattr__(self, "values", vals)

    @property
    def points(self) -> np.ndarray:
        A, B = np.meshgrid(self.axis0, self.axis1, indexing="ij")
        if self.kind == "cartesian":
            return A + 1j * B
        return A * np.exp(1j * B)

    def with_values(self, values, tags=None) -> "ComplexField":
        return ComplexField(self.kind, self.axis0, self.axis1, values, self.periodic, self.tags if tags is None else tags)


def cartesian_patch(center: complex, half_width: float, h: float) -> tuple[np.ndarray, np.ndarray]:
    m = int(round(half_width / h))
    offs = h * np.arange(-m, m + 1)
    return center.real + offs, center.imag + offs


def sample_field(fn: Callable, kind: str, axis0, axis1, periodic: bool = False, tags=()) -> ComplexField:
    f0 = ComplexField(kind, axis0, axis1, np.zeros((len(axis0), len(axis1))), periodic, tags)
    return f0.with_values(fn(f0.points))


def polar_grid(radii, n_theta: int) -> tuple[np.ndarray, np.ndarray]:
    return np.asarray(radii, dtype=float), 2 * np.pi * np.arange(n_theta) / n_theta


def export_field_csv(fld: ComplexField, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pts = fld.points.ravel()
    vals = fld.values.ravel()
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["x1", "x2", "Re", "Im"])
        for p, v in zip(pts, vals):
            wr.writerow([repr(float(p.real)), repr(float(p.imag)), repr(float(v.real)), repr(float(v.imag))])
    return path


def config_to_json(cfg: VortexConfiguration, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps({"schema_version": 1, **cfg.to_dict()}, indent=2))
    return path

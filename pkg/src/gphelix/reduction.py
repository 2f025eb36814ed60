"""Projection of the ansatz error onto the translation kernel and the radius balance.

All integrals live on the disc B(xi_1, R_eps) and use a tensor polar rule
about xi_1: Gauss-Legendre on geometric radial panels and the trapezoid rule
in the angle, refined until the relative change drops below ``rtol``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .ansatz import VortexConfiguration, eta1, make_config
from .error_analysis import error_ratio, odd_even_split, error_R
from .vortex_profile import RadialProfile, eval_w, eval_w_second

COMPONENTS = ("a", "b", "c")


class QuadratureError(RuntimeError):
    pass


class BracketError(ValueError):
    def __init__(self, message, values):
        super().__init__(message)
        self.values = values


def _panels(R: float, first: float = 0.25) -> np.ndarray:
    edges = [0.0]
    e = first
    while e < R:
        edges.append(e)
        e *= 2.0
    edges.append(R)
    return np.array(edges)


def disc_rule(R: float, n_gl: int, n_theta: int):
    """Nodes (relative to the centre) and weights of the polar rule on B(0, R)."""
    x, w = np.polynomial.legendre.leggauss(n_gl)
    edges = _panels(R)
    a, b = edges[:-1, None], edges[1:, None]
    r = (0.5 * (b - a) * x + 0.5 * (b + a)).ravel()
    wr = (0.5 * (b - a) * w).ravel() * r
    th = 2 * np.pi * (np.arange(n_theta) + 0.5) / n_theta
    z = r[:, None] * np.exp(1j * th[None, :])
    wt = wr[:, None] * (2 * np.pi / n_theta) * np.ones_like(th)[None, :]
    return z, wt


@dataclass
class QuadResult:
    value: float
    abs_integral: float
    change: float
    n_gl: int
    n_theta: int


def integrate_disc(f: Callable, R: float, rtol: float = 1e-4, n_gl: int = 8, n_theta: int = 32, max_level: int = 5) -> QuadResult:
    """Real integral of f(z) over |z| < R with successive doubling of both rules."""
    prev = None
    for _ in range(max_level):
        z, wt = disc_rule(R, n_gl, n_theta)
        vals = np.real(f(z))
        val = float(np.sum(wt * vals))
        l1 = float(np.sum(wt * np.abs(vals)))
        if prev is not None:
            change = abs(val - prev)
            if change <= rtol * max(abs(val), 1e-300) or change <= 1e-3 * rtol * l1:
                return QuadResult(val, l1, change, n_gl, n_theta)
        prev = val
        n_gl *= 2
        n_theta *= 2
    raise QuadratureError(f"disc quadrature did not settle (last value {prev:.6g})")


def kernel_weight(prof: RadialProfile, z):
    """w(z) conj(w_x1(z)) for the standard vortex."""
    w, w1, _ = eval_w(prof, z)
    return w * np.conj(w1)


def compute_c_star(prof: RadialProfile, R_eps: float = 4.0, rtol: float = 1e-10) -> float:
    """Re int chi |w_x1|^2 with the cut-off chi = 1 on r < 2, 0 beyond 4."""
    if R_eps < 4:
        raise ValueError("R_eps must be at least 4")

    def f(z):
        _, w1, _ = eval_w(prof, z)
        return eta1(np.abs(z) / 2.0) * np.abs(w1) ** 2

    return integrate_disc(f, 4.0, rtol=rtol, n_gl=16, n_theta=16, max_level=6).value


def _projection_integrand(cfg, prof, ratio_fn):
    xi = cfg.positions[0]

    def f(z):
        return ratio_fn(z + xi) * kernel_weight(prof, z)

    return f


def compute_B(component: str, cfg: VortexConfiguration, prof: RadialProfile, rtol: float = 1e-4) -> float:
    """Re int_{B(0,R_eps)} i w R_x(z + xi_1) conj(w_x1) for x in {a, b, c, total}."""
    return compute_B_detail(component, cfg, prof, rtol).value


def compute_B_detail(component, cfg, prof, rtol=1e-4) -> QuadResult:
    if component not in COMPONENTS + ("total",):
        raise ValueError(f"unknown component {component!r}")
    # i w R = w E / V
    f = _projection_integrand(cfg, prof, lambda z: error_ratio(cfg, prof, z, component))
    return integrate_disc(f, cfg.R_eps, rtol=rtol)


def even_projection(cfg: VortexConfiguration, prof: RadialProfile, rtol: float = 1e-4) -> QuadResult:
    """Projection of the even part of R onto w_x1 over B(xi_1, R_eps)."""
    _, R_even = odd_even_split(error_R(cfg, prof), cfg)
    xi = cfg.positions[0]

    def f(z):
        return 1j * kernel_weight(prof, z) * R_even(z + xi)

    return integrate_disc(f, cfg.R_eps, rtol=rtol)


def orthogonality_integral(prof: RadialProfile, R: float, rtol: float = 1e-8) -> QuadResult:
    """Re int_{B(0,R)} w_x2x2 conj(w_x1)."""

    def f(z):
        _, w1, _ = eval_w(prof, z)
        _, _, w22 = eval_w_second(prof, z)
        return w22 * np.conj(w1)

    return integrate_disc(f, R, rtol=rtol)


# ---------------------------------------------------------------- balance


def asymptotic_coefficients(n_plus: int, n_minus: int, c: float) -> tuple[float, float]:
    """(a0, a1) of the model eps sqrt(L) (-a0/d + a1 d)."""
    if n_minus == 0:
        a0 = (n_plus - 1) * np.pi
    else:
        a0 = (n_plus - 3) * np.pi
    return a0, (1.0 - c) * np.pi


def asymptotic_root(n_plus: int, n_minus: int, c: float) -> float:
    a0, a1 = asymptotic_coefficients(n_plus, n_minus, c)
    return float(np.sqrt(a0 / a1))


def model_balance(cfg: VortexConfiguration) -> float:
    a0, a1 = asymptotic_coefficients(cfg.n_plus, cfg.n_minus, cfg.c)
    return cfg.eps * np.sqrt(cfg.log_eps) * (-a0 / cfg.d_hat + a1 * cfg.d_hat)


@dataclass
class BalanceValue:
    measured: float
    model: float
    B: dict


def balance(cfg: VortexConfiguration, prof: RadialProfile, rtol: float = 1e-4) -> BalanceValue:
    """B_a + B_b + B_c (measured) next to the two-term model."""
    B = {k: compute_B(k, cfg, prof, rtol) for k in COMPONENTS}
    return BalanceValue(float(sum(B.values())), float(model_balance(cfg)), B)


def solve_dhat(
    n_plus: int,
    n_minus: int,
    c: float,
    eps: float,
    bracket: tuple[float, float],
    prof: RadialProfile,
    rtol: float = 1e-3,
    quad_rtol: float = 1e-5,
) -> float:
    """Bisection for the zero of the measured balance in d_hat."""
    lo, hi = map(float, bracket)
    if not 0 < lo < hi:
        raise ValueError("bracket must satisfy 0 < lo < hi")

    def g(d):
        return balance(make_config(n_plus, n_minus, eps, c, d), prof, quad_rtol).measured

    glo, ghi = g(lo), g(hi)
    if np.sign(glo) == np.sign(ghi):
        raise BracketError(f"no sign change on [{lo}, {hi}]: balance = ({glo:.4g}, {ghi:.4g})", (glo, ghi))
    while hi - lo > rtol * 0.5 * (hi + lo):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if np.sign(gm) == np.sign(glo):
            lo, glo = mid, gm
        else:
            hi, ghi = mid, gm
    return 0.5 * (lo + hi)


@dataclass
class ReductionReport:
    config: dict
    c_star: float
    B_a: float
    B_b: float
    B_c: float
    B_total: float
    scaled: dict
    balance_samples: list = field(default_factory=list)
    d_hat_root: float | None = None
    asymptotic_root: float | None = None
    notes: list = field(default_factory=list)

    def to_json(self, path=None) -> str:
        text = json.dumps({"schema_version": 1, **asdict(self)}, indent=2, default=float)
        if path is not None:
            Path(path).write_text(text)
        return text


def scaled_coefficients(cfg: VortexConfiguration, B: dict) -> dict:
    """B_b/(pi d eps sqrt L), B_a d/((n-1) pi eps sqrt L) and B_c/(c pi d eps sqrt L)."""
    s = cfg.eps * np.sqrt(cfg.log_eps)
    d = cfg.d_hat
    a0, _ = asymptotic_coefficients(cfg.n_plus, cfg.n_minus, cfg.c)
    out = {"b": B["b"] / (np.pi * d * s), "a": B["a"] * d / (a0 * s) if a0 else float("nan")}
    out["c"] = B["c"] / (cfg.c * np.pi * d * s) if cfg.c != 0 else float("nan")
    return out


def reduction_report(cfg: VortexConfiguration, prof: RadialProfile, d_samples=(), rtol: float = 1e-4) -> ReductionReport:
    bal = balance(cfg, prof, rtol)
    tot = compute_B("total", cfg, prof, rtol)
    samples = []
    for d in d_samples:
        bv = balance(make_config(cfg.n_plus, cfg.n_minus, cfg.eps, cfg.c, d), prof, rtol)
        samples.append({"d_hat": float(d), "measured": bv.measured, "model": bv.model})
    notes = []
    if cfg.n_minus:
        notes.append("central-vortex case: model constant (n_plus - 3) carried with the factor pi")
    return ReductionReport(
        cfg.to_dict(),
        compute_c_star(prof),
        bal.B["a"],
        bal.B["b"],
        bal.B["c"],
        tot,
        scaled_coefficients(cfg, bal.B),
        samples,
        None,
        asymptotic_root(cfg.n_plus, cfg.n_minus, cfg.c),
        notes,
    )

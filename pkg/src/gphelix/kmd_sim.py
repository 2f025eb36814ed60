"""Nearly parallel vortex filaments: periodic pseudo-spectral KMD integrator.

Each filament is a complex curve f_k(z) on z in [0, 2 pi).  The evolution is

    d_t f_k = i ( d_zz f_k + 2 sum_{j != k} d_j d_k (f_k - f_j) / |f_k - f_j|^2 ),

stiff in the linear term, which the integrating factor exp(-i k^2 t) absorbs
exactly.  The polygonal helices rotate rigidly: f_k(t, z) = f_k(0, z) e^{-i nu t}.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._kernels import pair_interaction


class CollisionError(RuntimeError):
    pass


@dataclass(frozen=True)
class FilamentState:
    t: float
    f: np.ndarray
    degrees: np.ndarray
    collision_tol: float = 1e-3

    def __post_init__(self):
        f = np.atleast_2d(np.asarray(self.f, dtype=complex))
        deg = np.asarray(self.degrees, dtype=float).ravel()
        if deg.size != f.shape[0]:
            raise ValueError("one degree per filament")
        if not np.all(np.abs(deg) == 1):
            raise ValueError("degrees must be +1 or -1")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "degrees", deg)

    @property
    def M(self) -> int:
        return self.f.shape[1]

    @property
    def z_grid(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.M) / self.M

    def replace(self, t, f) -> "FilamentState":
        return FilamentState(t, f, self.degrees, self.collision_tol)


def wavenumbers(M: int) -> np.ndarray:
    return np.fft.fftfreq(M, d=1.0 / M)


def min_separation(f) -> float:
    n = f.shape[0]
    if n < 2:
        return np.inf
    d = np.abs(f[:, None, :] - f[None, :, :])
    d[np.arange(n), np.arange(n), :] = np.inf
    return float(d.min())


def high_mode_fraction(f) -> float:
    """Largest share of spectral energy in the top third of |k| among filaments."""
    F = np.fft.fft(f, axis=1)
    k = np.abs(wavenumbers(f.shape[1]))
    top = k > k.max() * 2 / 3
    e = np.abs(F) ** 2
    tot = e.sum(axis=1)
    frac = np.where(tot > 0, e[:, top].sum(axis=1) / np.where(tot > 0, tot, 1), 0.0)
    return float(frac.max())


def _check(state: FilamentState, f=None):
    f = state.f if f is None else f
    sep = min_separation(f)
    if sep <= state.collision_tol:
        raise CollisionError(f"filaments within {sep:.3g} of each other (tolerance {state.collision_tol:.3g})")


def second_derivative(f) -> np.ndarray:
    k = wavenumbers(f.shape[1])
    return np.fft.ifft(-(k**2) * np.fft.fft(f, axis=1), axis=1)


def interaction(f, degrees) -> np.ndarray:
    return 2j * pair_interaction(f, degrees)


def kmd_rhs(state: FilamentState) -> np.ndarray:
    _check(state)
    return 1j * second_derivative(state.f) + interaction(state.f, state.degrees)


def helix_dhat(n: int, nu: float, central: bool = False) -> float:
    if nu >= 1:
        raise ValueError("rotation frequency nu must be < 1")
    if central:
        if n < 4:
            raise ValueError("need at least 4 outer helices around a central filament")
        return float(np.sqrt((n - 3) / (1.0 - nu)))
    if n < 2:
        raise ValueError("need at least two filaments")
    return float(np.sqrt((n - 1) / (1.0 - nu)))


def helix_exact(n: int, nu: float, t: float = 0.0, M: int = 64, family: str = "polygon") -> FilamentState:
    """Rigidly rotating helices.

    family 'polygon': n degree +1 helices on a regular polygon.
    family 'central-minus': n degree +1 helices plus a straight degree -1
    filament on the axis (n + 1 filaments in total).
    """
    z = 2 * np.pi * np.arange(M) / M
    if family == "polygon":
        d = helix_dhat(n, nu)
        k = np.arange(n)
        f = d * np.exp(1j * (z[None, :] - nu * t)) * np.exp(2j * np.pi * k / n)[:, None]
        deg = np.ones(n)
    elif family == "central-minus":
        d = helix_dhat(n, nu, central=True)
        k = np.arange(n)
        f = d * np.exp(1j * (z[None, :] - nu * t)) * np.exp(2j * np.pi * k / n)[:, None]
        f = np.vstack([f, np.zeros((1, M))])
        deg = np.append(np.ones(n), -1.0)
    else:
        raise ValueError(f"unknown family {family!r}")
    return FilamentState(t, f, deg, 1e-3 * d)


def helix_residual(state: FilamentState, nu: float) -> float:
    """max |rhs + i nu f| (zero for an exact rotating family)."""
    return float(np.max(np.abs(kmd_rhs(state) + 1j * nu * state.f)))


def step(state: FilamentState, dt: float) -> FilamentState:
    """Integrating factor for the linear part, Heun for the interaction."""
    k = wavenumbers(state.M)
    E = np.exp(-1j * k**2 * dt)

    def N(f):
        _check(state, f)
        return interaction(f, state.degrees)

    F0 = np.fft.fft(state.f, axis=1)
    n0 = np.fft.fft(N(state.f), axis=1)
    F1 = E * (F0 + dt * n0)
    f1 = np.fft.ifft(F1, axis=1)
    n1 = np.fft.fft(N(f1), axis=1)
    F2 = E * F0 + 0.5 * dt * (E * n0 + n1)
    f2 = np.fft.ifft(F2, axis=1)
    _check(state, f2)
    return state.replace(state.t + dt, f2)


def integrate(state: FilamentState, T: float, dt: float, record_every: int = 0):
    """Advance to time T; optionally keep every ``record_every``-th state."""
    if dt == 0:
        raise ValueError("dt must be nonzero")
    nsteps = int(round(abs(T) / abs(dt)))
    dt = np.sign(dt) * abs(T) / nsteps if nsteps else dt
    traj = [state] if record_every else []
    for i in range(nsteps):
        state = step(state, dt)
        if record_every and (i + 1) % record_every == 0:
            traj.append(state)
    return state, traj


def centroid(state: FilamentState, weighted: bool = True) -> complex:
    """Sum over filaments of the z-average of f_k, weighted by degree unless told otherwise.

    The interaction cancels pairwise in the unweighted sum, so that one is
    conserved for any degrees; the weighted one only when all degrees agree.
    """
    w = state.degrees[:, None] if weighted else 1.0
    return complex(np.sum(w * state.f) / state.M)


def phase_drift_frequency(traj, k: int = 0, z_index: int = 0) -> float:
    """Least-squares rotation frequency of one filament sample, nu with f ~ e^{-i nu t}."""
    t = np.array([s.t for s in traj])
    ph = np.unwrap(np.angle([s.f[k, z_index] for s in traj]))
    slope = np.polyfit(t, ph, 1)[0]
    return float(-slope)


def smooth_perturbation(n: int, M: int, rng: np.random.Generator, modes: int = 3) -> np.ndarray:
    z = 2 * np.pi * np.arange(M) / M
    out = np.zeros((n, M), dtype=complex)
    for m in range(-modes, modes + 1):
        coef = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / (1 + m * m)
        out += coef[:, None] * np.exp(1j * m * z)[None, :]
    return out / np.max(np.abs(out))


@dataclass
class EquilibriumReport:
    family: str
    n: int
    nu: float
    T: float
    dt: float
    M: int
    delta: float
    residual: float
    max_deviation: float
    nu_measured: float
    growth_factor: float | None
    growth_rate: float | None

    def to_json(self, path=None) -> str:
        from dataclasses import asdict

        text = json.dumps({"schema_version": 1, **asdict(self)}, indent=2)
        if path is not None:
            Path(path).write_text(text)
        return text


def relative_equilibrium_check(
    n: int,
    nu: float,
    T: float = 1.0,
    dt: float = 1e-3,
    M: int = 64,
    delta: float = 0.0,
    family: str = "polygon",
    seed: int = 0,
    samples: int = 50,
):
    """Run from (possibly perturbed) helix data; compare with the rotating exact family."""
    if delta < 0:
        raise ValueError("delta must be non-negative")
    s0 = helix_exact(n, nu, 0.0, M, family)
    f0 = s0.f
    if delta > 0:
        f0 = f0 + delta * smooth_perturbation(f0.shape[0], M, np.random.default_rng(seed))
    state = s0.replace(0.0, f0)
    nsteps = int(round(T / dt))
    every = max(1, nsteps // samples)
    final, traj = integrate(state, T, dt, record_every=every)
    devs = np.array([np.max(np.abs(s.f - s0.f * np.exp(-1j * nu * s.t))) for s in traj])
    nu_meas = phase_drift_frequency(traj)
    gf = rate = None
    if delta > 0:
        gf = float(devs[-1] / devs[0])
        tt = np.array([s.t for s in traj])
        rate = float(np.polyfit(tt, np.log(np.maximum(devs, 1e-300)), 1)[0])
    report = EquilibriumReport(
        family, n, nu, T, dt, M, delta, helix_residual(s0, nu), float(devs.max()), nu_meas, gf, rate
    )
    return report, traj


def export_trajectory_csv(traj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", "k", "z_index", "Re_f", "Im_f"])
        for s in traj:
            for k in range(s.f.shape[0]):
                for i, v in enumerate(s.f[k]):
                    wr.writerow([repr(float(s.t)), k, i, repr(float(v.real)), repr(float(v.imag))])
    return path

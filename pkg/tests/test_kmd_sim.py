import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gphelix import _kernels
from gphelix import kmd_sim as km


def test_two_filament_radius():
    s = km.helix_exact(2, 0.0)
    assert np.allclose(np.abs(s.f), 1.0)
    assert np.allclose(s.f[0], -s.f[1])


@pytest.mark.parametrize("n,nu", [(2, 0.0), (3, 0.2), (5, -0.5), (7, 0.9)])
def test_polygon_family_exact(n, nu):
    assert km.helix_residual(km.helix_exact(n, nu), nu) < 1e-10


@pytest.mark.parametrize("n,nu", [(4, 0.0), (5, 0.0), (6, 0.4)])
def test_central_family_exact(n, nu):
    s = km.helix_exact(n, nu, family="central-minus")
    assert s.f.shape[0] == n + 1
    assert km.helix_residual(s, nu) < 1e-10


def test_central_family_radius():
    s = km.helix_exact(5, 0.0, family="central-minus")
    assert np.allclose(np.abs(s.f[:5]), np.sqrt(2))
    assert np.all(s.f[5] == 0)


def test_invalid_families():
    with pytest.raises(ValueError):
        km.helix_exact(3, 1.0)
    with pytest.raises(ValueError):
        km.helix_exact(3, 0.0, family="central-minus")
    with pytest.raises(ValueError):
        km.helix_exact(3, 0.0, family="square")


def test_point_vortex_pair():
    # straight filaments at +-a rotate rigidly at rate 1/(2 a^2)
    a = 0.7
    f = np.array([[a], [-a]]) * np.ones((2, 8))
    rhs = km.kmd_rhs(km.FilamentState(0.0, f, [1, 1]))
    assert np.allclose(rhs[0], 1j * 2 * (2 * a) / (2 * a) ** 2)
    assert np.allclose(rhs[1], -rhs[0])


def test_single_filament_only_dispersion():
    z = 2 * np.pi * np.arange(32) / 32
    f = (0.3 * np.cos(2 * z) + 0.1j * np.sin(z))[None, :]
    rhs = km.kmd_rhs(km.FilamentState(0.0, f, [1]))
    assert np.allclose(rhs, 1j * (-4 * 0.3 * np.cos(2 * z) - 0.1j * np.sin(z)), atol=1e-12)


def test_straight_filament_is_fixed():
    s = km.FilamentState(0.0, np.full((1, 16), 0.4 - 0.2j), [1])
    out = km.step(s, 0.01)
    assert np.max(np.abs(out.f - s.f)) < 1e-15


def test_collision_detected():
    f = np.zeros((2, 8), dtype=complex)
    f[1] = 1e-5
    with pytest.raises(km.CollisionError):
        km.kmd_rhs(km.FilamentState(0.0, f, [1, 1]))


def test_degrees_validated():
    with pytest.raises(ValueError):
        km.FilamentState(0.0, np.zeros((2, 4)), [1, 2])
    with pytest.raises(ValueError):
        km.FilamentState(0.0, np.zeros((2, 4)), [1])


def test_terminal_state_rotates():
    s0 = km.helix_exact(3, 0.2, M=64)
    fin, _ = km.integrate(s0, 1.0, 1e-3)
    assert np.max(np.abs(fin.f - np.exp(-0.2j) * s0.f)) < 1e-6


def test_second_order_in_time():
    s0 = km.helix_exact(3, 0.2, M=64)
    errs = [np.max(np.abs(km.integrate(s0, 1.0, dt)[0].f - np.exp(-0.2j) * s0.f)) for dt in (2e-3, 1e-3)]
    assert errs[0] / errs[1] > 3.5


def test_second_order_generic_data():
    s0 = km.helix_exact(3, 0.2, M=64)
    s0 = s0.replace(0.0, s0.f + 0.05 * km.smooth_perturbation(3, 64, np.random.default_rng(1)))
    ref, _ = km.integrate(s0, 0.5, 1e-4)
    errs = [np.max(np.abs(km.integrate(s0, 0.5, dt)[0].f - ref.f)) for dt in (2e-3, 1e-3)]
    assert errs[0] / errs[1] > 3.5


def test_centroid_conserved_equal_degrees():
    s0 = km.helix_exact(4, 0.1, M=64)
    s0 = s0.replace(0.0, s0.f + 0.02 * km.smooth_perturbation(4, 64, np.random.default_rng(2)))
    fin, _ = km.integrate(s0, 0.5, 1e-3)
    assert abs(km.centroid(fin) - km.centroid(s0)) < 1e-12


def test_centroid_mixed_degrees():
    s0 = km.helix_exact(4, 0.1, M=64, family="central-minus")
    s0 = s0.replace(0.0, s0.f + 0.02 * km.smooth_perturbation(5, 64, np.random.default_rng(2)))
    fin, _ = km.integrate(s0, 0.5, 1e-3)
    assert abs(km.centroid(fin, weighted=False) - km.centroid(s0, weighted=False)) < 1e-12
    # the degree-weighted sum drifts once a -1 filament is present
    assert abs(km.centroid(fin) - km.centroid(s0)) > 1e-6


def test_time_reversal():
    s0 = km.helix_exact(3, 0.0, M=32)
    s0 = s0.replace(0.0, s0.f + 0.05 * km.smooth_perturbation(3, 32, np.random.default_rng(4)))
    errs = []
    for dt in (1e-2, 5e-3):
        back = km.step(km.step(s0, dt), -dt)
        errs.append(np.max(np.abs(back.f - s0.f)))
    assert errs[0] / errs[1] > 7


def test_spectral_accuracy():
    def state(M):
        z = 2 * np.pi * np.arange(M) / M
        f = np.vstack([1.2 * np.exp(1j * z) + 0.1 * np.cos(2 * z), -1.2 * np.exp(1j * z) + 0.05j * np.sin(z)])
        return km.FilamentState(0.0, f, [1, 1])

    a = km.kmd_rhs(state(64))
    b = km.kmd_rhs(state(128))[:, ::2]
    assert np.max(np.abs(a - b)) < 1e-10
    assert km.high_mode_fraction(state(64).f) < 1e-6


def test_frequency_recovered():
    for n, nu, fam in [(3, 0.2, "polygon"), (5, 0.0, "central-minus")]:
        rep, _ = km.relative_equilibrium_check(n, nu, T=1.0, family=fam)
        assert abs(rep.nu_measured - nu) < 1e-4
        assert rep.max_deviation < 1e-5


def test_perturbed_run_reports_growth():
    rep, traj = km.relative_equilibrium_check(3, 0.2, T=1.0, delta=1e-3, seed=3)
    assert rep.growth_factor is not None and np.isfinite(rep.growth_rate)
    assert rep.max_deviation < 10 * 1e-3 * np.exp(abs(rep.growth_rate))
    with pytest.raises(ValueError):
        km.relative_equilibrium_check(3, 0.2, delta=-1)


def test_trajectory_export(tmp_path):
    _, traj = km.relative_equilibrium_check(2, 0.0, T=0.01, dt=1e-3, M=8, samples=2)
    path = km.export_trajectory_csv(traj, tmp_path / "t.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "t,k,z_index,Re_f,Im_f"
    assert len(lines) == 1 + len(traj) * 2 * 8


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(1, 40), st.integers(0, 10_000))
def test_pair_sum_paths_agree(n, M, seed):
    rng = np.random.default_rng(seed)
    f = rng.standard_normal((n, M)) + 1j * rng.standard_normal((n, M))
    deg = rng.choice([-1.0, 1.0], n)
    a = _kernels.pair_interaction(f, deg)
    b = _kernels.pair_interaction_numpy(f, deg)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)
    # pairwise cancellation
    assert abs(np.sum(a)) < 1e-9 * (1 + np.sum(np.abs(a)))

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gphelix.ansatz import (
    ComplexField,
    check_psi_symmetries,
    cutoffs,
    eta1,
    eval_logderiv_Vd,
    eval_Vd,
    eval_Vd_with_gradient,
    export_field_csv,
    lift_3d,
    make_config,
    sample_field,
)

coord = st.floats(-40.0, 40.0)


def test_antipodal_pair():
    cfg = make_config(2, 0, 1e-3, 0.0, 1.0)
    d = 1.0 / (1e-3 * np.sqrt(np.log(1e3)))
    assert np.allclose(cfg.positions, [d, -d])
    assert cfg.d_eps == pytest.approx(d)


def test_central_negative_vortex():
    cfg = make_config(5, 1, 1e-3, 0.5, 1.3)
    assert cfg.n_vortices == 6
    assert cfg.positions[-1] == 0
    assert list(cfg.degrees) == [1, 1, 1, 1, 1, -1]
    assert np.allclose(np.abs(cfg.positions[:5]), cfg.d_eps)


@pytest.mark.parametrize(
    "args",
    [
        (2, 0, 0.3, 0.0, 1.0),
        (1, 0, 1e-3, 0.0, 1.0),
        (3, 1, 1e-3, 0.0, 1.0),
        (2, 2, 1e-3, 0.0, 1.0),
        (2, 0, 1e-3, 1.0, 1.0),
        (2, 0, 1e-3, 0.0, -1.0),
    ],
)
def test_invalid_configurations(args):
    with pytest.raises(ValueError):
        make_config(*args)


def test_ball_too_large():
    with pytest.raises(ValueError):
        make_config(2, 0, 1e-2, 0.0, 1.0, alpha0=10.0)


def test_vanishes_at_vortices(profile):
    cfg = make_config(3, 0, 1e-2, 0.0, 1.0)
    assert np.all(eval_Vd(cfg, profile, cfg.positions) == 0)


def test_modulus_tends_to_one(profile):
    cfg = make_config(2, 0, 1e-2, 0.0, 1.0)
    z = 10 * cfg.d_eps * np.exp(1j * np.linspace(0, 2 * np.pi, 13))
    bound = cfg.n_vortices / (2 * (9 * cfg.d_eps) ** 2) + 1e-12
    assert np.all(np.abs(np.abs(eval_Vd(cfg, profile, z)) - 1) < bound)


@settings(max_examples=50, deadline=None)
@given(coord, coord)
def test_conjugation_and_rotation(profile, x, y):
    for cfg in (make_config(3, 0, 1e-2, 0.0, 1.0), make_config(4, 1, 1e-2, 0.0, 1.0)):
        z = complex(x, y)
        v = eval_Vd(cfg, profile, z)
        assert abs(eval_Vd(cfg, profile, np.conj(z)) - np.conj(v)) < 1e-12
        beta = 2 * np.pi / cfg.n_plus
        assert abs(eval_Vd(cfg, profile, np.exp(1j * beta) * z) - np.exp(1j * cfg.n * beta) * v) < 1e-9


def test_single_vortex_log_derivative(profile):
    cfg = make_config(1, 0, 1e-2, 0.0, 1.0, diagnostic=True)
    r = 1.3
    z = cfg.positions[0] + r
    grad, _ = eval_logderiv_Vd(cfg, profile, z)
    from gphelix.vortex_profile import eval_rho

    f, df, _ = eval_rho(profile, r)
    assert grad[0] == pytest.approx(df / f, abs=1e-13)
    assert grad[1] == pytest.approx(1j / r, abs=1e-13)


def test_pair_log_derivative_symmetry(profile):
    cfg = make_config(2, 0, 1e-2, 0.0, 1.0)
    grad, _ = eval_logderiv_Vd(cfg, profile, 7j)
    assert abs(grad[0].real) < 1e-14


def test_log_derivative_against_differences(profile):
    cfg = make_config(4, 1, 5e-2, 0.3, 1.0)
    z = np.array([3.1 + 2.2j])
    grad, ds = eval_logderiv_Vd(cfg, profile, z)
    errs = []
    for h in (1e-3, 5e-4):
        lv = lambda q: eval_Vd(cfg, profile, q)
        g1 = (lv(z + h) - lv(z - h)) / (2 * h) / lv(z)
        rot = lambda t: lv(z * np.exp(1j * t))
        gs = (rot(h) - rot(-h)) / (2 * h) / lv(z)
        errs.append(max(abs(g1 - grad[0])[0], abs(gs - ds)[0]))
    assert np.log2(errs[0] / errs[1]) > 1.8


def test_gradient_product_rule(profile):
    cfg = make_config(4, 1, 5e-2, 0.0, 1.0)
    z = np.array([1.1 + 0.7j, -3.0 + 5.0j])
    V, V1, V2 = eval_Vd_with_gradient(cfg, profile, z)
    grad, _ = eval_logderiv_Vd(cfg, profile, z)
    assert np.allclose(V1, V * grad[0], atol=1e-12)
    assert np.allclose(V2, V * grad[1], atol=1e-12)


def test_lift_at_zero_height(profile):
    cfg = make_config(2, 0, 1e-2, 0.0, 1.0)
    r, th = 0.03, 0.4
    assert lift_3d(cfg, profile, r, th, 0.0) == pytest.approx(eval_Vd(cfg, profile, r / cfg.eps * np.exp(1j * th)))


def test_screw_identity(profile):
    cfg = make_config(3, 0, 1e-2, 0.0, 1.0)
    r, th, x3 = np.meshgrid(np.linspace(0.005, 0.05, 4), np.linspace(0, 6, 5), np.linspace(-2, 2, 5), indexing="ij")
    lhs = np.exp(-1j * cfg.n * x3) * lift_3d(cfg, profile, r, th, x3)
    rhs = lift_3d(cfg, profile, r, th - x3, 0.0)
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_zero_set_rotates_with_height(profile):
    cfg = make_config(2, 0, 1e-2, 0.0, 1.0)
    x3 = np.pi / 2
    for k in range(2):
        pos = cfg.d_eps * np.exp(1j * (x3 + 2 * np.pi * k / 2))
        assert abs(lift_3d(cfg, profile, cfg.eps * abs(pos), np.angle(pos), x3)) < 1e-9


def test_no_spurious_zeros(profile):
    cfg = make_config(3, 0, 5e-2, 0.0, 1.0)
    ax = np.linspace(-1.5 * cfg.d_eps, 1.5 * cfg.d_eps, 201)
    z = (ax[:, None] + 1j * ax[None, :]).ravel()
    far = np.min(np.abs(z[:, None] - cfg.positions[None, :]), axis=1) > 1e-3
    assert np.all(np.abs(eval_Vd(cfg, profile, z[far])) > 0)


def test_symmetry_checker():
    cfg = make_config(3, 0, 1e-2, 0.0, 1.0)
    z = np.array([1 + 2j, -0.5 + 0.3j, 3 - 1j])
    assert check_psi_symmetries(lambda q: 1j * np.ones_like(q), cfg, z)[0] == 0
    assert check_psi_symmetries(lambda q: q - np.conj(q), cfg, z)[0] > 0
    assert check_psi_symmetries(lambda q: q**3, cfg, z)[1] < 1e-12


def test_cutoffs(profile):
    cfg = make_config(2, 0, 1e-2, 0.0, 1.0)
    eta, etaR, chi = cutoffs(cfg, cfg.positions[0])
    assert eta == 1 and etaR[0] == 1 and chi[0] == 1
    eta, _, _ = cutoffs(cfg, cfg.positions[0] + 2.5)
    assert eta == 0
    assert eta1(1.5) == pytest.approx(0.5)


def test_cutoff_smoothness():
    h = 1e-4
    for t in (1.0, 2.0):
        d1 = (eta1(t + h) - eta1(t - h)) / (2 * h)
        d2 = (eta1(t + h) - 2 * eta1(t) + eta1(t - h)) / h**2
        assert abs(d1) < 1e-6 and abs(d2) < 1e-3


def test_field_validation_and_export(tmp_path):
    with pytest.raises(ValueError):
        ComplexField("cartesian", [0, 1], [0, 1], np.zeros((3, 2)))
    with pytest.raises(ValueError):
        ComplexField("hex", [0, 1], [0, 1], np.zeros((2, 2)))
    fld = sample_field(lambda z: z**2, "cartesian", [0.0, 1.0], [0.0, 2.0])
    path = export_field_csv(fld, tmp_path / "f.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "x1,x2,Re,Im" and len(lines) == 5

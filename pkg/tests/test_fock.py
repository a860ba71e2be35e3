import math

import numpy as np
import pytest

from tfconc import fock, regions
from tfconc.errors import BasisTooSmall, TailTooLarge, ZeroFunction

SQRT_PI = 1.772453850905516
POISSON_PI_TAIL_40 = 4.34e-30  # sum_{k>=40} pi^k e^-pi / k!


def random_unit(rng, n=16):
    c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return fock.FockCoefficients(c / np.linalg.norm(c))


def test_monomial_eval_examples():
    for z in (0j, 1 + 2j, -3.5 + 0.1j):
        assert fock.monomial_eval(0, z) == 1.0 + 0.0j
    assert fock.monomial_eval(1, 1 + 0j) == pytest.approx(SQRT_PI, abs=1e-12)
    assert fock.monomial_eval(5, 0j) == 0.0 + 0.0j


def test_monomial_eval_accepts_phase_points():
    p = fock.PhasePoint(0.3, -1.2)
    assert fock.monomial_eval(3, p) == pytest.approx(
        fock.monomial_eval(3, complex(0.3, -1.2)), rel=1e-14
    )


def test_monomial_eval_overflow_safe():
    # naive pi^k/k! overflows near k ~ 170; the log route must not
    v = fock.monomial_eval(2000, 1.5 + 0.5j)
    assert np.isfinite(v.real) and np.isfinite(v.imag)
    with pytest.raises(ValueError):
        fock.monomial_eval(10**4, 1.0)
    with pytest.raises(ValueError):
        fock.monomial_eval(-1, 1.0)


def test_monomial_recurrence_matches_log_form(rng):
    z = rng.standard_normal(30) + 1j * rng.standard_normal(30)
    z *= 4.0 / np.abs(z).max()
    cols = fock.eval_basis_columns(z, 40)
    for k in (0, 1, 7, 25, 39):
        direct = np.array([fock.monomial_eval(k, zz) for zz in z])
        np.testing.assert_allclose(cols[:, k], direct, rtol=1e-11, atol=1e-12)


def test_fock_eval_constant_and_origin(rng):
    e0 = fock.basis_element(0)
    assert fock.fock_eval(e0, 2 + 3j) == pytest.approx(1.0)
    F = random_unit(rng)
    assert fock.fock_eval(F, 0j) == pytest.approx(complex(F.coeffs[0]), abs=1e-14)


def test_reproducing_bound(rng):
    for _ in range(200):
        F = random_unit(rng, n=int(rng.integers(1, 24)))
        z = complex(*rng.uniform(-4, 4, 2))
        if abs(z) > 4:
            z *= 4 / abs(z)
        val = abs(fock.fock_eval(F, z)) ** 2 * math.exp(-math.pi * abs(z) ** 2)
        assert val <= 1 + 1e-10


def test_coherent_state_saturates_bound():
    z0 = 1.0 + 0.0j
    F = fock.coherent_state(z0, N=40)
    val = abs(fock.fock_eval(F, z0)) ** 2 * math.exp(-math.pi)
    assert val == pytest.approx(1.0, abs=1e-12)


def test_decay_at_large_radius(rng):
    F = random_unit(rng, n=32)
    for radius, cap in ((6.0, 1e-3), (8.0, 1e-6)):
        z = radius * np.exp(1j * np.linspace(0, 2 * math.pi, 64))
        vals = np.abs(fock.eval_many(F, z)) ** 2 * np.exp(-math.pi * radius**2)
        assert vals.max() < cap


def test_parseval(rng):
    for _ in range(10):
        c = rng.standard_normal(12) + 1j * rng.standard_normal(12)
        F = fock.FockCoefficients(c)
        assert fock.fock_norm(F, 2.0) == pytest.approx(np.linalg.norm(c), rel=1e-14)


def test_fock_norm_p4():
    e0 = fock.basis_element(0)
    assert fock.fock_norm(e0, 4.0) == pytest.approx(0.5**0.25, abs=1e-9)


def test_fock_norm_lieb_values():
    e0 = fock.basis_element(0)
    for p in (1.0, 2.0, 4.0):
        assert fock.fock_norm(e0, p) ** p == pytest.approx(2.0 / p, abs=1e-8)


def test_fock_norm_homogeneity():
    F = fock.FockCoefficients([3.0])
    assert fock.fock_norm(F, 2.0) == pytest.approx(3.0, rel=1e-14)
    assert fock.fock_norm(F, 4.0) == pytest.approx(3.0 * 0.5**0.25, rel=1e-9)


def test_fock_norm_tail_guard():
    F = fock.basis_element(4)
    small = regions.quadrature(regions.Disk(0, 1.0), 16)
    with pytest.raises(TailTooLarge):
        fock.fock_norm(F, 4.0, quad=small)


def test_coherent_state_center_origin():
    F = fock.coherent_state(0j, N=5)
    np.testing.assert_allclose(F.coeffs, [1, 0, 0, 0, 0], atol=1e-300)


def test_coherent_state_norm_and_tail():
    F = fock.coherent_state(1.0 + 0j, N=40)
    # dropped weight is the Poisson(pi) upper tail at 40
    assert F.norm() ** 2 == pytest.approx(1.0, abs=1e-12)
    assert 1.0 - F.norm() ** 2 == pytest.approx(POISSON_PI_TAIL_40, abs=1e-13)


def test_coherent_state_basis_too_small():
    with pytest.raises(BasisTooSmall):
        fock.coherent_state(2.0 + 0j, N=3)


def test_coherent_state_amplitude():
    params = fock.CoherentParams(fock.PhasePoint(0.5, -0.25), amplitude=2j)
    F = fock.coherent_state(params)
    assert F.norm() == pytest.approx(2.0, rel=1e-10)
    with pytest.raises(ValueError):
        fock.CoherentParams(fock.PhasePoint(0, 0), amplitude=0)


def test_translate_identity_at_zero(rng):
    F = random_unit(rng)
    for z in (0.3 + 0.1j, -1 + 2j):
        assert fock.translate_eval(F, 0j, z) == pytest.approx(
            fock.fock_eval(F, z), rel=1e-13
        )


def test_translation_density_identity(rng):
    # |U_{z0}F(z)|^2 e^{-pi|z|^2} = |F(z - z0)|^2 e^{-pi|z - z0|^2}
    for _ in range(20):
        F = random_unit(rng, n=10)
        z0 = complex(*rng.uniform(-2, 2, 2))
        z = complex(*rng.uniform(-3, 3, 2))
        lhs = abs(fock.translate_eval(F, z0, z)) ** 2 * math.exp(-math.pi * abs(z) ** 2)
        rhs = abs(fock.fock_eval(F, z - z0)) ** 2 * math.exp(-math.pi * abs(z - z0) ** 2)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-280)


def test_translate_of_constant_saturates():
    e0 = fock.basis_element(0)
    val = abs(fock.translate_eval(e0, 1 + 0j, 1 + 0j)) ** 2 * math.exp(-math.pi)
    assert val == pytest.approx(1.0, rel=1e-12)


def test_coeff_file_roundtrip(tmp_path, rng):
    F = random_unit(rng, n=7)
    path = tmp_path / "c.csv"
    fock.write_coeffs(path, F)
    G = fock.read_coeffs(path)
    np.testing.assert_array_equal(F.coeffs, G.coeffs)
    first = path.read_text().splitlines()[0]
    assert first == "# fock-coeffs v1"


def test_coeff_file_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("# wrong\n0,1,0\n")
    with pytest.raises(ValueError):
        fock.read_coeffs(path)


def test_zero_function_guards():
    with pytest.raises(ZeroFunction):
        fock.FockCoefficients([0.0]).normalized()
    with pytest.raises(ValueError):
        fock.FockCoefficients([])
    with pytest.raises(ValueError):
        fock.FockCoefficients([float("nan")])

import math

import numpy as np
import pytest

from tfconc import bounds, fock, localization as loc, regions
from tfconc.errors import BadExponent, ZeroFunction
from tfconc.regions import AffineImage, Disk, Rect, Union

ONE_MINUS_EXP_PI = 0.956786081736228
LAMBDA1_R1 = 0.821025553585931  # 1 - exp(-pi)(1 + pi)
LIEB4_DISK1 = 0.499066278634146  # (1 - exp(-2 pi)) / 2
LP1_DISK1 = 0.792120423649238  # 1 - exp(-pi/2)


def random_unit(rng, n=12):
    c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return fock.FockCoefficients(c / np.linalg.norm(c))


def test_assemble_disk_entries():
    m = loc.assemble(Disk(0, 1.0), 16)
    assert m.entries[0, 0].real == pytest.approx(1 - math.exp(-math.pi), abs=1e-12)
    assert abs(m.entries[0, 1]) < 1e-12
    off = m.entries - np.diag(np.diag(m.entries))
    assert np.abs(off).max() < 1e-10
    assert np.abs(m.entries - m.entries.conj().T).max() < 1e-12


def test_assemble_eigenvalue_range(rng):
    sheared = AffineImage([[1, 0.6], [0, 1]], (0.2, -0.1), Disk(0, 1.1))
    m = loc.assemble(sheared, 32)
    eigs = m.eigenvalues()
    assert eigs.min() > -1e-10
    assert eigs.max() < 1 + 1e-10


def test_assemble_tiny_disk():
    m = loc.assemble(Disk(0, 1e-6), 8)
    assert m.trace() == pytest.approx(math.pi * 1e-12, rel=1e-3)
    assert np.abs(m.entries).max() < 1e-10


def test_assemble_validates_basis():
    with pytest.raises(ValueError):
        loc.assemble(Disk(0, 1.0), 4)


def test_radial_eigenvalues_formulas():
    lam = loc.radial_eigenvalues(1.0, 8)
    assert lam[0] == pytest.approx(1 - math.exp(-math.pi), abs=1e-14)
    assert lam[1] == pytest.approx(LAMBDA1_R1, abs=1e-12)
    assert np.all(np.diff(lam) < 0)
    assert np.all((lam > 0) & (lam < 1))
    big = loc.radial_eigenvalues(6.0, 4)
    assert np.all(big > 1 - 1e-8)


def test_diagonal_consistency_radial_oracle():
    # quadrature path is the independent oracle for the closed form
    for r in (0.5, 1.0, 2.0):
        m = loc.assemble(Disk(0, r), 48)
        eigs = np.sort(m.eigenvalues())[::-1]
        lam = loc.radial_eigenvalues(r, 48)
        assert np.abs(eigs[:20] - lam[:20]).max() < 1e-8


def test_trace_rule():
    m = loc.assemble(Disk(0, 1.0), 64)
    assert abs(m.trace() - math.pi) < 1e-6
    m2 = loc.assemble(Rect((-0.5, -0.5), (1.0, 1.0)), 64)
    assert abs(m2.trace() - 1.0) < 1e-6


def test_phi_max_disk_sharp():
    rep = loc.phi_max(Disk(0, 1.0), N=64)
    assert rep.phi == pytest.approx(ONE_MINUS_EXP_PI, abs=1e-8)
    assert abs(rep.gap) < 1e-8
    assert rep.measure == pytest.approx(math.pi, rel=1e-12)
    assert 0 <= rep.truncation_estimate < 1e-12


def test_phi_max_translation_invariance():
    base = loc.phi_max(Disk(0, 0.9), N=48).phi
    for z0 in (1.3 - 0.7j, -2 + 0.4j, 0.5 + 2j):
        rep = loc.phi_max(Disk(z0, 0.9), N=48)
        assert rep.phi == pytest.approx(base, abs=1e-7)


def test_phi_max_square_strictly_below():
    side = math.sqrt(math.pi)
    square = Rect((-side / 2, -side / 2), (side, side))
    rep = loc.phi_max(square, N=48)
    assert rep.measure == pytest.approx(math.pi, rel=1e-12)
    assert rep.phi < ONE_MINUS_EXP_PI - 1e-4
    assert rep.gap > 1e-4


def test_phi_max_monotone_in_nesting():
    inner = loc.phi_max(Disk(0, 0.8), N=32).phi
    outer = loc.phi_max(Disk(0, 1.2), N=40).phi
    assert inner <= outer + 1e-9
    r_in = loc.phi_max(Rect((-0.5, -0.5), (1, 1)), N=32).phi
    r_out = loc.phi_max(Rect((-0.8, -0.8), (1.6, 1.6)), N=40).phi
    assert r_in <= r_out + 1e-9


def test_phi_max_small_disk_vanishes():
    rep = loc.phi_max(Disk(0, 0.05), N=12)
    assert rep.phi == pytest.approx(1 - math.exp(-math.pi * 0.0025), abs=1e-9)


def test_phi_of_extremal_cases():
    e0 = fock.basis_element(0)
    assert loc.phi_of(e0, Disk(0, 1.0)) == pytest.approx(ONE_MINUS_EXP_PI, abs=1e-10)
    far = loc.phi_of(e0, Disk(5 + 0j, 1.0))
    assert far < math.pi * math.exp(-math.pi * 16)
    assert loc.phi_of(e0, Disk(0, 6.0)) == pytest.approx(1.0, abs=1e-6)


def test_phi_of_matches_top_eigenvalue_for_coherent():
    z0 = 0.7 - 0.3j
    F = fock.coherent_state(z0)
    val = loc.phi_of(F, Disk(z0, 1.0))
    lam0 = loc.radial_eigenvalues(1.0, 1)[0]
    assert val == pytest.approx(lam0, abs=1e-8)


def test_phi_of_orthogonal_perturbation_decreases():
    e0 = np.zeros(4, dtype=complex)
    e0[0] = 1.0
    base = loc.phi_of(fock.FockCoefficients(e0), Disk(0, 1.0))
    for eps in (0.1, 0.3):
        c = e0.copy()
        c[3] = eps
        val = loc.phi_of(fock.FockCoefficients(c), Disk(0, 1.0))
        assert val < base - 1e-4


def test_phi_of_zero_function():
    with pytest.raises(ZeroFunction):
        loc.phi_of(fock.FockCoefficients([0.0]), Disk(0, 1.0))


def test_lp_concentration_examples():
    e0 = fock.basis_element(0)
    assert loc.lp_concentration(e0, Disk(0, 1.0), 1.0) == pytest.approx(
        LP1_DISK1, abs=1e-9
    )
    p2 = loc.lp_concentration(e0, Disk(0, 1.0), 2.0)
    assert p2 == pytest.approx(loc.phi_of(e0, Disk(0, 1.0)), abs=1e-12)
    assert p2 <= 1 - math.exp(-math.pi) + 1e-8


def test_lp_concentration_respects_bound(rng):
    for _ in range(6):
        F = random_unit(rng)
        reg = Disk(complex(*rng.uniform(-1, 1, 2)), float(rng.uniform(0.4, 1.2)))
        m = regions.measure(reg)
        for p in (1.0, 2.0, 3.0):
            val = loc.lp_concentration(F, reg, p)
            assert val <= bounds.lp_bound(p, m) + 1e-8


def test_lp_exponent_range():
    e0 = fock.basis_element(0)
    with pytest.raises(BadExponent):
        loc.lp_concentration(e0, Disk(0, 1.0), 0.5)
    with pytest.raises(BadExponent):
        loc.lp_concentration(e0, Disk(0, 1.0), 100.0)


def test_local_lieb_examples():
    e0 = fock.basis_element(0)
    assert loc.local_lieb(e0, Disk(0, 1.0), 2.0) == pytest.approx(
        ONE_MINUS_EXP_PI, abs=1e-10
    )
    assert loc.local_lieb(e0, Disk(0, 1.0), 4.0) == pytest.approx(LIEB4_DISK1, abs=1e-9)
    assert loc.local_lieb(e0, Disk(0, 6.0), 4.0) == pytest.approx(0.5, abs=1e-6)
    with pytest.raises(BadExponent):
        loc.local_lieb(e0, Disk(0, 1.0), 1.5)


def test_local_lieb_respects_bound(rng):
    for _ in range(5):
        F = random_unit(rng)
        reg = Disk(complex(*rng.uniform(-1, 1, 2)), float(rng.uniform(0.4, 1.2)))
        m = regions.measure(reg)
        for p in (2.0, 3.0, 4.0):
            assert loc.local_lieb(F, reg, p) <= bounds.lieb_local_bound(p, m) + 1e-8


def test_phi_max_union_below_disk_value():
    u = Union([Disk(-1.6 + 0j, math.sqrt(0.5)), Disk(1.6 + 0j, math.sqrt(0.5))])
    rep = loc.phi_max(u)
    assert rep.measure == pytest.approx(math.pi, rel=1e-12)
    assert rep.phi < ONE_MINUS_EXP_PI - 1e-4


def test_default_basis_size_formula():
    s = math.pi * 1.5**2
    expected = math.ceil(s) + math.ceil(8 * math.sqrt(s)) + 16
    assert loc.default_basis_size(1.5) == expected

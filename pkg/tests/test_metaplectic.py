import math

import numpy as np
import pytest

from tfconc import gabor, metaplectic as mp, regions
from tfconc.regions import AffineImage, Disk

ONE_MINUS_EXP_PI = 0.956786081736228


def phase_aligned_error(a, b):
    """Sup distance between signals after fitting a global phase."""
    inner = np.vdot(a.samples, b.samples)
    theta = inner / abs(inner) if abs(inner) else 1.0
    return float(np.max(np.abs(b.samples - theta * a.samples)))


def test_sl2_matrix_validation():
    mp.SL2Matrix(1, 0, 0, 1)
    with pytest.raises(ValueError):
        mp.SL2Matrix(1, 0, 0, 1.1)
    A = mp.SL2Matrix(2, 0.5, 1, 0.75)
    inv = A.inverse()
    prod = A.as_array() @ inv.as_array()
    np.testing.assert_allclose(prod, np.eye(2), atol=1e-12)


def test_chirp_zero_is_identity():
    phi = gabor.gaussian_window()
    out = mp.apply_generator(phi, "chirp", 0.0)
    np.testing.assert_array_equal(out.samples, phi.samples)


def test_fourier_fixes_gaussian():
    phi = gabor.gaussian_window()
    out = mp.apply_generator(phi, "fourier")
    assert phase_aligned_error(phi, out) < 1e-6


def test_dilation_formula():
    phi = gabor.gaussian_window()
    out = mp.apply_generator(phi, "dilation", 2.0)
    x = phi.grid()
    expect = 2**-0.5 * 2**0.25 * np.exp(-math.pi * (x / 2) ** 2)
    np.testing.assert_allclose(out.samples.real, expect, atol=1e-10)
    np.testing.assert_allclose(out.samples.imag, 0, atol=1e-12)


def test_generator_dispatch_validation():
    phi = gabor.gaussian_window()
    with pytest.raises(ValueError):
        mp.apply_generator(phi, "dilation")
    with pytest.raises(ValueError):
        mp.apply_generator(phi, "squeeze", 1.0)
    with pytest.raises(ValueError):
        mp.dilate(phi, 0.0)


def test_apply_sl2_identity_and_special_cases():
    phi = gabor.gaussian_window()
    ident = mp.apply_sl2(phi, mp.SL2Matrix(1, 0, 0, 1))
    assert phase_aligned_error(phi, ident) < 1e-8

    # rotation by pi/2 reduces to the Fourier path
    rot = mp.apply_sl2(phi, mp.SL2Matrix(0, 1, -1, 0))
    four = mp.fourier(phi)
    assert phase_aligned_error(four, rot) < 1e-10

    # pure shear reduces to a chirp
    sheared = mp.apply_sl2(phi, mp.SL2Matrix.shear(0.5))
    chirped = mp.chirp(phi, 0.5)
    assert phase_aligned_error(chirped, sheared) < 1e-10


def test_unitarity_on_test_matrices():
    phi = gabor.gaussian_window()
    h2 = gabor.hermite_signal([0, 0, 1.0])
    mats = [
        mp.SL2Matrix(1, 0, 0, 1),
        mp.SL2Matrix(0, 1, -1, 0),
        mp.SL2Matrix.shear(1.0),
        mp.SL2Matrix.scaling(2.0),
    ]
    for f in (phi, h2):
        for A in mats:
            g = mp.apply_sl2(f, A)
            assert abs(g.norm() - f.norm()) < 1e-7


def test_dilation_grid_guard():
    # stretching a wide signal overflows the grid support
    wide = gabor.hermite_signal([0.0] * 40 + [1.0])
    with pytest.raises(Exception):
        mp.dilate(wide, 3.0)


def test_covariance_identity_matrix():
    phi = gabor.gaussian_window()
    rep = mp.covariance_check(phi, mp.SL2Matrix(1, 0, 0, 1), Disk(0, 1.0))
    assert rep.rel_err < 1e-10
    assert rep.lhs == pytest.approx(ONE_MINUS_EXP_PI, abs=1e-6)


def test_covariance_rotation_fixes_disk():
    phi = gabor.gaussian_window()
    rep = mp.covariance_check(phi, mp.SL2Matrix(0, 1, -1, 0), Disk(0, 1.0))
    assert rep.lhs == pytest.approx(ONE_MINUS_EXP_PI, abs=1e-4)
    assert rep.rhs == pytest.approx(ONE_MINUS_EXP_PI, abs=1e-4)
    assert rep.rel_err < 1e-3


def test_covariance_grid():
    phi = gabor.gaussian_window()
    h1 = gabor.hermite_signal([0, 1.0])
    disk = Disk(0, 1.0)
    sheared = AffineImage([[1, 0], [0.5, 1]], (0, 0), disk)
    for f in (phi, h1):
        for A in (mp.SL2Matrix(0, 1, -1, 0), mp.SL2Matrix.shear(1.0)):
            for reg in (disk, sheared):
                rep = mp.covariance_check(f, A, reg)
                assert rep.rel_err <= 1e-3


def test_window_optimality_transfer():
    # the transformed Gaussian analyzed with its own window concentrates
    # the extremal fraction on the sheared disk
    A = mp.SL2Matrix.shear(1.0)
    region = AffineImage(A.as_array(), (0.0, 0.0), Disk(0, 1.0))
    phi = gabor.gaussian_window()
    g = mp.apply_sl2(phi, A)
    w = mp.apply_sl2(phi, A)
    rule = regions.quadrature(region, 16)
    pts = np.stack([rule.nodes.real, rule.nodes.imag], axis=1)
    vals = np.abs(gabor.stft_values(g, pts, window=w)) ** 2
    conc = float(np.dot(rule.weights, vals)) / (w.norm() ** 2 * g.norm() ** 2)
    assert conc == pytest.approx(ONE_MINUS_EXP_PI, abs=1e-3)

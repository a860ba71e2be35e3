import math

import numpy as np
import pytest
from scipy import special

from tfconc import bounds
from tfconc.errors import BadExponent

# frozen oracles (mpmath, 30 digits)
GAMMA2_PI = 0.821025553585931  # 1 - exp(-pi)(1 + pi)
PSI2_HALF = 1.678346990016661
MINVOL2_HALF = 1.408424309448992
ONE_MINUS_EXP_PI = 0.956786081736228


def test_gamma_ratio_examples():
    for s in (0.3, 1.0, math.pi, 7.5):
        assert bounds.gamma_ratio(1, s) == pytest.approx(1 - math.exp(-s), abs=1e-15)
    assert bounds.gamma_ratio(2, math.pi) == pytest.approx(GAMMA2_PI, abs=1e-12)
    assert bounds.gamma_ratio(5, 0.0) == 0.0


def test_gamma_ratio_against_scipy():
    # independent route: regularized lower incomplete gamma
    for k in (1, 2, 3, 7, 20, 64):
        for s in (0.01, 0.5, 3.0, 12.0, 80.0, 500.0):
            assert bounds.gamma_ratio(k, s) == pytest.approx(
                float(special.gammainc(k, s)), abs=1e-13
            )


def test_gamma_ratio_monotone_and_range():
    s = np.linspace(0, 40, 400)
    for k in (1, 2, 5):
        vals = [bounds.gamma_ratio(k, x) for x in s]
        assert all(0.0 <= v <= 1.0 for v in vals)
        # strictly below 1 until the gap falls under double resolution
        assert all(v < 1.0 for x, v in zip(s, vals) if x < 30.0)
        assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))


def test_gamma_ratio_validation():
    with pytest.raises(ValueError):
        bounds.gamma_ratio(0, 1.0)
    with pytest.raises(ValueError):
        bounds.gamma_ratio(1, -0.1)


def test_symplectic_capacity():
    assert bounds.symplectic_capacity(1, math.pi) == pytest.approx(math.pi, rel=1e-14)
    assert bounds.symplectic_capacity(2, math.pi**2 / 2) == pytest.approx(math.pi, rel=1e-14)
    assert bounds.symplectic_capacity(3, 0.0) == 0.0


def test_faber_krahn_bound():
    assert bounds.faber_krahn_bound(1, math.pi) == pytest.approx(ONE_MINUS_EXP_PI, abs=1e-12)
    assert bounds.faber_krahn_bound(2, math.pi**2 / 2) == pytest.approx(GAMMA2_PI, abs=1e-12)
    assert bounds.faber_krahn_bound(1, 0.0) == 0.0


def test_psi_basic():
    assert bounds.psi(1, 0.5) == pytest.approx(math.log(2), abs=1e-12)
    assert bounds.psi(2, 0.5) == pytest.approx(PSI2_HALF, abs=1e-10)
    assert bounds.psi(3, 1.0) == 0.0
    with pytest.raises(ValueError):
        bounds.psi(1, 0.0)
    with pytest.raises(ValueError):
        bounds.psi(1, 1.5)


def test_psi_inverse_identity():
    for d in (1, 2, 3):
        for eps in np.linspace(0.02, 0.98, 20):
            s = bounds.psi(d, float(eps))
            assert bounds.gamma_ratio(d, s) == pytest.approx(1 - eps, abs=1e-10)


def test_psi_increasing_in_d():
    for eps in np.linspace(0.03, 0.97, 20):
        p1 = bounds.psi(1, float(eps))
        p2 = bounds.psi(2, float(eps))
        p3 = bounds.psi(3, float(eps))
        assert p1 <= p2 + 1e-12 and p2 <= p3 + 1e-12


def test_psi_oracle_values_at_extremes():
    # high-precision bisection oracles for the asymptotic regimes
    assert bounds.psi(2, 0.999) == pytest.approx(0.045402017769, abs=1e-9)
    assert bounds.psi(3, 0.999) == pytest.approx(0.190533377568, abs=1e-9)
    assert bounds.psi(2, 1e-8) == pytest.approx(21.535785245064, abs=1e-8)
    assert bounds.psi(3, 1e-8) == pytest.approx(24.181313767666, abs=1e-8)


def test_min_volume():
    assert bounds.min_volume(1, math.exp(-1)) == pytest.approx(1.0, abs=1e-12)
    assert bounds.min_volume(2, 0.5) == pytest.approx(MINVOL2_HALF, abs=1e-9)
    assert bounds.min_volume(1, 0.999999) < 2e-6


def test_lieb_local_bound():
    m = 1.7
    assert bounds.lieb_local_bound(2, m) == pytest.approx(1 - math.exp(-m), rel=1e-14)
    assert bounds.lieb_local_bound(4, math.pi) == pytest.approx(
        0.5 * (1 - math.exp(-2 * math.pi)), rel=1e-14
    )
    assert bounds.lieb_local_bound(4, 100.0) == pytest.approx(0.5, rel=1e-12)
    with pytest.raises(BadExponent):
        bounds.lieb_local_bound(1.5, 1.0)


def test_lp_bound():
    assert bounds.lp_bound(2, 0.8) == pytest.approx(1 - math.exp(-0.8), rel=1e-14)
    assert bounds.lp_bound(1, 2 * math.log(2)) == pytest.approx(0.5, rel=1e-14)
    assert bounds.lp_bound(3, 0.0) == 0.0


def test_lp_min_volume():
    assert bounds.lp_min_volume(2, 0.5) == pytest.approx(math.log(2), rel=1e-14)
    assert bounds.lp_min_volume(1, 0.25) == pytest.approx(2 * math.log(4), rel=1e-14)
    assert bounds.lp_min_volume(3, 1.0) == 0.0


def test_prior_art_bound_against_grid_search():
    # brute-force supremum over a dense log grid in p
    def brute(d, eps):
        ps = 2.0 + np.logspace(-6, 4, 250_000)
        vals = (1 - eps) ** (ps / (ps - 2)) * (ps / 2) ** (2 * d / (ps - 2))
        return float(vals.max())

    for d, eps in [(1, 0.5), (1, 0.01), (1, 0.9), (2, 0.5), (2, 0.1)]:
        assert bounds.prior_art_bound(d, eps) == pytest.approx(brute(d, eps), rel=1e-7)


def test_prior_art_bound_cap_and_limits():
    for d in (1, 2):
        for eps in np.linspace(0.01, 0.99, 50):
            assert bounds.prior_art_bound(d, float(eps)) <= math.e**d + 1e-9
    assert bounds.prior_art_bound(1, 0.999999) < 1e-4
    assert bounds.prior_art_bound(1, 0.01) < math.log(100.0)


def test_weak_bound_and_figure_ordering():
    assert bounds.weak_bound(0.0) == 1.0
    assert bounds.weak_bound(0.5) == 0.5
    for d in (1, 2):
        for eps in np.linspace(0.01, 0.99, 99):
            eps = float(eps)
            sharp = bounds.min_volume(d, eps)
            prior = bounds.prior_art_bound(d, eps)
            weak = bounds.weak_bound(eps)
            assert sharp >= prior - 1e-9
            assert sharp >= weak - 1e-12

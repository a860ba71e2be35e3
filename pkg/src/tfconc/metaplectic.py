"""Unitary signal transforms attached to 2x2 unimodular matrices.

The three generators are the Fourier transform (rotation by a quarter
turn in the time-frequency plane), dilation f(x) -> |a|^{-1/2} f(x/a)
(realized by band-limited resampling), and chirp multiplication
exp(pi i C x^2) f(x) (a vertical shear).  A general matrix is factored
through the generators; the overall phase is not tracked, so only
magnitudes of derived quantities are meaningful.  The covariance check
compares the concentration of a transformed signal (with the matching
transformed window) on a region against the concentration of the original
signal on the pulled-back region.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import gabor, localization, regions
from .errors import GridTooNarrow

__all__ = [
    "SL2Matrix",
    "fourier",
    "dilate",
    "chirp",
    "apply_generator",
    "apply_sl2",
    "CovarianceReport",
    "covariance_check",
]


@dataclass(frozen=True)
class SL2Matrix:
    """Real 2x2 matrix with unit determinant."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > 1e-12:
            raise ValueError(f"determinant must be 1 within 1e-12, got {det!r}")

    def inverse(self) -> "SL2Matrix":
        return SL2Matrix(self.d, -self.b, -self.c, self.a)

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @staticmethod
    def rotation(angle: float) -> "SL2Matrix":
        c, s = math.cos(angle), math.sin(angle)
        return SL2Matrix(c, s, -s, c)

    @staticmethod
    def shear(c: float) -> "SL2Matrix":
        return SL2Matrix(1.0, 0.0, c, 1.0)

    @staticmethod
    def scaling(a: float) -> "SL2Matrix":
        return SL2Matrix(a, 0.0, 0.0, 1.0 / a)


def fourier(f: gabor.SampledSignal) -> gabor.SampledSignal:
    """Riemann-sum Fourier transform evaluated on the signal's own grid."""
    y = f.grid()
    kernel = np.exp(-2j * math.pi * np.outer(y, y))
    return gabor.SampledSignal(f.dx * (kernel @ f.samples), f.x0, f.dx)


def dilate(f: gabor.SampledSignal, a: float) -> gabor.SampledSignal:
    """|a|^{-1/2} f(x/a) by sinc (band-limited) resampling on the same grid."""
    if a == 0 or not math.isfinite(a):
        raise ValueError(f"dilation factor must be nonzero and finite, got {a}")
    y = f.grid()
    targets = y / a
    args = (targets[:, None] - y[None, :]) / f.dx
    vals = np.sinc(args) @ f.samples
    out = gabor.SampledSignal(vals / math.sqrt(abs(a)), f.x0, f.dx)
    out.check_support(1e-6)
    return out


def chirp(f: gabor.SampledSignal, C: float) -> gabor.SampledSignal:
    """Pointwise multiplication by exp(pi i C x^2)."""
    y = f.grid()
    return gabor.SampledSignal(np.exp(1j * math.pi * C * y**2) * f.samples, f.x0, f.dx)


def apply_generator(f: gabor.SampledSignal, kind: str, param: float | None = None):
    """Dispatch one generator: 'fourier', 'dilation' (param a), 'chirp' (param C)."""
    if kind == "fourier":
        return fourier(f)
    if kind == "dilation":
        if param is None:
            raise ValueError("dilation needs a scale parameter")
        return dilate(f, float(param))
    if kind == "chirp":
        if param is None:
            raise ValueError("chirp needs a rate parameter")
        return chirp(f, float(param))
    raise ValueError(f"unknown generator {kind!r}")


def apply_sl2(f: gabor.SampledSignal, A: SL2Matrix) -> gabor.SampledSignal:
    """Unitary (up to phase) action of A on the signal.

    For b != 0 the factorization A = shear(d/b) rot90 scaling(1/b) shear(a/b)
    is applied right to left; for b = 0, A = scaling(a) shear(c a).  The
    contract is behavioral (covariance of the STFT magnitude), not a
    particular phase.
    """
    if abs(A.b) > 1e-14:
        out = chirp(f, A.a / A.b)
        out = dilate(out, 1.0 / A.b)
        out = fourier(out)
        return chirp(out, A.d / A.b)
    out = chirp(f, A.c * A.a)
    return dilate(out, A.a)


@dataclass(frozen=True)
class CovarianceReport:
    lhs: float
    rhs: float
    rel_err: float


def covariance_check(
    f: gabor.SampledSignal,
    A: SL2Matrix,
    region,
    order: int = 16,
    basis_size: int = 48,
) -> CovarianceReport:
    """Dual-path check of the symplectic covariance of concentrations.

    lhs: energy fraction of apply_sl2(f, A), analyzed with the transformed
    window, on the region (STFT quadrature).  rhs: energy fraction of f on
    the preimage region under A, computed from the entire-function side.
    The two agree up to discretization error.
    """
    phi = gabor.gaussian_window(axis=f.axis)
    w = apply_sl2(phi, A)
    g = apply_sl2(f, A)
    rule = regions.quadrature(region, order)
    pts = np.stack([rule.nodes.real, rule.nodes.imag], axis=1)
    vals = np.abs(gabor.stft_values(g, pts, window=w)) ** 2
    num = float(np.dot(rule.weights, vals))
    den = (w.norm() ** 2) * (g.norm() ** 2)
    lhs = num / den

    pre = regions.AffineImage(A.inverse().as_array(), (0.0, 0.0), region)
    F = gabor.signal_to_fock(f, basis_size)
    rhs = localization.phi_of(F, regions.reflected(pre))
    rel = abs(lhs - rhs) / max(abs(rhs), 1e-12)
    return CovarianceReport(lhs=lhs, rhs=rhs, rel_err=rel)

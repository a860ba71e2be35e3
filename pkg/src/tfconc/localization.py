"""Phase-space localization operators in the truncated monomial basis.

The operator that multiplies the phase-space density by the indicator of a
region has matrix entries

    M[j, k] = int_Omega e_j(z) conj(e_k(z)) exp(-pi |z|^2) dz

in the monomial basis.  Its top eigenvalue is the largest energy fraction
any unit-norm function concentrates on the region; for a disk centered at
the origin the matrix is diagonal with entries given by regularized
incomplete gamma values.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import bounds, fock, regions
from .errors import BadExponent, ZeroFunction

__all__ = [
    "LocalizationMatrix",
    "ConcentrationReport",
    "assemble",
    "radial_eigenvalues",
    "default_basis_size",
    "phi_max",
    "phi_of",
    "lp_concentration",
    "local_lieb",
]

_GEMM_CHUNK = 16384


class LocalizationMatrix:
    """Hermitian truncation of the region's localization operator."""

    def __init__(self, entries, region_measure: float, basis_size: int):
        m = np.ascontiguousarray(entries, dtype=np.complex128)
        if m.shape != (basis_size, basis_size):
            raise ValueError(f"expected {(basis_size, basis_size)} matrix, got {m.shape}")
        m.flags.writeable = False
        self._entries = m
        self.region_measure = float(region_measure)
        self.basis_size = int(basis_size)
        self._eigs = None

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    def trace(self) -> float:
        return float(np.trace(self._entries).real)

    def eigenvalues(self) -> np.ndarray:
        """Full spectrum, ascending (LAPACK Hermitian solver)."""
        if self._eigs is None:
            eigs = np.linalg.eigvalsh(self._entries)
            eigs.flags.writeable = False
            self._eigs = eigs
        return self._eigs

    def top_eigenvalue(self) -> float:
        return float(self.eigenvalues()[-1])


@dataclass(frozen=True)
class ConcentrationReport:
    """Maximal concentration of a region against its sharp bound."""

    phi: float
    sharp_bound: float
    gap: float
    measure: float
    basis_size: int
    truncation_estimate: float

    def csv_row(self) -> str:
        vals = (
            self.measure,
            self.phi,
            self.sharp_bound,
            self.gap,
            float(self.basis_size),
            self.truncation_estimate,
        )
        cells = [f"{v:.9g}" for v in vals[:4]] + [str(self.basis_size), f"{vals[5]:.9g}"]
        return ",".join(cells[:4] + cells[4:])


def _angular_margin(region) -> float:
    # off-center polar rules pick up angular harmonics from the Gaussian
    # factor exp(-2 pi rho |c| cos theta); resolve up to ~a + 10 a^(1/3)
    c, r = regions.bounding_disk(region)
    a = 2.0 * math.pi * abs(c) * r
    return a + 10.0 * a ** (1.0 / 3.0) if a > 0 else 0.0


def _order_for(region, n_basis: int, order) -> int:
    if order is not None:
        return int(order)
    margin = _angular_margin(region)
    return max(32, math.ceil(0.75 * n_basis) + 8, math.ceil((2 * n_basis + margin + 40) / 4))


def assemble(region, N: int, order: int | None = None) -> LocalizationMatrix:
    """Truncated localization matrix of the region in the monomial basis."""
    N = int(N)
    if N < 8:
        raise ValueError(f"basis size must be >= 8, got {N}")
    rule = regions.quadrature(region, _order_for(region, N, order))
    dens = rule.weights * np.exp(-math.pi * np.abs(rule.nodes) ** 2)
    m = np.zeros((N, N), dtype=np.complex128)
    for lo in range(0, rule.nodes.size, _GEMM_CHUNK):
        hi = min(lo + _GEMM_CHUNK, rule.nodes.size)
        e = fock.eval_basis_columns(rule.nodes[lo:hi], N)
        m += e.conj().T @ (dens[lo:hi, None] * e)
    m = 0.5 * (m + m.conj().T)
    return LocalizationMatrix(m, regions.measure(region), N)


def radial_eigenvalues(r: float, N: int) -> np.ndarray:
    """Eigenvalues gamma(k+1, pi r^2)/k!, k = 0..N-1, of a centered disk of radius r.

    Strictly decreasing in k; the k = 0 value is 1 - exp(-pi r^2).
    """
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    s = math.pi * r * r
    return np.array([bounds.gamma_ratio(k + 1, s) for k in range(int(N))])


def default_basis_size(outer_radius: float) -> int:
    """Basis size resolving modes up to the bounding capacity pi R^2 plus tail margin."""
    s = math.pi * outer_radius**2
    return math.ceil(s) + math.ceil(8.0 * math.sqrt(s)) + 16


def phi_max(region, N: int | None = None, order: int | None = None) -> ConcentrationReport:
    """Largest energy fraction any function concentrates on the region.

    The region is recentered at its bounding-disk center first (the
    concentration is translation invariant), the localization matrix is
    assembled there, and the top eigenvalue is reported together with the
    sharp bound 1 - exp(-measure) and a truncation tail estimate.
    """
    center, radius = regions.bounding_disk(region)
    work = regions.translated(region, -center) if center != 0 else region
    if N is None:
        N = default_basis_size(radius)
    mat = assemble(work, N, order)
    phi = float(np.clip(mat.top_eigenvalue(), 0.0, 1.0))
    m = mat.region_measure
    sharp = bounds.faber_krahn_bound(1, m)
    # dropped Poisson tail above the basis: sum_{k>=N} e^{-s} s^k / k!
    trunc = bounds.gamma_ratio(N, math.pi * radius**2)
    return ConcentrationReport(
        phi=phi,
        sharp_bound=sharp,
        gap=sharp - phi,
        measure=m,
        basis_size=N,
        truncation_estimate=trunc,
    )


def phi_of(F: fock.FockCoefficients, region, order: int | None = None) -> float:
    """Energy fraction of F on the region: int_Omega |F|^2 e^{-pi|z|^2} / ||F||^2."""
    nrm2 = F.norm() ** 2
    if nrm2 == 0.0:
        raise ZeroFunction("phi_of requires a nonzero function")
    rule = regions.quadrature(region, _order_for(region, F.basis_size, order))
    vals = np.abs(fock.eval_many(F, rule.nodes)) ** 2
    vals *= np.exp(-math.pi * np.abs(rule.nodes) ** 2)
    num = float(np.dot(rule.weights, vals))
    return float(np.clip(num / nrm2, 0.0, 1.0))


def _check_p(p: float, p_min: float) -> float:
    p = float(p)
    if p < p_min or p > 64.0:
        raise BadExponent(f"p must lie in [{p_min}, 64], got {p}")
    return p


def _p_mass(F: fock.FockCoefficients, region, p: float, order) -> float:
    rule = regions.quadrature(region, _order_for(region, F.basis_size, order))
    vals = np.abs(fock.eval_many(F, rule.nodes)) ** p
    vals *= np.exp(-0.5 * p * math.pi * np.abs(rule.nodes) ** 2)
    return float(np.dot(rule.weights, vals))


def lp_concentration(F: fock.FockCoefficients, region, p: float, order: int | None = None) -> float:
    """L^p mass fraction of F on the region, at most 1 - exp(-p|Omega|/2)."""
    p = _check_p(p, 1.0)
    if F.norm() == 0.0:
        raise ZeroFunction("lp_concentration requires a nonzero function")
    num = _p_mass(F, region, p, order)
    if p == 2.0:
        den = F.norm() ** 2
    else:
        den = fock.fock_norm(F, p) ** p
    return float(np.clip(num / den, 0.0, 1.0))


def local_lieb(F: fock.FockCoefficients, region, p: float, order: int | None = None) -> float:
    """Local p-th power functional of F, at most (2/p)(1 - exp(-p|Omega|/2))."""
    p = _check_p(p, 2.0)
    nrm = F.norm()
    if nrm == 0.0:
        raise ZeroFunction("local_lieb requires a nonzero function")
    return _p_mass(F, region, p, order) / nrm**p

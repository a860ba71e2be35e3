"""Finite monomial-basis expansions in the Fock space of entire functions.

The basis element of degree k is e_k(z) = (pi^k/k!)^(1/2) z^k.  A vector of
coefficients (c_0, ..., c_{N-1}) represents F = sum_k c_k e_k; by
orthonormality the squared coefficient 2-norm equals the squared Fock norm
of F.  Phase-space points (x, w) are identified with z = x + i*w.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import bounds
from .errors import BasisTooSmall, TailTooLarge, ZeroFunction

__all__ = [
    "PhasePoint",
    "FockCoefficients",
    "CoherentParams",
    "monomial_eval",
    "fock_eval",
    "fock_norm",
    "coherent_state",
    "translate_eval",
    "read_coeffs",
    "write_coeffs",
]

MAX_MONOMIAL_DEGREE = 10**4
COEFF_HEADER = "# fock-coeffs v1"


@dataclass(frozen=True)
class PhasePoint:
    """Point (x, w) of the time-frequency plane, identified with z = x + i*w."""

    x: float
    w: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.w)):
            raise ValueError(f"phase point must be finite, got ({self.x}, {self.w})")

    @property
    def z(self) -> complex:
        return complex(self.x, self.w)

    @staticmethod
    def from_complex(z) -> "PhasePoint":
        z = complex(z)
        return PhasePoint(z.real, z.imag)


def _as_complex(z) -> complex:
    if isinstance(z, PhasePoint):
        return z.z
    return complex(z)


class FockCoefficients:
    """Immutable coefficient vector c_0..c_{N-1} in the monomial basis."""

    def __init__(self, coeffs):
        arr = np.ascontiguousarray(coeffs, dtype=np.complex128)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("coeffs must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(arr.view(np.float64))):
            raise ValueError("coefficients must be finite")
        arr.flags.writeable = False
        self._coeffs = arr

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def basis_size(self) -> int:
        return self._coeffs.size

    def norm(self) -> float:
        """Fock 2-norm, exactly the coefficient 2-norm."""
        return float(np.linalg.norm(self._coeffs))

    def normalized(self) -> "FockCoefficients":
        n = self.norm()
        if n == 0.0:
            raise ZeroFunction("cannot normalize the zero function")
        return FockCoefficients(self._coeffs / n)

    def __eq__(self, other):
        return isinstance(other, FockCoefficients) and np.array_equal(
            self._coeffs, other._coeffs
        )

    def __repr__(self):
        return f"FockCoefficients(n={self.basis_size}, norm={self.norm():.6g})"


@dataclass(frozen=True)
class CoherentParams:
    """Center z0 and amplitude of a phase-space coherent state."""

    z0: PhasePoint
    amplitude: complex = 1.0 + 0.0j

    def __post_init__(self):
        if self.amplitude == 0:
            raise ValueError("coherent-state amplitude must be nonzero")


def basis_element(k: int) -> FockCoefficients:
    """The pure basis vector e_k as a coefficient vector of length k+1."""
    c = np.zeros(k + 1, dtype=np.complex128)
    c[k] = 1.0
    return FockCoefficients(c)


def monomial_eval(k: int, z) -> complex:
    """Evaluate e_k(z) = (pi^k/k!)^(1/2) z^k.

    Magnitude is assembled in log space (pi^k/k! overflows floats near
    k ~ 170) with the phase k*arg(z) accumulated separately, so any
    k < 10^4 is safe.
    """
    k = int(k)
    if k < 0 or k >= MAX_MONOMIAL_DEGREE:
        raise ValueError(f"degree must satisfy 0 <= k < {MAX_MONOMIAL_DEGREE}")
    zc = _as_complex(z)
    if k == 0:
        return 1.0 + 0.0j
    r = abs(zc)
    if r == 0.0:
        return 0.0 + 0.0j
    log_mag = 0.5 * (k * math.log(math.pi) - math.lgamma(k + 1)) + k * math.log(r)
    return cmath.exp(complex(log_mag, k * cmath.phase(zc)))


def eval_basis_columns(z: np.ndarray, n: int) -> np.ndarray:
    """Matrix E with E[i, k] = e_k(z_i), built by the stable forward recurrence.

    Safe for |z| up to ~14 with any n (values peak near exp(pi|z|^2/2)).
    """
    z = np.ascontiguousarray(z, dtype=np.complex128)
    out = np.empty(z.shape + (n,), dtype=np.complex128)
    col = np.ones_like(z)
    out[..., 0] = col
    for k in range(1, n):
        col = col * z * math.sqrt(math.pi / k)
        out[..., k] = col
    return out


def eval_many(F: FockCoefficients, z: np.ndarray) -> np.ndarray:
    """Evaluate F at an array of complex points without materializing the basis."""
    z = np.ascontiguousarray(z, dtype=np.complex128)
    c = F.coeffs
    acc = np.full(z.shape, c[0], dtype=np.complex128)
    col = np.ones_like(z)
    tmp = np.empty_like(z)
    for k in range(1, c.size):
        np.multiply(col, z, out=col)
        col *= math.sqrt(math.pi / k)
        if c[k] != 0:
            np.multiply(col, c[k], out=tmp)
            acc += tmp
    return acc


def fock_eval(F: FockCoefficients, z) -> complex:
    """Pointwise value sum_k c_k e_k(z)."""
    return complex(eval_many(F, np.array([_as_complex(z)]))[0])


def coherent_state(params, N: int | None = None, tol: float = 1e-12) -> FockCoefficients:
    """Coefficients of the coherent state c * exp(-pi|z0|^2/2) * exp(pi z conj(z0)).

    c_k = c * exp(-pi|z0|^2/2) * conj(e_k(z0)); the dropped weight
    sum_{k>=N} |c_k|^2 is the tail of a Poisson law with mean pi|z0|^2 and
    must stay below tol * |c|^2.  With N omitted the smallest admissible
    basis size is chosen automatically.
    """
    if isinstance(params, CoherentParams):
        z0 = params.z0.z
        amp = complex(params.amplitude)
    else:
        z0 = _as_complex(params)
        amp = 1.0 + 0.0j
    s = math.pi * abs(z0) ** 2
    if N is None:
        N = 1
        while bounds.gamma_ratio(N, s) >= tol and N < 4096:
            N += max(1, N // 8)
    N = int(N)
    if N < 1:
        raise ValueError("basis size must be >= 1")
    tail = bounds.gamma_ratio(N, s)
    if tail >= tol:
        raise BasisTooSmall(
            f"Poisson tail {tail:.3e} at basis size {N} exceeds tolerance {tol:.3e}"
        )
    c = np.empty(N, dtype=np.complex128)
    c[0] = amp * math.exp(-0.5 * s)
    z0c = np.conj(z0)
    for k in range(1, N):
        c[k] = c[k - 1] * z0c * math.sqrt(math.pi / k)
    return FockCoefficients(c)


def translate_eval(F: FockCoefficients, z0, z) -> complex:
    """Value of the phase-space translate, exp(-pi|z0|^2/2) exp(pi z conj(z0)) F(z - z0)."""
    z0c = _as_complex(z0)
    zc = _as_complex(z)
    expo = math.pi * zc * np.conj(z0c) - 0.5 * math.pi * abs(z0c) ** 2
    return cmath.exp(expo) * fock_eval(F, zc - z0c)


def _log_tail_bound(N: int, p: float, T: float) -> float:
    """Log of a rigorous bound for int_{pi|z|^2 > T} (|F|^2 e^{-pi|z|^2})^{p/2} dz, |F| unit norm.

    Pointwise |F(z)|^2 e^{-pi|z|^2} <= Q(N, s) with s = pi|z|^2, and for
    s >= 2N the Poisson survival sum Q(N, s) <= 2 e^{-s} s^{N-1}/(N-1)!.
    Integrating the resulting upper envelope in s gives, with
    m = p(N-1)/2 and tau0 = pT/2 >= 2(m+1),

        tail <= 2^{p/2} ((N-1)!)^{-p/2} (2/p)^{m+1} * 2 e^{-tau0} tau0^m.
    """
    m = 0.5 * p * (N - 1)
    tau0 = 0.5 * p * T
    if T < 2.0 * N or tau0 < 2.0 * (m + 1.0):
        return math.inf
    log_tail = (
        0.5 * p * math.log(2.0)
        - 0.5 * p * math.lgamma(N)
        + (m + 1.0) * math.log(2.0 / p)
        + math.log(2.0)
        - tau0
    )
    if m > 0:
        log_tail += m * math.log(tau0)
    return log_tail


def certified_radius(N: int, p: float, tol: float = 1e-12) -> float:
    """Radius R such that the analytic tail bound outside |z| <= R is below tol."""
    T = 2.0 * N + 4.0 * (1.0 + 1.0 / p) + 4.0
    for _ in range(400):
        if _log_tail_bound(N, p, T) <= math.log(tol):
            return math.sqrt(T / math.pi)
        T *= 1.25
    raise TailTooLarge(f"no certifiable radius found for N={N}, p={p}, tol={tol}")


def fock_norm(F: FockCoefficients, p: float = 2.0, quad=None, tol: float = 1e-12) -> float:
    """Fock p-norm of F.

    p = 2 returns the coefficient 2-norm exactly.  Otherwise the integral
    int |F(z)|^p exp(-p pi |z|^2 / 2) dz is evaluated with a polar rule on a
    disk whose radius makes the analytic tail bound smaller than tol; a
    caller-supplied rule is accepted if it covers that radius, else
    TailTooLarge is raised.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if p == 2.0:
        return F.norm()
    nrm = F.norm()
    if nrm == 0.0:
        return 0.0
    n = F.basis_size
    radius = certified_radius(n, p, tol)
    from . import regions  # deferred: regions imports this module

    if quad is None:
        order = max(48, n + 16)
        quad = regions.quadrature(regions.Disk(0.0, radius), order)
    else:
        covered = math.sqrt(np.max(np.abs(quad.nodes)) ** 2) if quad.nodes.size else 0.0
        if covered < radius - 1e-9:
            raise TailTooLarge(
                f"quadrature covers radius {covered:.3f} < certified radius {radius:.3f}"
            )
    vals = np.abs(eval_many(F, quad.nodes))
    dens = vals**p * np.exp(-0.5 * p * math.pi * np.abs(quad.nodes) ** 2)
    integral = float(np.dot(quad.weights, dens))
    return integral ** (1.0 / p)


def write_coeffs(path, F: FockCoefficients) -> None:
    """Write coefficients as `k,re,im` lines under the `# fock-coeffs v1` header."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(COEFF_HEADER + "\n")
        for k, c in enumerate(F.coeffs):
            fh.write(f"{k},{float(c.real)!r},{float(c.imag)!r}\n")


def read_coeffs(path) -> FockCoefficients:
    """Read a coefficient file written by write_coeffs (k ascending from 0)."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != COEFF_HEADER:
            raise ValueError(f"bad header {header!r}, expected {COEFF_HEADER!r}")
        ks, vals = [], []
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ValueError(f"malformed coefficient line {line!r}")
            ks.append(int(parts[0]))
            vals.append(complex(float(parts[1]), float(parts[2])))
    if ks != list(range(len(ks))) or not ks:
        raise ValueError("coefficient indices must be 0,1,2,... with no gaps")
    return FockCoefficients(vals)

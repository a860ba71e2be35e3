"""Time-frequency energy concentration toolkit.

Computes how much of a signal's energy a phase-space region can capture:
Gaussian-window STFT and its entire-function (Bargmann-side) form,
localization-operator spectra, the sharp concentration bounds with their
extremal cases, rearrangement diagnostics, and the symplectic covariance
machinery for changing windows.
"""

from . import bounds, cli, fock, gabor, localization, metaplectic, rearrange, regions
from .errors import (
    BadExponent,
    BasisTooSmall,
    GridTooNarrow,
    NonFiniteMeasure,
    OrderTooLow,
    TailTooLarge,
    ToleranceError,
    ZeroFunction,
)

__version__ = "0.1.0"

__all__ = [
    "bounds",
    "cli",
    "fock",
    "gabor",
    "localization",
    "metaplectic",
    "rearrange",
    "regions",
    "BadExponent",
    "BasisTooSmall",
    "GridTooNarrow",
    "NonFiniteMeasure",
    "OrderTooLow",
    "TailTooLarge",
    "ToleranceError",
    "ZeroFunction",
    "__version__",
]

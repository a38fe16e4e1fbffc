"""Shared value types, unit conventions and parameter validation.

All frequencies (Rabi amplitudes, detunings, rates) are expressed in units of
the excited-state decay rate Gamma, and all lengths in units of the medium
length L. Neither unit is ever passed around at runtime.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)


class FWMError(Exception):
    """Base class for all errors raised by this package."""


class NonPositiveAlpha(FWMError, ValueError):
    pass


class NegativeGamma(FWMError, ValueError):
    pass


class NonPositiveProbe(FWMError, ValueError):
    pass


class OutOfRangeTheta(FWMError, ValueError):
    pass


class OutOfRangeZ(FWMError, ValueError):
    pass


class DegenerateCoupling(FWMError, ValueError):
    """Both coupling amplitudes vanish, so the mixing angle is undefined."""


class SingularSystem(FWMError, ArithmeticError):
    pass


class NonUniqueSteadyState(FWMError, ArithmeticError):
    pass


class StepSizeNotConverged(FWMError, ArithmeticError):
    pass


# Weak-probe regime: omega_p0 must stay below this fraction of the strongest coupling.
WEAK_PROBE_RATIO = 0.1

# Z tolerance for positions produced by floating-point grids.
_Z_SLACK = 1e-12


@dataclass(frozen=True)
class MediumParams:
    """Medium and input-field parameters.

    Attributes
    ----------
    alpha : float
        Optical depth of the medium.
    gamma : float
        Ground-state dephasing rate.
    omega_p0 : float
        Input probe Rabi amplitude.
    """

    alpha: float = 200.0
    gamma: float = 1e-4
    omega_p0: float = 0.03


@dataclass(frozen=True)
class MismatchSpec:
    """Dimensionless phase mismatch kappa = Delta k * L."""

    kappa: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.kappa):
            raise ValueError(f"kappa must be finite, got {self.kappa!r}")


@dataclass(frozen=True)
class FieldState:
    z: float
    omega_p: complex
    omega_s: complex

    def __post_init__(self):
        check_z(self.z)


@dataclass(frozen=True)
class ModeBasis:
    """Dark and bright field superpositions for a given mixing angle."""

    theta: float
    dark: np.ndarray
    bright: np.ndarray


def validate_params(p: MediumParams) -> MediumParams:
    """Return ``p`` unchanged, or raise naming the first violated field."""
    if not (p.alpha > 0 and math.isfinite(p.alpha)):
        raise NonPositiveAlpha(f"alpha must be > 0, got {p.alpha!r}")
    if not (p.gamma >= 0 and math.isfinite(p.gamma)):
        raise NegativeGamma(f"gamma must be >= 0, got {p.gamma!r}")
    if not (p.omega_p0 > 0 and math.isfinite(p.omega_p0)):
        raise NonPositiveProbe(f"omega_p0 must be > 0, got {p.omega_p0!r}")
    return p


def is_weak_probe(p: MediumParams, omega_c0: float, omega_d0: float) -> bool:
    """Check the weak-probe condition, logging a warning when it fails."""
    ok = p.omega_p0 <= WEAK_PROBE_RATIO * max(omega_c0, omega_d0)
    if not ok:
        logger.warning(
            "omega_p0=%g is not weak against couplings (%g, %g)",
            p.omega_p0, omega_c0, omega_d0,
        )
    return ok


def check_z(z):
    """Raise ``OutOfRangeZ`` unless every entry of ``z`` lies in [0, 1]."""
    arr = np.asarray(z, dtype=float)
    if arr.size and (arr.min() < -_Z_SLACK or arr.max() > 1 + _Z_SLACK):
        raise OutOfRangeZ(f"z must lie in [0, 1], got range [{arr.min()}, {arr.max()}]")
    return z


def mode_basis(theta: float) -> ModeBasis:
    if not (-_Z_SLACK <= theta <= math.pi / 2 + _Z_SLACK):
        raise OutOfRangeTheta(f"theta must lie in [0, pi/2], got {theta!r}")
    c, s = math.cos(theta), math.sin(theta)
    return ModeBasis(theta, np.array([c, s]), np.array([s, -c]))

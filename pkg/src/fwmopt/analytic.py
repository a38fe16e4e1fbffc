"""Closed-form two-mode model for constant parameters.

The probe and signal amplitudes obey ``i d/dz (p, s) = M (p, s)`` with

    M = zeta * b b^T + kappa * e_ss,    b = (sin theta, -cos theta),

so that the dark combination ``(cos theta, sin theta)`` is annihilated at
kappa = 0. For constant coefficients the solution is ``exp(-i M z)``, whose
eigen-exponents are ``-i`` times the eigenvalues of ``M``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

# Below this separation the two eigen-exponents are treated as coincident.
DEGENERACY_THRESHOLD = 1e-10


def zeta(theta, delta, alpha):
    """Complex coupling/loss coefficient; works elementwise on arrays.

    Its imaginary part ``-(alpha/2) / (1 + 4 delta^2 cos^4 theta)`` is always
    negative, so the bright mode is attenuated.
    """
    c2 = np.cos(theta) ** 2
    x = 2.0 * delta * c2
    return 0.5 * alpha * (x - 1j) / (1.0 + x * x)


@dataclass(frozen=True)
class MixingMatrix:
    m11: complex
    m12: complex
    m21: complex
    m22: complex
    theta: float
    zeta: complex
    kappa: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]], dtype=complex)


def mixing_matrix(theta: float, delta: float, alpha: float, kappa: float) -> MixingMatrix:
    z = complex(zeta(theta, delta, alpha))
    s, c = math.sin(theta), math.cos(theta)
    off = -z * s * c
    return MixingMatrix(z * s * s, off, off, z * c * c + kappa, theta, z, kappa)


def eigen_exponents(m: MixingMatrix) -> tuple[complex, complex]:
    """Return ``(lambda_plus, lambda_minus)`` such that ``exp(lambda)`` are the
    eigenvalues of the unit-length propagator ``exp(-i M)``.

    The labelling puts the exponent with the smaller ``|Re|`` first, which at
    kappa = 0 is the lossless dark mode (exponent exactly 0).
    """
    z, k = m.zeta, m.kappa
    root = cmath.sqrt(z * z + k * k + 2.0 * k * z * math.cos(2.0 * m.theta))
    mu_p = 0.5 * (z + k + root)
    mu_m = 0.5 * (z + k - root)
    lam_p, lam_m = -1j * mu_p, -1j * mu_m
    if k == 0:
        # Dark eigenvalue is exactly zero; avoid cancellation in z - sqrt(z^2).
        lam_p, lam_m = 0j, -1j * z
    if abs(lam_m.real) < abs(lam_p.real):
        lam_p, lam_m = lam_m, lam_p
    return lam_p, lam_m


def ce_closed_form(theta: float, delta: float, alpha: float, kappa: float) -> float:
    """Conversion efficiency ``|s(1)|^2 / |p(0)|^2`` for constant parameters."""
    m = mixing_matrix(theta, delta, alpha, kappa)
    lam_p, lam_m = eigen_exponents(m)
    coupling = abs(m.zeta * math.sin(2.0 * theta)) ** 2 / 4.0
    gap = lam_p - lam_m
    if abs(gap) < DEGENERACY_THRESHOLD:
        lam = 0.5 * (lam_p + lam_m)
        return coupling * abs(cmath.exp(lam)) ** 2
    # exp(l+) - exp(l-) = exp(l-) * expm1(gap), stable for small gaps
    diff = cmath.exp(lam_m) * np.expm1(gap)
    return float(coupling * abs(diff) ** 2 / abs(gap) ** 2)


def optimal_constants(kappa: float, alpha: float) -> tuple[float, float]:
    """Mixing angle and detuning that cancel the diagonal shift and give a pi-pulse."""
    theta = math.pi / 4 + 0.5 * math.atan(kappa / math.pi)
    delta = alpha / (2 * math.pi**2) * (kappa + math.sqrt(kappa**2 + math.pi**2))
    return theta, delta


def ce_matched_max(alpha: float) -> float:
    return 0.25 * (1.0 + math.exp(-2.0 * math.pi**2 / alpha)) ** 2

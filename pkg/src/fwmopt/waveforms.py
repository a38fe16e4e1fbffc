"""Spatial profiles of the two coupling fields and of the control detuning.

Every profile is an immutable dataclass whose evaluation methods accept a
scalar ``z`` or a numpy array of positions in [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import DegenerateCoupling, check_z


# --------------------------------------------------------------------------- #
# Coupling profiles
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class ConstantRatio:
    """Constant mixing angle; amplitudes normalised to ``(cos theta, sin theta)``."""

    theta: float

    def amplitudes(self, z):
        ones = np.ones_like(np.asarray(z, dtype=float))
        return math.cos(self.theta) * ones, math.sin(self.theta) * ones


@dataclass(frozen=True)
class ConstantAmplitudes:
    omega_c: float
    omega_d: float

    def __post_init__(self):
        if self.omega_c < 0 or self.omega_d < 0:
            raise ValueError("coupling amplitudes must be non-negative")
        if self.omega_c == 0 and self.omega_d == 0:
            raise DegenerateCoupling("omega_c and omega_d are both zero")

    def amplitudes(self, z):
        ones = np.ones_like(np.asarray(z, dtype=float))
        return self.omega_c * ones, self.omega_d * ones


@dataclass(frozen=True)
class LinearRamp:
    """Counter-intuitive ramps: omega_c falls from ``omega_c0`` to 0, omega_d rises to ``omega_d0``."""

    omega_c0: float = 1.5
    omega_d0: float = 1.5

    def __post_init__(self):
        if self.omega_c0 <= 0 or self.omega_d0 <= 0:
            raise ValueError("ramp amplitudes must be positive")

    def amplitudes(self, z):
        z = np.asarray(z, dtype=float)
        return self.omega_c0 * (1.0 - z), self.omega_d0 * z


CouplingProfile = Union[ConstantRatio, ConstantAmplitudes, LinearRamp]


def coupling_at(profile: CouplingProfile, z):
    """Return ``(omega_c, omega_d)`` at position(s) ``z``."""
    check_z(z)
    oc, od = profile.amplitudes(z)
    if np.ndim(z) == 0:
        return float(oc), float(od)
    return oc, od


def theta_at(profile: CouplingProfile, z):
    """Mixing angle with ``tan(theta) = omega_d / omega_c``, in [0, pi/2]."""
    if isinstance(profile, ConstantRatio):
        check_z(z)
        return profile.theta if np.ndim(z) == 0 else np.full(np.shape(z), profile.theta)
    oc, od = coupling_at(profile, z)
    if np.any((np.asarray(oc) == 0) & (np.asarray(od) == 0)):
        raise DegenerateCoupling("omega_c and omega_d both vanish")
    th = np.arctan2(od, oc)
    return float(th) if np.ndim(z) == 0 else th


# --------------------------------------------------------------------------- #
# Detuning waveforms
# --------------------------------------------------------------------------- #


class _Waveform:
    """Linear-in-coefficients waveform: delta(z) = coefficients @ basis(z)."""

    family: str

    @property
    def coefficients(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def n_coefficients(self) -> int:
        return self.coefficients.size

    def basis(self, z) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, z):
        check_z(z)
        val = self.coefficients @ self.basis(np.atleast_1d(np.asarray(z, dtype=float)))
        return float(val[0]) if np.ndim(z) == 0 else val

    def to_dict(self) -> dict:
        return {"family": self.family, "coefficients": [float(c) for c in self.coefficients]}


@dataclass(frozen=True)
class ConstantDetuning(_Waveform):
    delta: float = 0.0
    family = "constant"

    @property
    def coefficients(self):
        return np.array([self.delta], dtype=float)

    def basis(self, z):
        return np.ones((1, np.size(z)))

    @classmethod
    def from_coefficients(cls, coefficients):
        (delta,) = coefficients
        return cls(float(delta))


@dataclass(frozen=True)
class FourierDetuning(_Waveform):
    """delta(z) = a0 + sum_n [a_n cos(n pi z) + b_n sin(n pi z)].

    Canonical coefficient order is ``(a0, a1..an, b1..bn)``.
    """

    a0: float
    a: tuple
    b: tuple
    family = "fourier"

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        object.__setattr__(self, "b", tuple(float(x) for x in self.b))
        if len(self.a) != len(self.b) or len(self.a) < 1:
            raise ValueError("Fourier series needs n >= 1 cosine and sine coefficients")
        if not np.all(np.isfinite(self.coefficients)):
            raise ValueError("Fourier coefficients must be finite")

    @property
    def order(self) -> int:
        return len(self.a)

    @property
    def coefficients(self):
        return np.array((self.a0, *self.a, *self.b), dtype=float)

    def basis(self, z):
        z = np.asarray(z, dtype=float)
        n = np.arange(1, self.order + 1)[:, None]
        return np.vstack([np.ones((1, z.size)), np.cos(n * np.pi * z), np.sin(n * np.pi * z)])

    @classmethod
    def from_coefficients(cls, coefficients):
        c = [float(x) for x in coefficients]
        if len(c) < 3 or len(c) % 2 == 0:
            raise ValueError(f"Fourier needs 1 + 2n coefficients, got {len(c)}")
        n = (len(c) - 1) // 2
        return cls(c[0], tuple(c[1:n + 1]), tuple(c[n + 1:]))

    @classmethod
    def from_interleaved(cls, coefficients):
        """Build from ``(a0, a1, b1, a2, b2, ...)`` ordering."""
        c = [float(x) for x in coefficients]
        return cls(c[0], tuple(c[1::2]), tuple(c[2::2]))


@dataclass(frozen=True)
class BernsteinDetuning(_Waveform):
    """delta(z) = sum_n a_n C(d, n) z^n (1 - z)^(d - n)."""

    a: tuple
    family = "bernstein"

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        if len(self.a) < 2:
            raise ValueError("Bernstein polynomial needs degree >= 1")
        if not np.all(np.isfinite(self.a)):
            raise ValueError("Bernstein coefficients must be finite")

    @property
    def degree(self) -> int:
        return len(self.a) - 1

    @property
    def coefficients(self):
        return np.array(self.a, dtype=float)

    def basis(self, z):
        z = np.asarray(z, dtype=float)[None, :]
        d = self.degree
        n = np.arange(d + 1)[:, None]
        binom = np.array([math.comb(d, k) for k in range(d + 1)], dtype=float)[:, None]
        return binom * z**n * (1.0 - z) ** (d - n)

    @classmethod
    def from_coefficients(cls, coefficients):
        return cls(tuple(coefficients))


DetuningWaveform = Union[ConstantDetuning, FourierDetuning, BernsteinDetuning]

FAMILIES = {
    "constant": ConstantDetuning,
    "fourier": FourierDetuning,
    "bernstein": BernsteinDetuning,
}


def detuning_at(w: DetuningWaveform, z):
    return w(z)


def de_casteljau(coefficients, z):
    """Evaluate a Bernstein polynomial by repeated linear interpolation."""
    check_z(z)
    z = np.asarray(z, dtype=float)
    pts = [np.full(z.shape, float(c)) for c in coefficients]
    while len(pts) > 1:
        pts = [(1.0 - z) * p + z * q for p, q in zip(pts[:-1], pts[1:])]
    return float(pts[0]) if pts[0].ndim == 0 else pts[0]


def waveform_from_dict(d: dict) -> DetuningWaveform:
    try:
        cls = FAMILIES[d["family"]]
    except KeyError:
        raise ValueError(f"unknown waveform family {d.get('family')!r}") from None
    return cls.from_coefficients(d["coefficients"])


def sample_waveform(w: DetuningWaveform, n_points: int = 256):
    z = np.linspace(0.0, 1.0, n_points)
    return z, w(z)


# Reference waveforms. The Fourier sets are listed in interleaved
# (a0, a1, b1, a2, b2, a3, b3) order.
FIG3_FOURIER = FourierDetuning.from_interleaved((-13.55, 20.15, 6.17, -8.93, -0.91, 2.86, 1.45))
FIG4_FOURIER = FourierDetuning.from_interleaved((-1.73, -2.32, -9.08, -13.04, 67.86, 43.09, 1.74))
FIG4_BERNSTEIN = BernsteinDetuning((143.76, 71.73, -42.35, -53.98, 111.60, -59.90, -59.94, -39.85))

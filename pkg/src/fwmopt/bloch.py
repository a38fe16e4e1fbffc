"""Atomic coherence backends for the double-Lambda medium.

Level labels follow the atom: |1>, |2> ground, |3>, |4> excited; array index
``k`` holds level ``k + 1``. Three routes to the probe/signal coherences
rho31 and rho41 are provided:

* :func:`coherences_printed` - the textbook closed form, kept for reference;
* :func:`coherences_steady_reduced` - steady state of the weak-probe
  three-coherence equations (numerical 3x3 solve), with
  :func:`reduced_response` as its vectorised closed-form elimination;
* :func:`steady_state_lindblad` - null space of the full four-level
  Liouvillian, valid beyond the weak-probe limit.

The reduced and full solutions carry twice the coherence amplitude of the
two-mode propagation model; :data:`CALIBRATION` maps them onto it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import DegenerateCoupling, NonUniqueSteadyState, SingularSystem

logger = logging.getLogger(__name__)

# Factor applied to reduced/Lindblad coherences before they drive the fields.
CALIBRATION = 0.5

# Each excited level decays to each ground level at this rate.
BRANCH_RATE = 0.5

_GAP_MIN = 1e-6


@dataclass(frozen=True)
class Coherences:
    rho21: complex
    rho31: complex
    rho41: complex

    def __post_init__(self):
        big = max(abs(self.rho21), abs(self.rho31), abs(self.rho41))
        if big > 0.5:
            logger.warning("coherence magnitude %.3g outside weak-probe regime", big)


@dataclass(frozen=True)
class DensityMatrix4:
    rho: np.ndarray
    residual: float = 0.0

    @property
    def rho31(self) -> complex:
        return complex(self.rho[2, 0])

    @property
    def rho41(self) -> complex:
        return complex(self.rho[3, 0])

    @property
    def rho21(self) -> complex:
        return complex(self.rho[1, 0])

    @property
    def populations(self) -> np.ndarray:
        return self.rho.diagonal().real.copy()

    def check(self, atol_trace=1e-10, atol_herm=1e-12, atol_psd=-1e-9) -> None:
        r = self.rho
        if abs(np.trace(r) - 1) > atol_trace:
            raise AssertionError(f"trace {np.trace(r)} != 1")
        if np.max(np.abs(r - r.conj().T)) > atol_herm:
            raise AssertionError("density matrix is not Hermitian")
        if np.linalg.eigvalsh(r).min() < atol_psd:
            raise AssertionError("density matrix is not positive semidefinite")


def coherences_printed(omega_p, omega_s, omega_c, omega_d, delta):
    """Return ``(rho31, rho41)`` from the closed-form steady state as commonly quoted."""
    D = (1 - 2j * delta) * abs(omega_c) ** 2 + abs(omega_d) ** 2
    if abs(D) < 1e-30:
        raise DegenerateCoupling("both coupling fields vanish")
    rho31 = 1j * (-abs(omega_d) ** 2 * omega_p - np.conj(omega_d) * omega_c * omega_s) / D
    rho41 = 1j * (-np.conj(omega_c) * omega_d * omega_p + abs(omega_c) ** 2 * omega_s) / D
    return rho31, rho41


def _reduced_system(omega_c, omega_d, delta, gamma):
    g = 0.5 * (1.0 + gamma)
    # unknowns ordered (rho41, rho31, rho21)
    A = np.array(
        [
            [1j * delta - g, 0, 1j * omega_d],
            [0, -g, 1j * omega_c],
            [1j * np.conj(omega_d), 1j * np.conj(omega_c), -gamma],
        ],
        dtype=complex,
    )
    return A


def reduced_rhs(coh: Coherences, omega_p, omega_s, omega_c, omega_d, delta, gamma):
    """Time derivatives of (rho41, rho31, rho21) under the weak-probe equations."""
    g = 0.5 * (1.0 + gamma)
    d41 = 1j * (omega_s + omega_d * coh.rho21) + (1j * delta - g) * coh.rho41
    d31 = 1j * (omega_p + omega_c * coh.rho21) - g * coh.rho31
    d21 = 1j * (np.conj(omega_c) * coh.rho31 + np.conj(omega_d) * coh.rho41) - gamma * coh.rho21
    return np.array([d41, d31, d21])


def coherences_steady_reduced(omega_p, omega_s, omega_c, omega_d, delta, gamma) -> Coherences:
    A = _reduced_system(omega_c, omega_d, delta, gamma)
    b = -1j * np.array([omega_s, omega_p, 0.0], dtype=complex)
    try:
        x = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from None
    if not np.all(np.isfinite(x)) or np.linalg.cond(A) > 1e14:
        raise SingularSystem("reduced Bloch system is singular")
    return Coherences(rho21=complex(x[2]), rho31=complex(x[1]), rho41=complex(x[0]))


def reduced_response(omega_c, omega_d, delta, gamma):
    """Linear response of the reduced steady state, vectorised over arrays.

    Returns ``(r31_p, r31_s, r41_p, r41_s)`` with
    ``rho31 = r31_p * omega_p + r31_s * omega_s`` and likewise for rho41.
    """
    oc = np.asarray(omega_c, dtype=complex)
    od = np.asarray(omega_d, dtype=complex)
    g = 0.5 * (1.0 + gamma)
    e = g - 1j * np.asarray(delta, dtype=float)
    den = gamma + np.abs(oc) ** 2 / g + np.abs(od) ** 2 / e
    if np.any(np.abs(den) < 1e-300):
        raise DegenerateCoupling("both coupling fields vanish with zero dephasing")
    # rho21 = x_p * omega_p + x_s * omega_s
    x_p = -np.conj(oc) / g / den
    x_s = -np.conj(od) / e / den
    r31_p = 1j * (1.0 + oc * x_p) / g
    r31_s = 1j * (oc * x_s) / g
    r41_p = 1j * (od * x_p) / e
    r41_s = 1j * (1.0 + od * x_s) / e
    return r31_p, r31_s, r41_p, r41_s


# --------------------------------------------------------------------------- #
# Full four-level master equation
# --------------------------------------------------------------------------- #


def _ket(k):
    v = np.zeros(4, dtype=complex)
    v[k] = 1.0
    return v


def hamiltonian(omega_p, omega_s, omega_c, omega_d, delta) -> np.ndarray:
    """Four-level Hamiltonian in the rotating frame (levels 1..4 -> index 0..3)."""
    H = np.zeros((4, 4), dtype=complex)
    H[2, 0] = omega_p
    H[2, 1] = omega_c
    H[3, 1] = omega_d
    H[3, 0] = omega_s
    H = H + H.conj().T
    H[3, 3] = delta
    return H


def collapse_operators(gamma: float) -> list[np.ndarray]:
    ops = []
    for n in (2, 3):
        for m in (0, 1):
            ops.append(np.sqrt(BRANCH_RATE) * np.outer(_ket(m), _ket(n)))
    if gamma > 0:
        ops.append(np.sqrt(gamma) * np.diag([1.0, -1.0, 0.0, 0.0]).astype(complex))
    return ops


@lru_cache(maxsize=32)
def _dissipator(gamma: float) -> np.ndarray:
    eye = np.eye(4)
    D = np.zeros((16, 16), dtype=complex)
    for L in collapse_operators(gamma):
        LdL = L.conj().T @ L
        D += np.kron(L, L.conj()) - 0.5 * np.kron(LdL, eye) - 0.5 * np.kron(eye, LdL.T)
    D.setflags(write=False)
    return D


def liouvillian(H: np.ndarray, gamma: float) -> np.ndarray:
    """Superoperator acting on row-major ``vec(rho)``.

    The coherent part is ``+i[H, rho]``: this sign reproduces the reduced
    equations used everywhere else (equivalently, ``H`` enters with the
    opposite overall sign to the usual ``-i[H, rho]`` convention).
    """
    eye = np.eye(4)
    return 1j * (np.kron(H, eye) - np.kron(eye, H.T)) + _dissipator(gamma)


def steady_state_lindblad(omega_p, omega_s, omega_c, omega_d, delta, gamma) -> DensityMatrix4:
    H = hamiltonian(omega_p, omega_s, omega_c, omega_d, delta)
    L = liouvillian(H, gamma)
    _, s, vh = np.linalg.svd(L)
    if s[-2] - s[-1] < _GAP_MIN:
        raise NonUniqueSteadyState(
            f"Liouvillian null space is degenerate (singular values {s[-2]:.3g}, {s[-1]:.3g})"
        )
    rho = vh[-1].conj().reshape(4, 4)
    rho = rho / np.trace(rho)
    rho = 0.5 * (rho + rho.conj().T)
    residual = float(np.linalg.norm(L @ rho.reshape(-1)))
    return DensityMatrix4(rho, residual)

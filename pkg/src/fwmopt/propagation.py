"""Spatial propagation of the probe and signal fields through the medium.

The fields obey

    d p / dz = i (alpha / 2) rho31
    d s / dz = -i kappa s + i (alpha / 2) rho41

with the coherences supplied by one of three backends. For the two linear
backends this reduces to ``i d/dz (p, s) = (M(z) + kappa e_ss) (p, s)`` and is
integrated by a compiled RK4 kernel; the full master-equation backend is
nonlinear in the fields and is stepped in Python.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import bloch
from ._kernels import rk4_final_batch, rk4_trajectory
from .analytic import zeta
from .core import DegenerateCoupling, MediumParams, MismatchSpec, StepSizeNotConverged, validate_params
from .waveforms import CouplingProfile, DetuningWaveform, coupling_at, theta_at


class Backend(str, enum.Enum):
    MATRIX = "matrix"
    REDUCED = "reduced"
    LINDBLAD = "lindblad"


@dataclass(frozen=True)
class SolverOptions:
    steps: int = 4096
    backend: Backend = Backend.MATRIX
    richardson_check: bool = True
    richardson_tol: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "backend", Backend(self.backend))
        if int(self.steps) != self.steps or self.steps < 16:
            raise ValueError(f"steps must be an integer >= 16, got {self.steps!r}")


@dataclass(frozen=True)
class PropagationResult:
    """Sampled fields; powers are normalised to the input probe power."""

    z_grid: np.ndarray
    omega_p: np.ndarray
    omega_s: np.ndarray
    omega_p0: float
    probe_power: np.ndarray = field(init=False)
    signal_power: np.ndarray = field(init=False)

    def __post_init__(self):
        ref = abs(self.omega_p0) ** 2
        object.__setattr__(self, "probe_power", np.abs(self.omega_p) ** 2 / ref)
        object.__setattr__(self, "signal_power", np.abs(self.omega_s) ** 2 / ref)

    @property
    def ce(self) -> float:
        return float(self.signal_power[-1])

    @property
    def loss(self) -> float:
        return float(1.0 - self.probe_power[-1] - self.signal_power[-1])

    @property
    def total_power(self) -> np.ndarray:
        return self.probe_power + self.signal_power


def fine_grid(steps: int) -> np.ndarray:
    """Nodes and midpoints of ``steps`` equal RK4 steps on [0, 1]."""
    return np.linspace(0.0, 1.0, 2 * steps + 1)


def _check_backend(params: MediumParams, backend: Backend) -> None:
    if backend is Backend.MATRIX and params.gamma > 0:
        raise ValueError(
            "the matrix backend has no dephasing; use the reduced or lindblad "
            f"backend for gamma={params.gamma}"
        )


def matrix_entries(params: MediumParams, coupling: CouplingProfile, delta, z, backend: Backend):
    """Entries of ``M(z)`` (without the kappa shift) on grid ``z``.

    ``delta`` may have shape ``(len(z),)`` or ``(batch, len(z))``.
    """
    alpha = params.alpha
    if backend is Backend.MATRIX:
        th = theta_at(coupling, z)
        zt = zeta(th, delta, alpha)
        s, c = np.sin(th), np.cos(th)
        off = -zt * s * c
        return zt * s * s, off, off, zt * c * c
    if backend is Backend.REDUCED:
        oc, od = coupling_at(coupling, z)
        r31p, r31s, r41p, r41s = bloch.reduced_response(oc, od, delta, params.gamma)
        g = -0.5 * alpha * bloch.CALIBRATION
        shape = np.broadcast(r31p, np.asarray(delta)).shape
        return tuple(np.broadcast_to(g * r, shape) for r in (r31p, r31s, r41p, r41s))
    raise ValueError(f"backend {backend} has no linear matrix form")


def _as_rows(entries):
    return tuple(np.ascontiguousarray(np.atleast_2d(e), dtype=np.complex128) for e in entries)


def _initial(params, initial):
    if initial is None:
        return complex(params.omega_p0), 0j
    p0, s0 = initial
    return complex(p0), complex(s0)


def _lindblad_trajectory(params, coupling, detuning, kappa, steps, p0, s0):
    z = fine_grid(steps)
    oc, od = coupling_at(coupling, z)
    dl = detuning(z)
    if np.any((oc == 0) & (od == 0)):
        raise DegenerateCoupling("both coupling fields vanish")
    g = 0.5 * params.alpha * bloch.CALIBRATION

    def rhs(i, y):
        rho = bloch.steady_state_lindblad(y[0], y[1], oc[i], od[i], dl[i], params.gamma)
        return np.array([1j * g * rho.rho31, -1j * kappa * y[1] + 1j * g * rho.rho41])

    h = 1.0 / steps
    out = np.empty((steps + 1, 2), dtype=complex)
    y = np.array([p0, s0], dtype=complex)
    out[0] = y
    for i in range(steps):
        k1 = rhs(2 * i, y)
        k2 = rhs(2 * i + 1, y + 0.5 * h * k1)
        k3 = rhs(2 * i + 1, y + 0.5 * h * k2)
        k4 = rhs(2 * i + 2, y + h * k3)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i + 1] = y
    return out


def _trajectory(params, coupling, detuning, kappa, steps, backend, p0, s0):
    if backend is Backend.LINDBLAD:
        return _lindblad_trajectory(params, coupling, detuning, kappa, steps, p0, s0)
    z = fine_grid(steps)
    m = _as_rows(matrix_entries(params, coupling, detuning(z), z, backend))
    return rk4_trajectory(m[0][0], m[1][0], m[2][0], m[3][0], float(kappa), p0, s0)


def propagate(
    params: MediumParams,
    coupling: CouplingProfile,
    detuning: DetuningWaveform,
    mismatch: MismatchSpec | float = 0.0,
    opts: SolverOptions | None = None,
    initial=None,
) -> PropagationResult:
    """Integrate the fields from z=0 to z=1.

    ``initial`` overrides the default boundary values ``(omega_p0, 0)``;
    powers are always normalised by ``omega_p0**2``.
    """
    opts = opts or SolverOptions()
    validate_params(params)
    _check_backend(params, opts.backend)
    kappa = mismatch.kappa if isinstance(mismatch, MismatchSpec) else float(mismatch)
    p0, s0 = _initial(params, initial)
    traj = _trajectory(params, coupling, detuning, kappa, opts.steps, opts.backend, p0, s0)
    result = PropagationResult(np.linspace(0.0, 1.0, opts.steps + 1), traj[:, 0], traj[:, 1], params.omega_p0)
    if opts.richardson_check:
        fine = _trajectory(params, coupling, detuning, kappa, 2 * opts.steps, opts.backend, p0, s0)
        ce_fine = abs(fine[-1, 1]) ** 2 / abs(params.omega_p0) ** 2
        if abs(ce_fine - result.ce) > opts.richardson_tol:
            raise StepSizeNotConverged(
                f"CE changed by {abs(ce_fine - result.ce):.3g} on halving the step "
                f"(steps={opts.steps})"
            )
    return result


def conversion_efficiency(result: PropagationResult) -> float:
    return result.ce


def batch_ce(params, coupling, delta_grid, kappas, opts: SolverOptions) -> np.ndarray:
    """CE for many detuning samples at once.

    ``delta_grid`` has shape ``(batch, 2 * opts.steps + 1)`` on :func:`fine_grid`.
    Returns an array of shape ``(batch, len(kappas))``. No Richardson check.
    """
    _check_backend(params, opts.backend)
    z = fine_grid(opts.steps)
    m = _as_rows(matrix_entries(params, coupling, np.atleast_2d(delta_grid), z, opts.backend))
    out = rk4_final_batch(*m, np.asarray(kappas, dtype=float), complex(params.omega_p0), 0j)
    return np.abs(out[:, :, 1]) ** 2 / params.omega_p0**2


def ce_sweep(params, coupling, detuning, kappa_list, opts: SolverOptions | None = None):
    """CE at every kappa in ``kappa_list``, returned as ``[(kappa, ce), ...]`` in input order."""
    opts = opts or SolverOptions()
    kappas = [float(k) for k in kappa_list]
    if not kappas:
        raise ValueError("kappa_list is empty")
    validate_params(params)
    _check_backend(params, opts.backend)
    if opts.backend is Backend.LINDBLAD:
        return [(k, propagate(params, coupling, detuning, k, opts).ce) for k in kappas]

    def run(steps):
        z = fine_grid(steps)
        return batch_ce(params, coupling, detuning(z)[None, :], kappas, SolverOptions(steps, opts.backend, False))[0]

    ce = run(opts.steps)
    if opts.richardson_check:
        err = np.max(np.abs(run(2 * opts.steps) - ce))
        if err > opts.richardson_tol:
            raise StepSizeNotConverged(f"sweep CE changed by {err:.3g} on halving the step")
    return list(zip(kappas, (float(c) for c in ce)))

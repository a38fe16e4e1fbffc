"""Compiled fixed-step RK4 for ``d/dz (p, s) = -i (M(z) + kappa e_ss) (p, s)``.

Matrix entries are sampled on a grid of ``2n + 1`` points (nodes and
midpoints of ``n`` steps over [0, 1]).
"""

import numba
import numpy as np

# The bundled TBB is too old for numba; prefer OpenMP.
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


@numba.njit(cache=True, inline="always")
def _f(a, b, c, d, p, s):
    return -1j * (a * p + b * s), -1j * (c * p + d * s)


@numba.njit(cache=True)
def _step(m11, m12, m21, m22, kappa, i, h, p, s):
    i0, i1, i2 = 2 * i, 2 * i + 1, 2 * i + 2
    k1p, k1s = _f(m11[i0], m12[i0], m21[i0], m22[i0] + kappa, p, s)
    k2p, k2s = _f(m11[i1], m12[i1], m21[i1], m22[i1] + kappa, p + 0.5 * h * k1p, s + 0.5 * h * k1s)
    k3p, k3s = _f(m11[i1], m12[i1], m21[i1], m22[i1] + kappa, p + 0.5 * h * k2p, s + 0.5 * h * k2s)
    k4p, k4s = _f(m11[i2], m12[i2], m21[i2], m22[i2] + kappa, p + h * k3p, s + h * k3s)
    p = p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    s = s + h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
    return p, s


@numba.njit(cache=True)
def rk4_trajectory(m11, m12, m21, m22, kappa, p0, s0):
    n = (m11.size - 1) // 2
    h = 1.0 / n
    out = np.empty((n + 1, 2), dtype=np.complex128)
    p, s = p0, s0
    out[0, 0], out[0, 1] = p, s
    for i in range(n):
        p, s = _step(m11, m12, m21, m22, kappa, i, h, p, s)
        out[i + 1, 0], out[i + 1, 1] = p, s
    return out


@numba.njit(cache=True, parallel=True)
def rk4_final_batch(m11, m12, m21, m22, kappas, p0, s0):
    """Final fields for every (row, kappa) pair; rows share no state."""
    nb = m11.shape[0]
    nk = kappas.size
    n = (m11.shape[1] - 1) // 2
    h = 1.0 / n
    out = np.empty((nb, nk, 2), dtype=np.complex128)
    for job in numba.prange(nb * nk):
        b = job // nk
        k = job % nk
        p, s = p0, s0
        for i in range(n):
            p, s = _step(m11[b], m12[b], m21[b], m22[b], kappas[k], i, h, p, s)
        out[b, k, 0] = p
        out[b, k, 1] = s
    return out

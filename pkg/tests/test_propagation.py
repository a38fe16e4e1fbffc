import math

import numpy as np
import pytest

from fwmopt.analytic import ce_closed_form, ce_matched_max, optimal_constants
from fwmopt.core import DegenerateCoupling, MediumParams, MismatchSpec, StepSizeNotConverged, mode_basis
from fwmopt.propagation import (
    Backend,
    PropagationResult,
    SolverOptions,
    batch_ce,
    ce_sweep,
    conversion_efficiency,
    fine_grid,
    propagate,
)
from fwmopt.waveforms import (
    FIG3_FOURIER,
    ConstantAmplitudes,
    ConstantDetuning,
    ConstantRatio,
    LinearRamp,
    FourierDetuning,
)

MATRIX = SolverOptions(1024, Backend.MATRIX, richardson_check=False)
REDUCED = SolverOptions(1024, Backend.REDUCED, richardson_check=False)


def _const(theta, delta, alpha, kappa, opts=MATRIX, **kw):
    return propagate(MediumParams(alpha, 0.0, 0.03), ConstantRatio(theta), ConstantDetuning(delta), kappa, opts, **kw)


def test_solver_options_validation():
    with pytest.raises(ValueError):
        SolverOptions(8)
    with pytest.raises(ValueError):
        SolverOptions(100.5)
    assert SolverOptions(backend="reduced").backend is Backend.REDUCED


def test_result_invariants():
    th, d = optimal_constants(2.0, 200)
    r = _const(th, d, 200, 2.0)
    assert r.probe_power[0] == 1 and r.signal_power[0] == 0
    assert 0 <= r.ce <= 1 + 1e-9 and -1e-9 <= r.loss <= 1
    assert conversion_efficiency(r) == r.signal_power[-1]
    assert len(r.z_grid) == MATRIX.steps + 1


def test_matched_protocol_one_equals_formula_oracle():
    th, d = optimal_constants(0, 200)
    r = propagate(MediumParams(200, 0, 0.03), ConstantRatio(th), ConstantDetuning(d), 0.0, SolverOptions(4096))
    assert r.ce == pytest.approx(ce_closed_form(th, d, 200, 0), abs=1e-6)
    assert r.ce == pytest.approx(0.908, abs=1e-3)


@pytest.mark.parametrize("seed", range(5))
def test_ode_matches_closed_form(seed):
    rng = np.random.default_rng(seed)
    for _ in range(8):
        th, d, a, k = rng.uniform(0.05, 1.5), rng.uniform(-50, 150), rng.uniform(10, 300), rng.uniform(0, 15)
        ce = _const(th, d, a, k, SolverOptions(2048, Backend.MATRIX, False)).ce
        ref = ce_closed_form(th, d, a, k)
        assert abs(ce - ref) <= 1e-6 * max(ref, 1e-3), (th, d, a, k)


@pytest.mark.parametrize("seed", range(4))
def test_norm_monotone(seed):
    rng = np.random.default_rng(100 + seed)
    for _ in range(5):
        c0, d0 = rng.uniform(0.2, 3, size=2)
        w = FourierDetuning.from_coefficients(rng.uniform(-60, 60, size=7))
        r = propagate(MediumParams(rng.uniform(10, 300), 0, 0.03), LinearRamp(c0, d0), w, rng.uniform(0, 15), MATRIX)
        assert np.diff(r.total_power).max() <= 1e-9


@pytest.mark.parametrize("theta", [0.2, math.pi / 4, 1.3])
def test_dark_input_is_lossless(theta):
    r = _const(theta, 17.0, 200, 0.0, initial=tuple(0.03 * mode_basis(theta).dark))
    assert r.total_power[-1] == pytest.approx(1.0, abs=1e-8)
    assert r.ce == pytest.approx(math.sin(theta) ** 2, abs=1e-8)


def test_backends_agree_without_dephasing():
    rng = np.random.default_rng(7)
    opts_m = SolverOptions(512, Backend.MATRIX, False)
    opts_r = SolverOptions(512, Backend.REDUCED, False)
    for _ in range(50):
        p = MediumParams(rng.uniform(10, 300), 0.0, 0.03)
        cpl = LinearRamp(*rng.uniform(0.2, 3, size=2))
        w = FourierDetuning.from_coefficients(rng.uniform(-40, 40, size=7))
        k = rng.uniform(0, 10)
        a = propagate(p, cpl, w, k, opts_m).ce
        b = propagate(p, cpl, w, k, opts_r).ce
        assert abs(a - b) <= 1e-6


def test_convergence_order():
    th, d = optimal_constants(0, 200)
    ref = ce_closed_form(th, d, 200, 0)
    errs = [abs(_const(th, d, 200, 0, SolverOptions(n, Backend.MATRIX, False)).ce - ref) for n in (64, 128, 256, 512)]
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 3.5, orders


def test_richardson_failure_raises():
    th, d = optimal_constants(0, 200)
    with pytest.raises(StepSizeNotConverged):
        _const(th, d, 200, 0, SolverOptions(16, Backend.MATRIX, True, 1e-9))
    with pytest.raises(StepSizeNotConverged):
        ce_sweep(MediumParams(200, 0, 0.03), ConstantRatio(th), ConstantDetuning(d), [0, 5],
                 SolverOptions(16, Backend.MATRIX, True, 1e-9))


def test_matrix_backend_rejects_dephasing():
    with pytest.raises(ValueError, match="dephasing"):
        propagate(MediumParams(200, 1e-4, 0.03), LinearRamp(), ConstantDetuning(0), 0, SolverOptions(64))


class _Gap:
    """Both couplings switch off at the middle of the medium."""

    def amplitudes(self, z):
        a = np.abs(np.asarray(z, dtype=float) - 0.5)
        return a, a


@pytest.mark.parametrize("opts", [MATRIX, SolverOptions(16, Backend.LINDBLAD, False)])
def test_degenerate_coupling_raises(opts):
    with pytest.raises(DegenerateCoupling):
        propagate(MediumParams(200, 0, 0.03), _Gap(), ConstantDetuning(0), 0, opts)


def test_mismatch_spec_accepted():
    th, d = optimal_constants(3, 200)
    assert _const(th, d, 200, MismatchSpec(3.0)).ce == _const(th, d, 200, 3.0).ce


def test_ce_sweep_order_and_determinism():
    th, d = math.pi / 4, 200 / (2 * math.pi)
    args = (MediumParams(200, 0, 0.03), ConstantRatio(th), ConstantDetuning(d))
    out = ce_sweep(*args, [5, 0, 5, 2.5], MATRIX)
    assert [k for k, _ in out] == [5, 0, 5, 2.5]
    assert out[0][1] == out[2][1]
    for k, ce in out:
        assert ce == pytest.approx(ce_closed_form(th, d, 200, k), abs=1e-6)
    assert out == ce_sweep(*args, [5, 0, 5, 2.5], MATRIX)
    with pytest.raises(ValueError):
        ce_sweep(*args, [], MATRIX)


def test_ce_sweep_figure_endpoints():
    th, d = math.pi / 4, 200 / (2 * math.pi)
    out = ce_sweep(MediumParams(200, 0, 0.03), ConstantRatio(th), ConstantDetuning(d), [0, 5])
    assert out[0][1] == pytest.approx(0.908, abs=0.005)
    assert out[1][1] == pytest.approx(0.01, abs=0.005)
    th, d = optimal_constants(5, 200)
    assert ce_sweep(MediumParams(200, 0, 0.03), ConstantRatio(th), ConstantDetuning(d), [5])[0][1] == pytest.approx(
        0.72, abs=0.02
    )


def test_batch_matches_propagate():
    z = fine_grid(REDUCED.steps)
    p = MediumParams(200, 1e-4, 0.03)
    delta = np.stack([FIG3_FOURIER(z), np.zeros_like(z)])
    ce = batch_ce(p, LinearRamp(), delta, [0.0, 5.0], REDUCED)
    assert ce.shape == (2, 2)
    assert ce[0, 1] == propagate(p, LinearRamp(), FIG3_FOURIER, 5.0, REDUCED).ce
    assert ce[1, 0] == propagate(p, LinearRamp(), ConstantDetuning(0), 0.0, REDUCED).ce


def test_protocol_two_and_three():
    p = MediumParams(200, 1e-4, 0.03)
    opts = SolverOptions(4096, Backend.REDUCED)
    assert propagate(p, LinearRamp(), ConstantDetuning(0), 5, opts).ce == pytest.approx(0.876, abs=0.02)
    assert propagate(p, LinearRamp(), FIG3_FOURIER, 5, opts).ce == pytest.approx(0.893, abs=0.02)
    p50 = MediumParams(50, 1e-4, 0.03)
    assert propagate(p50, LinearRamp(), ConstantDetuning(0), 15, opts).ce == pytest.approx(0.132, abs=0.015)


def test_protocol_one_large_mismatch():
    th, d = optimal_constants(15, 50)
    r = propagate(MediumParams(50, 0, 0.03), ConstantAmplitudes(1.5 / math.tan(th), 1.5), ConstantDetuning(d), 15)
    assert r.ce == pytest.approx(0.019, abs=0.005)


def test_large_alpha_loss_vanishes():
    gaps = []
    for a in (50, 100, 200, 400):
        th, d = optimal_constants(0, a)
        gaps.append(1 - _const(th, d, a, 0, SolverOptions(4096, Backend.MATRIX, False)).ce / ce_matched_max(a))
    assert all(abs(b) < abs(a) for a, b in zip(gaps, gaps[1:]))


def test_lindblad_backend_close_to_reduced():
    p = MediumParams(200, 0.0, 0.03)
    cpl = ConstantAmplitudes(1.5, 1.5)
    th, d = math.pi / 4, 200 / (2 * math.pi)
    lind = propagate(p, cpl, ConstantDetuning(d), 2.0, SolverOptions(64, Backend.LINDBLAD, False)).ce
    assert lind == pytest.approx(ce_closed_form(th, d, 200, 2.0), abs=0.01)


def test_result_powers_normalised():
    r = PropagationResult(np.array([0, 1.0]), np.array([0.5, 0.3]), np.array([0, 0.4j]), 0.5)
    np.testing.assert_allclose(r.probe_power, [1, 0.36])
    assert r.ce == pytest.approx(0.64)
    assert r.loss == pytest.approx(0.0)

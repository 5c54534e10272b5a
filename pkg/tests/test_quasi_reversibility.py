import math

import numpy as np
import pytest

from fracback.errors import ParameterValidationError
from fracback.forward import CoefficientSpec, ProblemInstance, PseudospectralMap, forward_solve, get_nonlinearity
from fracback.noise import CoefficientObservation, NoiseSpec, ObservedData
from fracback.quasi_reversibility import (
    QRParams,
    QuasiReversibilitySolver,
    choose_Q_n,
    data_approx_final,
    data_approx_source,
    evaluate_qr_bounds,
    head_tail_apply,
    qr_error_at_zero,
    smoothness_constant,
    solve_qr,
    solve_t_n,
)
from fracback.spectral import NormSpec, SpectralField, frac_laplacian_apply, norm, synthesize


def make_instance(nonlinearity="zero", T=1.0, a0=2.0, beta=1.0, modes=None, cap=8):
    return ProblemInstance(
        beta=beta,
        T=T,
        coefficient=CoefficientSpec(),
        a0=a0,
        nonlinearity=get_nonlinearity(nonlinearity),
        initial_state=SpectralField.from_modes(modes or {1: 1.0}, cap=cap),
    )


def observation(final: SpectralField, n: int, grid: np.ndarray, path=None, a0=2.0):
    path = np.ones(grid.size) if path is None else path
    coefficient = CoefficientObservation(
        path=path, within_bounds=bool(np.all(path > 0) and np.all(path <= a0)), b0=float(np.min(a0 - path))
    )
    return ObservedData(grid=grid, final_samples=synthesize(final, n), source_paths=np.zeros((grid.size, n)),
                        coefficient=coefficient)


def test_data_approximations():
    field = data_approx_final(synthesize(SpectralField.mode(2), 8), 4, 8)
    assert field.cap == 4
    assert np.allclose(field.coeffs, SpectralField.mode(2, cap=4).coeffs, atol=1e-12)
    grid = np.linspace(0.0, 1.0, 5)
    paths = np.tile(synthesize(SpectralField.mode(1), 8).values, (grid.size, 1))
    source = data_approx_source(paths, 3, 8, grid)
    assert source.shape == (5, 4)
    assert np.allclose(source[:, 1], 1.0)
    with pytest.raises(ParameterValidationError):
        data_approx_source(paths[:, :4], 3, 8, grid)


def test_tail_threshold_and_head_tail_known_values():
    params = QRParams(M_n=3, n=16, a0=1.0)
    tail = head_tail_apply(SpectralField.mode(2, cap=6), "tail", params, 1.0)
    head = head_tail_apply(SpectralField.mode(2, cap=6), "head", params, 1.0)
    assert np.all(tail.coeffs == 0.0)
    assert head.coeffs[2] == pytest.approx(4.0)
    tail = head_tail_apply(SpectralField.mode(5, cap=6), "tail", params, 1.0)
    assert tail.coeffs[5] == pytest.approx(25.0)
    assert np.all(head_tail_apply(SpectralField.mode(5, cap=6), "head", params, 1.0).coeffs == 0.0)
    assert QRParams(M_n=3, n=16, a0=4.0).tail_threshold(0.5) == pytest.approx(0.75)
    with pytest.raises(ParameterValidationError):
        head_tail_apply(SpectralField.mode(1), "middle", params, 1.0)


@pytest.mark.parametrize("a0, beta, M", [(1.0, 1.0, 3), (1.5, 1.0, 4), (2.0, 0.75, 5), (1.2, 1.5, 2), (3.0, 0.6, 6)])
def test_operator_estimates(a0, beta, M):
    params = QRParams(M_n=M, n=64, a0=a0)
    T = 0.5
    rng = np.random.default_rng(M)
    for _ in range(100):
        field = SpectralField(rng.standard_normal(9) * np.exp(-np.arange(9.0)))
        head = head_tail_apply(field, "head", params, beta)
        tail = head_tail_apply(field, "tail", params, beta)
        combined = tail.scaled(a0) + head
        assert np.allclose(combined.coeffs, frac_laplacian_apply(field, beta).scaled(a0).coeffs, rtol=1e-12)
        l2 = norm(field, NormSpec.l2())
        assert norm(head, NormSpec.l2()) <= M ** (2.0 * beta) * l2 * (1.0 + 1e-12)
        gevrey = norm(field, NormSpec.v_tilde(T, a0, beta))
        assert a0 * norm(tail, NormSpec.l2()) <= a0 * math.exp(-T * M ** (2.0 * beta)) * gevrey * (1.0 + 1e-12)


def test_t_n_known_values():
    t_n = solve_t_n(10, 1.0, 1.0)
    assert t_n == pytest.approx(0.17455, abs=1e-5)
    assert abs(math.exp(-10.0 * t_n) - t_n) <= 1e-12
    assert t_n <= math.sqrt(0.1)
    assert solve_t_n(1, 1.0, 1.0) == pytest.approx(0.567143, abs=1e-6)
    with pytest.raises(ParameterValidationError):
        solve_t_n(1, 1.0, 0.1)


def test_choose_Q_n_known_values():
    assert choose_Q_n(10**6, 1.0, lambda q: q) == pytest.approx(1.3129, abs=1e-4)
    cubic = get_nonlinearity("cubic")
    assert choose_Q_n(10**6, 0.1, cubic.local_lipschitz) == pytest.approx(2.1702, abs=1e-4)
    assert math.isinf(choose_Q_n(100, 1.0, lambda q: 1.0))


def test_choose_Q_n_increases_with_n():
    profile = get_nonlinearity("cubic").local_lipschitz
    levels = [choose_Q_n(n, 0.2, profile) for n in (64, 256, 1024, 4096)]
    assert levels == sorted(levels)


def test_choose_Q_n_with_tight_budget_uses_minimal_constant():
    Q = choose_Q_n(3, 1.0, get_nonlinearity("cubic").local_lipschitz)
    assert Q == pytest.approx(math.sqrt(2.0 / 3.0), abs=1e-6)


def test_smoothness_constant():
    assert smoothness_constant(16.0, 2.0) == pytest.approx(5.2494, abs=1e-3)
    with pytest.raises(ParameterValidationError):
        smoothness_constant(1.0, 1.0)


def test_linear_closed_form():
    instance = make_instance(a0=2.0, modes={1: 1.0, 5: 1.0})
    grid = np.linspace(0.0, 1.0, 101)
    observed = observation(SpectralField.from_modes({1: 1.0, 5: 1.0}), 16, grid)
    solution = solve_qr(observed, instance, QRParams(M_n=5, n=16, a0=2.0), grid, cap=8)
    assert solution.diagnostics.iterations == 1
    assert solution.diagnostics.threshold == pytest.approx(5.0 / math.sqrt(2.0))
    assert solution.coefficients[0, 1] == pytest.approx(math.e, rel=1e-9)
    assert solution.coefficients[0, 5] == pytest.approx(math.exp(-25.0), rel=1e-9)
    assert np.allclose(solution.coefficients[-1, :6], [0.0, 1.0, 0.0, 0.0, 0.0, 1.0], atol=1e-12)


def test_data_beyond_cutoff_is_discarded():
    instance = make_instance(a0=2.0)
    grid = np.linspace(0.0, 1.0, 11)
    observed = observation(SpectralField.from_modes({1: 1.0, 5: 1.0}), 16, grid)
    solution = solve_qr(observed, instance, QRParams(M_n=3, n=16, a0=2.0), grid, cap=8)
    assert np.allclose(solution.coefficients[:, 4:], 0.0)
    assert solution.coefficients[0, 1] == pytest.approx(math.e, rel=1e-9)


def test_zero_data_gives_zero():
    instance = make_instance("sin", T=0.5, a0=1.5)
    grid = np.linspace(0.0, 0.5, 51)
    observed = observation(SpectralField.zeros(4), 16, grid, a0=1.5)
    solution = solve_qr(observed, instance, QRParams(M_n=3, n=16, a0=1.5), grid, cap=8)
    assert np.allclose(solution.coefficients, 0.0)


def test_tail_modes_stay_bounded():
    instance = make_instance("sin", T=0.2, a0=1.5)
    grid = np.linspace(0.0, 0.2, 101)
    final = SpectralField.from_modes({1: 0.5, 2: 0.3, 3: 0.4, 4: 0.2})
    observed = observation(final, 16, grid, a0=1.5)
    params = QRParams(M_n=4, n=16, a0=1.5)
    solver = QuasiReversibilitySolver(instance, params, grid, cap=8)
    solution = solver.solve(observed)
    assert solver.defect(solution, observed) <= 1e-8

    forcing = PseudospectralMap(instance.nonlinearity, 8)(solution.coefficients)
    tail = ~solver.head
    sup_forcing = np.max(np.abs(forcing[:, tail]), axis=0)
    final_coeffs = final.padded(8).coeffs[tail]
    assert np.all(np.abs(solution.coefficients[:, tail]) <= np.abs(final_coeffs) + 0.2 * sup_forcing + 1e-9)


def test_perturbed_coefficient_is_reported():
    instance = make_instance(T=0.1, a0=1.0)
    grid = np.linspace(0.0, 0.1, 11)
    path = np.ones(grid.size)
    path[5] = 1.2
    observed = observation(SpectralField.mode(1), 16, grid, path=path, a0=1.0)
    solution = solve_qr(observed, instance, QRParams(M_n=2, n=16, a0=1.0), grid, cap=4)
    assert not solution.diagnostics.coefficient_within_bounds
    assert solution.diagnostics.b0 == pytest.approx(-0.2)


def test_error_at_t_n():
    instance = make_instance(T=1.0, a0=1.5, modes={1: 1.0}, cap=4)
    grid = np.linspace(0.0, 1.0, 1001)
    truth = forward_solve(instance, grid, 4)
    observed = observation(truth.final, 16, grid, a0=1.5)
    solution = solve_qr(observed, instance, QRParams(M_n=3, n=16, a0=1.5), grid, cap=4)
    assert solution.t_n == pytest.approx(solve_t_n(3, 1.0, 1.0))
    # head modes are propagated exactly, so only interpolation and the time offset remain
    expected = math.exp(-solution.t_n)
    assert qr_error_at_zero(solution, instance.initial_state) == pytest.approx(1.0 - expected, abs=1e-6)


def test_t_n_undefined_for_small_cutoff():
    instance = make_instance(T=0.1, a0=1.0, cap=4)
    grid = np.linspace(0.0, 0.1, 11)
    observed = observation(SpectralField.mode(1), 16, grid, a0=1.0)
    solution = solve_qr(observed, instance, QRParams(M_n=1, n=16, a0=1.0), grid, cap=4)
    assert solution.t_n is None
    with pytest.raises(ParameterValidationError):
        qr_error_at_zero(solution, instance.initial_state)


def test_bounds():
    instance = make_instance("sin", T=0.2, a0=1.5, modes={1: 1.0, 2: 0.5}, cap=8)
    truth = forward_solve(instance, np.linspace(0.0, 0.2, 101), 8)
    noise = NoiseSpec(sigma=0.05, v_max=0.1, eps=0.01)
    coarse = evaluate_qr_bounds(truth, instance, QRParams(M_n=3, n=64, a0=1.5, b0=0.3), noise)
    fine = evaluate_qr_bounds(truth, instance, QRParams(M_n=3, n=256, a0=1.5, b0=0.3), noise)
    assert fine.phi <= coarse.phi
    assert coarse.pi is not None and len(coarse.h_beta_bound) == truth.times.size
    assert coarse.l2_bound[-1] == pytest.approx(
        math.exp((2.0 + 4.0) * 0.2) * math.exp(-2.0 * 0.2 * 3.0) * coarse.phi, rel=1e-12
    )
    assert coarse.data_final_bound > 0.0
    assert coarse.data_source_bound >= 0.0

    no_margin = evaluate_qr_bounds(truth, instance, QRParams(M_n=3, n=64, a0=1.5), noise, b0=-0.1)
    assert no_margin.pi is None and no_margin.h_beta_bound is None


def test_h2beta_constant_weights_modes_by_p_to_8_beta():
    instance = make_instance("zero", T=0.2, a0=1.5, modes={2: 1.0}, cap=8)
    truth = forward_solve(instance, np.linspace(0.0, 0.2, 41), 8)
    bounds = evaluate_qr_bounds(truth, instance, QRParams(M_n=3, n=64, a0=1.5), NoiseSpec(sigma=0.05, v_max=0.1))
    assert bounds.constants["u_h2beta_sq"] == pytest.approx(2.0**8, rel=1e-9)


def test_bounds_need_lipschitz_data():
    instance = make_instance("cubic", T=0.1, a0=1.5, modes={1: 0.5}, cap=8)
    truth = forward_solve(instance, np.linspace(0.0, 0.1, 51), 8)
    with pytest.raises(ParameterValidationError):
        evaluate_qr_bounds(truth, instance, QRParams(M_n=3, n=64, a0=1.5), NoiseSpec())
    clamped = evaluate_qr_bounds(truth, instance, QRParams(M_n=3, n=64, a0=1.5, Q_n=1.0), NoiseSpec())
    assert clamped.constants["K"] == pytest.approx(2.0)

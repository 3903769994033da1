"""Tests for the time-domain pipeline: the drive matrix, the step-doubled
propagator tables, and the time-domain pair amplitude, cross-checked
against an independent fine integrator and against the frequency-domain
pipeline."""

import numpy as np
import pytest

from ringsfwm.errors import AccuracyError
from ringsfwm.model import RingSystem
from ringsfwm.numerics import SpectralGrid, TimeGrid, suggested_half_width
from ringsfwm.perturbative import (
    jsi_closed_form,
    pair_amplitude,
    pump_pair_function,
    response_kernels,
)
from ringsfwm.propagator import (
    build_drive_matrix,
    pair_amplitude_time_domain,
    propagator_between,
    solve_propagator,
)
from ringsfwm.pump import PumpSpec, pump_time_evolution

V = 1.5e8
SIGMA = 100e-12


def make_system(**overrides):
    kwargs = dict(
        omega_P=1.216e15, omega_S=1.216e15, omega_I=1.216e15,
        v_P=V, v_S=V, v_I=V,
        Gamma_P=1e10, Gamma_S=1e10, Gamma_I=1e10,
        M_P=1e10, M_S=1e10, M_I=1e10,
        lambda_fwm=1.0, eta_spm=0.5, zeta_xpm=2.0)
    kwargs.update(overrides)
    return RingSystem.from_rates(**kwargs)


def make_pump(sys, sigma=SIGMA, amplitude=1.0):
    spec = PumpSpec(kind="gaussian", amplitude=amplitude, duration=sigma)
    return pump_time_evolution(sys, spec)


class TestDriveMatrix:
    def test_diagonal_without_pump(self):
        sys = make_system()
        pump = make_pump(sys, amplitude=0.0)
        M = build_drive_matrix(sys, pump)
        m = M(0.0)
        assert m[0, 0] == -sys.Gamma_bar("S")
        assert m[1, 1] == -sys.Gamma_bar("I")
        assert m[0, 1] == 0 and m[1, 0] == 0

    def test_entries_at_pump_peak(self):
        sys = make_system()
        pump = make_pump(sys)
        M = build_drive_matrix(sys, pump)
        t = 0.0
        b = M.beta(t)
        m = M(t)
        assert m[0, 0] == pytest.approx(
            -sys.Gamma_bar("S") - 2.0j * abs(b) ** 2, rel=1e-12)
        assert abs(m[0, 1]) == pytest.approx(abs(b) ** 2, rel=1e-12)
        assert m[1, 0] == pytest.approx(1j * np.conj(b) ** 2, rel=1e-12)

    def test_determinant_hand_oracle(self):
        # det M = (Gbar_S + i zeta |b|^2)(Gbar_I - i zeta* |b|^2)
        #         - |lambda|^2 |b|^4   for real zeta and the phases above
        sys = make_system()
        pump = make_pump(sys)
        M = build_drive_matrix(sys, pump)
        t = 0.3 * SIGMA
        b2 = abs(M.beta(t)) ** 2
        gs, gi = sys.Gamma_bar("S"), sys.Gamma_bar("I")
        expected = ((gs + 2.0j * b2) * (gi - 2.0j * b2)) - b2 ** 2
        m = M(t)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        assert det == pytest.approx(expected, rel=1e-12)

    def test_beta_clamped_outside_span(self):
        sys = make_system()
        pump = make_pump(sys)
        M = build_drive_matrix(sys, pump)
        assert M.beta(M.t_span[0] - 1.0) == 0
        assert M.beta(M.t_span[1] + 1.0) == 0

    def test_vectorized_times(self):
        sys = make_system()
        pump = make_pump(sys)
        M = build_drive_matrix(sys, pump)
        ts = np.linspace(-SIGMA, SIGMA, 7)
        batch = M(ts)
        assert batch.shape == (7, 2, 2)
        for i, t in enumerate(ts):
            assert np.allclose(batch[i], M(t))


class TestSolvePropagator:
    def test_identity_at_equal_times(self):
        sys = make_system()
        pump = make_pump(sys)
        M = build_drive_matrix(sys, pump)
        grid = pump.time_grid
        table = solve_propagator(M, grid)
        for n in (0, grid.n_steps // 2, grid.n_steps):
            assert np.allclose(table.propagator(n, n), np.eye(2))

    def test_lambda_zero_exponential(self):
        # with lambda = 0 and real zeta the modulus decays exactly as
        # exp(-Gbar (t - t0)); phases from |beta|^2 drop out of |G|
        sys = make_system(lambda_fwm=0.0)
        pump = make_pump(sys)
        M = build_drive_matrix(sys, pump)
        grid = pump.time_grid
        table = solve_propagator(M, grid)
        n = grid.n_steps
        g = table.propagator(n, 0)
        dt_total = grid.times[n] - grid.times[0]
        assert abs(g[0, 0]) == pytest.approx(
            np.exp(-sys.Gamma_bar("S") * dt_total), rel=1e-7)
        assert abs(g[1, 1]) == pytest.approx(
            np.exp(-sys.Gamma_bar("I") * dt_total), rel=1e-7)
        assert abs(g[0, 1]) == 0 and abs(g[1, 0]) == 0

    def test_semigroup_against_independent_integrator(self):
        # G(t2, t0) = G(t2, t1) G(t1, t0), each factor integrated
        # independently on its own fine grid
        sys = make_system()
        pump = make_pump(sys)
        M = build_drive_matrix(sys, pump)
        t0, t1, t2 = -1.5 * SIGMA, 0.2 * SIGMA, 2.0 * SIGMA
        g10 = propagator_between(M, t0, t1, n_steps=4096)
        g21 = propagator_between(M, t1, t2, n_steps=4096)
        g20 = propagator_between(M, t0, t2, n_steps=8192)
        assert np.allclose(g21 @ g10, g20, rtol=1e-9, atol=1e-12)

    def test_table_matches_independent_integrator(self):
        sys = make_system()
        pump = make_pump(sys)
        M = build_drive_matrix(sys, pump)
        grid = pump.time_grid
        table = solve_propagator(M, grid)
        n = 2 * (grid.n_steps // 3)
        oracle = propagator_between(M, grid.times[0], grid.times[n],
                                    n_steps=16384)
        assert np.allclose(table.propagator(n, 0), oracle,
                           rtol=1e-7, atol=1e-10)

    def test_halving_convergence_order(self):
        # halving dt must shrink the deviation from a fine reference by
        # about 2^4 = 16 (RK4); accept [12, 20]
        sys = make_system()
        pump = make_pump(sys)
        M = build_drive_matrix(sys, pump)
        t0, t1 = -SIGMA, SIGMA
        ref = propagator_between(M, t0, t1, n_steps=32768)
        e_coarse = np.max(np.abs(propagator_between(M, t0, t1, 64) - ref))
        e_fine = np.max(np.abs(propagator_between(M, t0, t1, 128) - ref))
        ratio = e_coarse / e_fine
        assert 12.0 < ratio < 20.0

    def test_error_estimate_is_conservative(self):
        sys = make_system()
        pump = make_pump(sys)
        M = build_drive_matrix(sys, pump)
        grid = pump.time_grid
        table = solve_propagator(M, grid)
        n = grid.n_steps
        oracle = propagator_between(M, grid.times[0], grid.times[n],
                                    n_steps=32768)
        true_err = np.max(np.abs(table.propagator(n, 0) - oracle))
        assert true_err < 10 * max(table.error_estimate, 1e-12)

    def test_tolerance_violation_raises(self):
        sys = make_system()
        pump = make_pump(sys)
        M = build_drive_matrix(sys, pump)
        coarse = TimeGrid(M.t_span[0], M.t_span[1], 32)
        with pytest.raises(AccuracyError):
            solve_propagator(M, coarse, tol=1e-14)

    def test_first_column_tables_consistency(self):
        sys = make_system()
        pump = make_pump(sys)
        M = build_drive_matrix(sys, pump)
        grid = TimeGrid(-3 * SIGMA, 3 * SIGMA, 128)
        table = solve_propagator(M, grid, tol=1e-5)
        g11, g21 = table.first_column_tables()
        for n in (1, 40, 128):
            for m in (0, n // 2, n):
                g = table.propagator(n, m)
                assert g11[n, m] == pytest.approx(g[0, 0], rel=1e-12,
                                                  abs=1e-300)
                assert g21[n, m] == pytest.approx(g[1, 0], rel=1e-12,
                                                  abs=1e-300)
        # strictly lower-triangular beyond the diagonal
        assert np.all(np.triu(g21, 1) == 0)


def spectral_grids(sys, sigma, n):
    hw = max(suggested_half_width(sys.Gamma_bar("S"), sys.v_S, sys.v_P,
                                  sigma),
             suggested_half_width(sys.Gamma_bar("I"), sys.v_I, sys.v_P,
                                  sigma))
    return SpectralGrid(hw, n), SpectralGrid(hw, n)


def time_domain_S(sys, sigma=SIGMA, n=64, n_steps_t=1024, amplitude=1.0):
    pump = make_pump(sys, sigma, amplitude)
    M = build_drive_matrix(sys, pump)
    grid = TimeGrid(M.t_span[0], M.t_span[1], n_steps_t)
    table = solve_propagator(M, grid, tol=1e-6)
    ax_s, ax_i = spectral_grids(sys, sigma, n)
    return pair_amplitude_time_domain(sys, pump, table, ax_s, ax_i)


class TestPairAmplitudeTimeDomain:
    def test_lambda_zero_gives_zero(self):
        sys = make_system(lambda_fwm=0.0)
        S = time_domain_S(sys, n=32, n_steps_t=256)
        assert np.max(np.abs(S.values)) < 1e-20

    def test_matches_perturbative_weak_pump(self):
        # weak pump: the two pipelines must agree pointwise to 1% of peak
        sys = make_system(eta_spm=0.0, zeta_xpm=0.0)
        amp = 1e-3
        S_t = time_domain_S(sys, n=64, n_steps_t=2048, amplitude=amp)
        pump = make_pump(sys, SIGMA, amp)
        ax_s, ax_i = spectral_grids(sys, SIGMA, 64)
        F = pump_pair_function(pump, sys, ax_s, ax_i)
        S_f = pair_amplitude(response_kernels(sys, F))
        peak = np.max(np.abs(S_f.values))
        assert np.max(np.abs(S_t.values - S_f.values)) < 0.01 * peak

    def test_quadratic_pump_scaling(self):
        sys = make_system(eta_spm=0.0, zeta_xpm=0.0)
        S1 = time_domain_S(sys, n=32, n_steps_t=1024, amplitude=1e-3)
        S2 = time_domain_S(sys, n=32, n_steps_t=1024, amplitude=5e-4)
        assert np.allclose(S2.values, 0.25 * S1.values, rtol=1e-6,
                           atol=1e-9 * np.max(np.abs(S1.values)))

    def test_lambda_phase_leaves_modulus(self):
        # rotating the phase of lambda rephases the pair amplitude but
        # cannot change |S| (a joint phase redefinition of the modes)
        sys_a = make_system(lambda_fwm=2.0, eta_spm=0.0, zeta_xpm=0.0)
        sys_b = make_system(lambda_fwm=2.0 * np.exp(0.7j), eta_spm=0.0,
                            zeta_xpm=0.0)
        Sa = time_domain_S(sys_a, n=32, n_steps_t=1024, amplitude=1e-3)
        Sb = time_domain_S(sys_b, n=32, n_steps_t=1024, amplitude=1e-3)
        peak = np.max(np.abs(Sa.values))
        assert np.max(np.abs(np.abs(Sa.values) - np.abs(Sb.values))) \
            < 1e-6 * peak

    def test_matches_closed_form_jsi_weak_pump(self):
        sys = make_system(eta_spm=0.0, zeta_xpm=0.0)
        amp = 1e-3
        S_t = time_domain_S(sys, n=64, n_steps_t=2048, amplitude=amp)
        pump = make_pump(sys, SIGMA, amp)
        ax_s, ax_i = spectral_grids(sys, SIGMA, 64)
        F = pump_pair_function(pump, sys, ax_s, ax_i)
        phi = jsi_closed_form(sys, F).raw.values
        peak = np.max(phi)
        assert np.max(np.abs(np.abs(S_t.values) ** 2 - phi)) < 0.02 * peak

    def test_resolution_check_flags_coarse_table(self):
        sys = make_system(eta_spm=0.0, zeta_xpm=0.0)
        pump = make_pump(sys, SIGMA, 1e-3)
        M = build_drive_matrix(sys, pump)
        grid = TimeGrid(M.t_span[0], M.t_span[1], 64)
        table = solve_propagator(M, grid, tol=1.0)
        ax_s, ax_i = spectral_grids(sys, SIGMA, 32)
        with pytest.raises(AccuracyError):
            pair_amplitude_time_domain(sys, pump, table, ax_s, ax_i,
                                       check_resolution=True,
                                       resolution_rtol=1e-6)

import numpy as np
import pytest

from plyap import (
    DiscreteBasis,
    DomainError,
    DomainOverflowError,
    GaussianState,
    ProjectiveState,
    QuadraticSystem,
    barrier_overlap_paper,
    bvs_baker,
    bvs_coherent_state,
    bvs_transform,
    gaussian_autocorrelation,
    gaussian_on_grid,
    hilbert_distance,
    log_barrier_overlap_paper,
    overlap_magnitude,
    plan_split_grid,
    split_operator_propagate,
)

# frozen by direct evaluation of the quoted closed form (full cross term)
BARRIER_PAPER_W2_W01_T5 = 0.007096950044607346
# frozen from the exact Gaussian dynamics (equals the half-cross-term form);
# the split operator validates the dynamics on t in [0, 3/omega]
BARRIER_DYNAMICS_W2_W01_T5 = 0.008522903705783236


def barrier_half_form(omega0, omega, t):
    """The quoted closed form with the cross coefficient halved."""
    chi = 0.5 * (omega / omega0 - omega0 / omega)
    return (np.cosh(omega * t) ** 2 + chi**2 * np.sinh(omega * t) ** 2) ** -0.25


class TestBarrierClosedForm:
    def test_unity_at_time_zero(self):
        assert barrier_overlap_paper(1.0, 2.0, 0.0) == 1.0

    def test_matched_widths_reduce_to_cosh(self):
        t = np.linspace(0.0, 4.0, 30)
        assert np.allclose(
            barrier_overlap_paper(2.0, 2.0, t), np.cosh(2.0 * t) ** -0.5, atol=1e-15
        )

    def test_frozen_value(self):
        assert barrier_overlap_paper(1.0, 2.0, 5.0) == pytest.approx(
            BARRIER_PAPER_W2_W01_T5, rel=1e-12
        )

    def test_log_variant_matches_direct(self):
        for t in (0.0, 0.3, 2.0, 5.0):
            assert log_barrier_overlap_paper(1.0, 2.0, t) == pytest.approx(
                np.log(barrier_overlap_paper(1.0, 2.0, t)), abs=1e-12
            )

    def test_log_variant_survives_large_times(self):
        out = log_barrier_overlap_paper(1.0, 2.0, 500.0)
        assert np.isfinite(out)
        assert out == pytest.approx(-0.5 * (2.0 * 500.0) + 0.25 * np.log(4.0 / (1 + 1.5**2)), rel=1e-9)

    def test_invalid_frequencies(self):
        with pytest.raises(DomainError):
            barrier_overlap_paper(0.0, 2.0, 1.0)


class TestGaussianDynamics:
    def test_unit_at_time_zero(self):
        sys = QuadraticSystem(2.0, sign=-1)
        assert gaussian_autocorrelation(sys, GaussianState(1.0), 0.0) == pytest.approx(1.0)

    def test_oscillator_ground_state_is_stationary(self):
        sys = QuadraticSystem(2.0, sign=+1)
        t = np.linspace(0.0, 20.0, 200)
        v = gaussian_autocorrelation(sys, GaussianState(2.0), t)
        assert np.max(np.abs(v - 1.0)) < 1e-12

    def test_oscillator_period(self):
        sys = QuadraticSystem(2.0, sign=+1)
        period = np.pi / 2.0
        t = np.linspace(0.0, 3.0, 40)
        v0 = gaussian_autocorrelation(sys, GaussianState(1.0), t)
        v1 = gaussian_autocorrelation(sys, GaussianState(1.0), t + period)
        assert np.allclose(v0, v1, atol=1e-12)

    def test_barrier_matched_widths_equal_quoted_form(self):
        sys = QuadraticSystem(2.0, sign=-1)
        t = np.linspace(0.0, 5.0, 60)
        v = gaussian_autocorrelation(sys, GaussianState(2.0), t)
        assert np.max(np.abs(v - barrier_overlap_paper(2.0, 2.0, t))) < 1e-12

    def test_barrier_asymptotic_decay_rate(self):
        sys = QuadraticSystem(2.0, sign=-1)
        v10 = gaussian_autocorrelation(sys, GaussianState(1.0), 10.0)
        v12 = gaussian_autocorrelation(sys, GaussianState(1.0), 12.0)
        assert np.log(v10 / v12) / 2.0 == pytest.approx(1.0, rel=1e-6)

    def test_frozen_value_t5(self):
        sys = QuadraticSystem(2.0, sign=-1)
        assert gaussian_autocorrelation(sys, GaussianState(1.0), 5.0) == pytest.approx(
            BARRIER_DYNAMICS_W2_W01_T5, rel=1e-12
        )

    def test_off_center_states_rejected(self):
        sys = QuadraticSystem(2.0, sign=-1)
        with pytest.raises(DomainError):
            gaussian_autocorrelation(sys, GaussianState(1.0, q0=0.5), 1.0)

    def test_diagnostic_mismatched_widths_need_half_cross_term(self):
        # The quoted closed form with its full cross coefficient does NOT
        # match the independent dynamics for omega0 != omega; the half
        # coefficient matches to machine precision.  Recorded here rather
        # than silently reconciled.
        sys = QuadraticSystem(2.0, sign=-1)
        t = np.linspace(0.0, 5.0, 101)
        v = gaussian_autocorrelation(sys, GaussianState(1.0), t)
        full = barrier_overlap_paper(1.0, 2.0, t)
        half = barrier_half_form(1.0, 2.0, t)
        assert np.max(np.abs(v - half)) < 1e-12
        assert np.max(np.abs(v - full)) > 0.05


class TestSplitOperator:
    def test_oscillator_coherent_state_overlap_stays_unity(self):
        sys = QuadraticSystem(2.0, sign=+1)
        g = GaussianState(2.0)
        grid = plan_split_grid(sys, g, 1.5)
        psi0 = gaussian_on_grid(g, grid)
        psi = split_operator_propagate(psi0, sys, dt=0.005, steps=300)
        assert abs(overlap_magnitude(psi0, psi) - 1.0) < 1e-6

    @pytest.mark.parametrize(
        "sign,omega,omega0",
        [(+1, 2.0, 1.0), (-1, 2.0, 1.0), (-1, 5.0, 1.0)],
        ids=["oscillator-w2", "barrier-w2", "barrier-w5"],
    )
    def test_oracle_agreement_with_exact_dynamics(self, sign, omega, omega0):
        sys = QuadraticSystem(omega, sign=sign)
        g = GaussianState(omega0)
        duration = 3.0 / omega
        grid = plan_split_grid(sys, g, duration)
        psi0 = gaussian_on_grid(g, grid)
        n_chunks = 10
        dt = duration / (n_chunks * 30)
        assert dt * omega <= 0.01
        psi = psi0
        for chunk in range(1, n_chunks + 1):
            psi = split_operator_propagate(psi, sys, dt=dt, steps=30)
            t = chunk * 30 * dt
            expected = gaussian_autocorrelation(sys, g, t)
            measured = overlap_magnitude(psi0, psi)
            assert abs(measured - expected) / expected < 1e-3

    def test_norm_preserved_over_thousand_steps(self):
        sys = QuadraticSystem(2.0, sign=+1)
        g = GaussianState(1.0)
        grid = plan_split_grid(sys, g, 5.0)
        psi0 = gaussian_on_grid(g, grid)
        psi = split_operator_propagate(psi0, sys, dt=0.005, steps=1000)
        assert abs(psi.norm() - psi0.norm()) < 1e-10

    def test_pairwise_distance_preserved(self):
        sys = QuadraticSystem(2.0, sign=+1)
        grid = plan_split_grid(sys, GaussianState(1.0), 2.0)
        a = gaussian_on_grid(GaussianState(1.0), grid)
        b = gaussian_on_grid(GaussianState(1.3), grid)
        before = hilbert_distance(a, b)
        a2 = split_operator_propagate(a, sys, dt=0.005, steps=400)
        b2 = split_operator_propagate(b, sys, dt=0.005, steps=400)
        assert abs(hilbert_distance(a2, b2) - before) < 1e-10

    def test_domain_overflow_detected(self):
        from plyap.geometry import GridBasis1D

        sys = QuadraticSystem(2.0, sign=-1)
        grid = GridBasis1D(256, -4.0, 4.0)  # far too small for a barrier run
        psi = gaussian_on_grid(GaussianState(1.0), grid)
        with pytest.raises(DomainOverflowError):
            split_operator_propagate(psi, sys, dt=0.005, steps=600)

    def test_timestep_guard(self):
        sys = QuadraticSystem(2.0, sign=+1)
        grid = plan_split_grid(sys, GaussianState(1.0), 1.0)
        psi = gaussian_on_grid(GaussianState(1.0), grid)
        with pytest.raises(DomainError):
            split_operator_propagate(psi, sys, dt=0.1, steps=10)


class TestBvsTransform:
    def test_two_by_two_hand_values(self):
        g2 = bvs_transform(2)
        expected = np.array(
            [
                [np.exp(-1j * np.pi / 4), np.exp(-3j * np.pi / 4)],
                [np.exp(-3j * np.pi / 4), np.exp(-9j * np.pi / 4)],
            ]
        ) / np.sqrt(2)
        assert np.allclose(g2, expected, atol=1e-15)

    @pytest.mark.parametrize("n", [2, 8, 128])
    def test_unitarity(self, n):
        g = bvs_transform(n)
        assert np.max(np.abs(g.conj().T @ g - np.eye(n))) < 1e-12

    def test_columns_orthonormal(self):
        g = bvs_transform(16)
        gram = g.conj().T @ g
        assert np.allclose(np.diag(gram), 1.0, atol=1e-13)
        assert np.max(np.abs(gram - np.diag(np.diag(gram)))) < 1e-13


class TestBvsBaker:
    @pytest.mark.parametrize("n", [2, 8, 128])
    def test_unitarity(self, n):
        b = bvs_baker(n)
        assert np.max(np.abs(b.conj().T @ b - np.eye(n))) < 1e-10

    def test_two_by_two_hand_value(self):
        # G_1 = exp(-i pi/2) = -i, so B = -i G_2^dagger
        b = bvs_baker(2)
        expected = np.array(
            [
                [np.exp(-1j * np.pi / 4), np.exp(1j * np.pi / 4)],
                [np.exp(1j * np.pi / 4), np.exp(-1j * np.pi / 4)],
            ]
        ) / np.sqrt(2)
        assert np.allclose(b, expected, atol=1e-15)

    def test_odd_dimension_rejected(self):
        with pytest.raises(DomainError):
            bvs_baker(7)

    def test_flat_metric_invariance(self):
        rng = np.random.default_rng(8)
        n = 128
        b = bvs_baker(n)
        basis = DiscreteBasis(n)
        for _ in range(5):
            u = ProjectiveState(rng.standard_normal(n) + 1j * rng.standard_normal(n), basis)
            v = ProjectiveState(rng.standard_normal(n) + 1j * rng.standard_normal(n), basis)
            before = hilbert_distance(u, v)
            after = hilbert_distance(
                ProjectiveState(b @ u.amplitudes, basis),
                ProjectiveState(b @ v.amplitudes, basis),
            )
            assert abs(after - before) < 1e-10


class TestBvsCoherentState:
    def test_zero_momentum_is_real_positive(self):
        psi = bvs_coherent_state(64, 0.5, 0.0, 1e-3)
        assert np.allclose(psi.amplitudes.imag, 0.0)
        assert np.all(psi.amplitudes.real > 0.0)

    def test_huge_alpha_tends_to_uniform_modulus(self):
        psi = bvs_coherent_state(64, 0.5, 0.0, 1e6)
        mags = np.abs(psi.amplitudes)
        assert np.max(mags) / np.min(mags) - 1.0 < 1e-5

    def test_width_in_cells(self):
        # |psi|^2 has std sqrt(alpha/2); alpha = 1e-4 on N = 1800 gives a
        # packet of width ~1e-2 (sqrt(alpha) = 18 cells)
        n, alpha = 1800, 1e-4
        psi = bvs_coherent_state(n, 0.5, 0.0, alpha)
        q = (np.arange(n) + 0.5) / n
        rho = np.abs(psi.amplitudes) ** 2
        rho /= rho.sum()
        mean = (q * rho).sum()
        std = np.sqrt(((q - mean) ** 2 * rho).sum())
        assert std == pytest.approx(np.sqrt(alpha / 2.0), rel=1e-3)
        assert 10 < np.sqrt(alpha) * n < 25

    def test_center_validation(self):
        with pytest.raises(DomainError):
            bvs_coherent_state(16, 1.2, 0.0, 1e-3)

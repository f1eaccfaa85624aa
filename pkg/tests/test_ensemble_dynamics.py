"""Flows, divergence, Boltzmann sampling, invariance and the dual operator."""

import math
from fractions import Fraction

import numpy as np
import pytest

from bosonlab import (
    ClassicalPolynomial,
    ClassicalState,
    FlowEnsemble,
    FockBasis,
    OdeSystem,
    OperatorPolynomial,
    ValidationError,
    boltzmann_sample,
    build_matrix,
    divergence,
    divergence_polynomial,
    dual_operator,
    evolve,
    gaussian_oracle_moments,
    invariance_test,
    is_statistically_incompressible,
    parse_phase_space,
    rho_of_state,
    snapshot_from_text,
    snapshot_to_text,
    trace_product,
)

from oracles import random_phase_space_hamiltonian

HARMONIC = parse_phase_space("0.5*pi0^2 + 0.5*phi0^2", 1)
QUARTIC = parse_phase_space("0.5*pi0^2 + 0.5*phi0^2 + 0.25*phi0^4", 1)


def damped_oscillator(gamma, m=1.0, omega=1.0):
    # phi_dot = pi/m, pi_dot = -m w^2 phi - gamma pi
    return OdeSystem.from_field_polynomials([
        parse_phase_space(f"{1.0 / m}*pi0", 1),
        parse_phase_space(f"-{m * omega**2}*phi0 - {gamma}*pi0", 1),
    ])


class TestDivergence:
    def test_harmonic_oscillator_exact_zero(self):
        m, omega = 1.3, 0.9
        h = parse_phase_space(f"pi0^2*{1 / (2 * m)} + {0.5 * m * omega**2}*phi0^2", 1)
        sys_ = OdeSystem.from_hamiltonian(h)
        assert divergence_polynomial(sys_).is_zero
        assert divergence(sys_, ([0.7], [-0.4])) == 0.0

    def test_damped_oscillator(self):
        sys_ = damped_oscillator(0.1)
        assert divergence(sys_, ([1.0], [0.5])) == pytest.approx(-0.1, abs=1e-15)

    def test_quartic_symbolic_and_finite_difference(self):
        sys_ = OdeSystem.from_hamiltonian(QUARTIC)
        assert divergence_polynomial(sys_).is_zero
        # same flow through the finite-difference path
        def field(phi, pi):
            return (
                np.stack([QUARTIC.d_pi(0).evaluate(phi, pi)], axis=-1),
                np.stack([(-1 * QUARTIC.d_phi(0)).evaluate(phi, pi)], axis=-1),
            )

        fd_sys = OdeSystem.from_callable(field, 1)
        rng = np.random.default_rng(5)
        for _ in range(10):
            point = (rng.normal(size=1), rng.normal(size=1))
            assert abs(divergence(fd_sys, point)) <= 1e-7


class TestIncompressibility:
    def test_polynomial_hamiltonians_always_pass(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            pairs = int(rng.integers(1, 4))
            h = random_phase_space_hamiltonian(rng, pairs)
            sys_ = OdeSystem.from_hamiltonian(h)
            points = [(rng.normal(size=pairs), rng.normal(size=pairs)) for _ in range(5)]
            flag, worst = is_statistically_incompressible(sys_, points)
            assert flag
            assert worst == 0.0

    def test_damped_oscillator_fails(self):
        sys_ = damped_oscillator(0.1)
        rng = np.random.default_rng(11)
        points = [(rng.normal(size=1), rng.normal(size=1)) for _ in range(5)]
        flag, worst = is_statistically_incompressible(sys_, points)
        assert not flag
        assert worst == pytest.approx(0.1, abs=1e-15)


class TestEvolve:
    def test_full_period_returns_home(self):
        sys_ = OdeSystem.from_hamiltonian(HARMONIC)
        e = FlowEnsemble([[1.0]], [[0.0]])
        out = evolve(sys_, e, 2.0 * math.pi, 1e-3)
        assert abs(out.phi[0, 0] - 1.0) <= 1e-4
        assert abs(out.pi[0, 0]) <= 1e-4

    def test_zero_horizon_is_identity(self):
        rng = np.random.default_rng(4)
        e = FlowEnsemble(rng.normal(size=(6, 1)), rng.normal(size=(6, 1)))
        out = evolve(OdeSystem.from_hamiltonian(QUARTIC), e, 0.0, 1e-2)
        assert np.array_equal(out.phi, e.phi)
        assert np.array_equal(out.pi, e.pi)

    def test_energy_drift_bound(self):
        sys_ = OdeSystem.from_hamiltonian(QUARTIC)
        e = FlowEnsemble([[0.9]], [[0.2]])
        out = evolve(sys_, e, 10.0, 1e-3)
        h0 = float(QUARTIC.evaluate(e.phi[0], e.pi[0]))
        h1 = float(QUARTIC.evaluate(out.phi[0], out.pi[0]))
        assert abs(h1 - h0) <= 1e-5

    def test_second_order_convergence(self):
        # halving dt cuts the per-period state error by ~4
        sys_ = OdeSystem.from_hamiltonian(HARMONIC)
        e = FlowEnsemble([[1.0]], [[0.0]])
        period = 2.0 * math.pi

        def state_error(dt):
            out = evolve(sys_, e, period, dt)
            return math.hypot(out.phi[0, 0] - 1.0, out.pi[0, 0])

        ratio = state_error(2e-3) / state_error(1e-3)
        assert 3.5 <= ratio <= 4.5

    def test_non_separable_rejected(self):
        h = parse_phase_space("phi0*pi0 + phi0^2 + pi0^2", 1)
        sys_ = OdeSystem.from_hamiltonian(h)
        with pytest.raises(ValidationError, match="separable"):
            evolve(sys_, FlowEnsemble([[1.0]], [[0.0]]), 1.0, 1e-2)

    def test_rk4_damped_energy_decays(self):
        sys_ = damped_oscillator(0.3)
        e = FlowEnsemble([[1.0]], [[0.0]])
        out = evolve(sys_, e, 5.0, 1e-3)
        h0 = float(HARMONIC.evaluate(e.phi[0], e.pi[0]))
        h1 = float(HARMONIC.evaluate(out.phi[0], out.pi[0]))
        assert h1 < h0 * 0.5

    def test_blowup_detection(self):
        unstable = OdeSystem.from_field_polynomials([
            parse_phase_space("phi0", 1).scale(30.0),
            parse_phase_space("pi0", 1).scale(30.0),
        ])
        from bosonlab import BlowUpError

        with pytest.raises(BlowUpError):
            evolve(unstable, FlowEnsemble([[1.0]], [[1.0]]), 10.0, 1e-2)


class TestBoltzmann:
    def test_harmonic_moments_match_gaussian_oracle(self):
        sys_ = OdeSystem.from_hamiltonian(HARMONIC)
        k = 2.0
        e = boltzmann_sample(sys_, k, 8000, seed=101)
        energies = np.asarray(HARMONIC.evaluate(e.phi, e.pi))
        se = energies.std(ddof=1) / math.sqrt(len(energies))
        assert abs(energies.mean() - 1.0 / k) <= 3.0 * se
        q2 = e.phi[:, 0] ** 2
        se_q = q2.std(ddof=1) / math.sqrt(len(q2))
        assert abs(q2.mean() - 1.0 / k) <= 3.0 * se_q

    def test_general_quadratic_oracle(self):
        m, omega, k = 2.0, 1.5, 1.0
        h = parse_phase_space(f"pi0^2*{1 / (2 * m)} + {0.5 * m * omega**2}*phi0^2", 1)
        oracle = gaussian_oracle_moments(h, k)
        assert oracle["mean_energy"] == pytest.approx(1.0 / k)
        assert oracle["phi0^2"] == pytest.approx(1.0 / (k * m * omega**2))
        assert oracle["pi0^2"] == pytest.approx(m / k)
        e = boltzmann_sample(OdeSystem.from_hamiltonian(h), k, 6000, seed=55)
        q2 = e.phi[:, 0] ** 2
        se_q = q2.std(ddof=1) / math.sqrt(len(q2))
        assert abs(q2.mean() - oracle["phi0^2"]) <= 3.0 * se_q

    def test_seed_determinism(self):
        sys_ = OdeSystem.from_hamiltonian(HARMONIC)
        e1 = boltzmann_sample(sys_, 1.0, 100, seed=7)
        e2 = boltzmann_sample(sys_, 1.0, 100, seed=7)
        assert np.array_equal(e1.phi, e2.phi)
        assert np.array_equal(e1.pi, e2.pi)

    def test_invalid_k(self):
        sys_ = OdeSystem.from_hamiltonian(HARMONIC)
        with pytest.raises(ValidationError):
            boltzmann_sample(sys_, 0.0, 10, seed=0)
        with pytest.raises(ValidationError):
            boltzmann_sample(sys_, -1.0, 10, seed=0)

    def test_non_normalizable_rejected(self):
        cubic = parse_phase_space("0.5*pi0^2 + 0.5*phi0^2 + phi0^3", 1)
        with pytest.raises(ValidationError):
            boltzmann_sample(OdeSystem.from_hamiltonian(cubic), 1.0, 10, seed=0)
        inverted = parse_phase_space("0.5*pi0^2 - 0.5*phi0^2", 1)
        with pytest.raises(ValidationError):
            boltzmann_sample(OdeSystem.from_hamiltonian(inverted), 1.0, 10, seed=0)


class TestInvariance:
    def test_boltzmann_ensemble_is_invariant(self):
        sys_ = OdeSystem.from_hamiltonian(HARMONIC)
        e = boltzmann_sample(sys_, 2.0, 3000, seed=19)
        report = invariance_test(sys_, e, 5.0, dt=1e-3)
        assert report.invariant
        assert report.max_divergence == 0.0

    def test_point_ensemble_drifts(self):
        sys_ = OdeSystem.from_hamiltonian(HARMONIC)
        e = FlowEnsemble([[1.0], [1.0]], [[0.0], [0.0]])
        report = invariance_test(sys_, e, math.pi / 2.0, dt=1e-4)
        drift = {m.name: m for m in report.moments}
        assert drift["phi0^2"].significant
        assert not report.invariant

    def test_zero_horizon_no_drift(self):
        sys_ = OdeSystem.from_hamiltonian(QUARTIC)
        rng = np.random.default_rng(2)
        e = FlowEnsemble(rng.normal(size=(50, 1)), rng.normal(size=(50, 1)))
        report = invariance_test(sys_, e, 0.0)
        for m in report.moments:
            assert m.drift == 0.0
            assert not m.significant

    def test_report_mentions_ergodicity_caveat(self):
        sys_ = OdeSystem.from_hamiltonian(HARMONIC)
        e = FlowEnsemble([[0.5]], [[0.1]])
        report = invariance_test(sys_, e, 0.0)
        assert "ergodicity" in report.note


class TestDualOperator:
    def test_order_zero_is_identity(self):
        h = ClassicalPolynomial.monomial([(1, 1)])
        assert dual_operator(1.0, h, 0) == OperatorPolynomial.constant(1, 1)

    def test_second_order_expansion(self):
        h = ClassicalPolynomial.monomial([(1, 1)])
        k = Fraction(1, 3)
        expected = OperatorPolynomial.monomial([(0, 0)]) \
            - OperatorPolynomial.monomial([(1, 1)]).scale(k) \
            + OperatorPolynomial.monomial([(2, 2)]).scale(k**2 / 2)
        assert dual_operator(k, h, 2).isclose(expected, tol=0.0)

    def test_trace_matches_exponential(self):
        h = ClassicalPolynomial.monomial([(1, 1)])
        k = 0.5
        basis = FockBasis([24])
        rho = rho_of_state(ClassicalState([0.5]), basis)
        f_matrix = build_matrix(dual_operator(k, h, 8), basis)
        value = trace_product(f_matrix, rho).real
        assert abs(value - math.exp(-0.125)) <= 1e-6

    def test_remainder_bound_property(self):
        rng = np.random.default_rng(77)
        h = ClassicalPolynomial.monomial([(1, 1)])
        basis = FockBasis([26])
        for _ in range(6):
            alpha = complex(rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9))
            k = float(rng.uniform(0.1, 0.8))
            order = int(rng.integers(2, 9))
            rho = rho_of_state(ClassicalState([alpha]), basis)
            hs = abs(alpha) ** 2
            value = trace_product(build_matrix(dual_operator(k, h, order), basis), rho).real
            bound = (k * hs) ** (order + 1) / math.factorial(order + 1)
            assert abs(value - math.exp(-k * hs)) <= bound + 1e-9

    def test_hermitian_for_real_h(self):
        from oracles import random_real_classical

        rng = np.random.default_rng(31)
        h = random_real_classical(rng, 1, max_degree=2)
        assert dual_operator(0.3, h, 3).is_hermitian()


class TestSnapshots:
    def test_round_trip(self):
        rng = np.random.default_rng(88)
        e = FlowEnsemble(rng.normal(size=(5, 2)), rng.normal(size=(5, 2)))
        back = snapshot_from_text(snapshot_to_text(e))
        assert np.array_equal(back.phi, e.phi)
        assert np.array_equal(back.pi, e.pi)

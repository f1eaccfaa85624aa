"""P mapping: states and ensembles to density matrices, trace comparisons."""

import math

import numpy as np
import pytest

from bosonlab import (
    ClassicalPolynomial,
    ClassicalState,
    FockBasis,
    ModeMismatchError,
    TruncationError,
    ValidationError,
    WeightedEnsemble,
    adequate_basis,
    build_matrix,
    ensemble_from_text,
    ensemble_to_text,
    normal_product,
    parse_expression,
    phase_quadrature,
    rho_of_ensemble,
    rho_of_state,
    trace_product,
    trace_theorem_check,
)

from oracles import random_real_classical


def classical(expr, modes=1):
    return parse_expression(expr, [str(i) for i in range(modes)])


class TestEnsembles:
    def test_weights_validated(self):
        with pytest.raises(ValidationError):
            WeightedEnsemble([(0.4, ClassicalState([0j]))])
        with pytest.raises(ValidationError):
            WeightedEnsemble([(-0.5, ClassicalState([0j])), (1.5, ClassicalState([1j]))])
        with pytest.raises(ValidationError):
            WeightedEnsemble([])

    def test_uniform_weights_sum_exactly_to_one(self):
        for count in (3, 7, 64):
            e = phase_quadrature(1.0, count)
            assert math.fsum(w for w, _ in e.members) == 1.0

    def test_mode_count_consistency(self):
        with pytest.raises(ModeMismatchError):
            WeightedEnsemble([(0.5, ClassicalState([0j])), (0.5, ClassicalState([0j, 0j]))])

    def test_text_round_trip(self):
        e = WeightedEnsemble.normalized(
            [(1.0, ClassicalState([0.5 + 0.1j, -0.2j])), (3.0, ClassicalState([1.0, 0.3]))]
        )
        back = ensemble_from_text(ensemble_to_text(e))
        assert len(back) == len(e)
        for (w1, s1), (w2, s2) in zip(e.members, back.members):
            assert w1 == pytest.approx(w2, abs=0)
            assert s1.amplitudes == s2.amplitudes


class TestRhoOfState:
    def test_vacuum_projector(self):
        rho = rho_of_state(ClassicalState([0j]), FockBasis([4]))
        expected = np.zeros((5, 5), dtype=complex)
        expected[0, 0] = 1.0
        assert np.array_equal(rho.data, expected)

    def test_unit_trace(self):
        rho = rho_of_state(ClassicalState([1.0]), FockBasis([20]))
        assert rho.trace().real == pytest.approx(1.0, abs=1e-9)

    def test_mean_occupation(self):
        basis = FockBasis([20])
        rho = rho_of_state(ClassicalState([1.0]), basis)
        n = build_matrix(normal_product(classical("conj(al0)*al0")), basis)
        assert trace_product(n, rho).real == pytest.approx(1.0, abs=1e-8)


class TestRhoOfEnsemble:
    def test_point_mass_matches_state(self):
        basis = FockBasis([16])
        s = ClassicalState([0.7 - 0.4j])
        lhs = rho_of_ensemble(WeightedEnsemble.point(s), basis).data
        rhs = rho_of_state(s, basis).data
        assert np.array_equal(lhs, rhs)

    def test_two_point_mix_purity(self):
        # overlap law gives Tr(rho^2) = (1 + exp(-|a-b|^2)) / 2 for an equal mix
        basis = FockBasis([24])
        e = WeightedEnsemble.uniform([ClassicalState([1.0]), ClassicalState([-1.0])])
        rho = rho_of_ensemble(e, basis)
        purity = trace_product(rho, rho).real
        assert purity < 1.0
        assert purity == pytest.approx(0.5 * (1.0 + math.exp(-4.0)), abs=1e-8)

    def test_phase_average_gives_poisson_diagonal(self):
        basis = FockBasis([20])
        rho = rho_of_ensemble(phase_quadrature(1.0, 64), basis).data
        diag = np.real(np.diag(rho))
        poisson = np.array([math.exp(-1.0) / math.factorial(n) for n in range(21)])
        assert np.max(np.abs(diag - poisson)) <= 1e-6
        off = rho - np.diag(np.diag(rho))
        assert np.max(np.abs(off)) <= 1e-6

    def test_positive_semidefinite_unit_trace(self):
        rng = np.random.default_rng(17)
        basis = FockBasis([14, 12])
        states = [ClassicalState(rng.normal(size=2) + 1j * rng.normal(size=2) * 0.4)
                  for _ in range(5)]
        rho = rho_of_ensemble(WeightedEnsemble.uniform(states), basis, tail_tol=1e-3)
        assert rho.trace().real == pytest.approx(1.0, abs=1e-9)
        assert float(np.min(np.linalg.eigvalsh(rho.data))) >= -1e-9


class TestTraceTheorem:
    def test_point_mass_quadratic(self):
        e = WeightedEnsemble.point(ClassicalState([1 + 1j]))
        basis = adequate_basis(e, degree=2)
        report = trace_theorem_check(classical("conj(al0)*al0"), e, basis)
        assert report.classical_expectation.real == pytest.approx(2.0, abs=1e-12)
        assert report.quantum_trace.real == pytest.approx(2.0, abs=1e-8)
        assert report.residual <= 1e-8

    def test_point_mass_quartic(self):
        e = WeightedEnsemble.point(ClassicalState([1.0]))
        basis = adequate_basis(e, degree=4)
        report = trace_theorem_check(classical("conj(al0)^2*al0^2"), e, basis)
        assert report.classical_expectation.real == pytest.approx(1.0, abs=1e-12)
        assert report.residual <= 1e-8

    def test_phase_mix_on_level_set(self):
        g = classical("(conj(al0)*al0 - 1)^2")
        e = phase_quadrature(1.0, 16)
        basis = adequate_basis(e, degree=4)
        report = trace_theorem_check(g, e, basis)
        assert abs(report.classical_expectation) <= 1e-12
        assert abs(report.quantum_trace) <= 1e-8
        assert report.residual <= 1e-8

    def test_energy_form(self):
        # Tr(rho H_n) equals the weighted classical energy for H = w |al|^2
        omega = 1.7
        rng = np.random.default_rng(12)
        states = [ClassicalState([complex(rng.normal(), rng.normal()) * 0.6])
                  for _ in range(5)]
        e = WeightedEnsemble.uniform(states)
        basis = adequate_basis(e, degree=2)
        h = ClassicalPolynomial.monomial([(1, 1)], coeff=omega)
        report = trace_theorem_check(h, e, basis)
        expected = sum(w * omega * abs(s.amplitudes[0]) ** 2 for w, s in e.members)
        assert report.quantum_trace.real == pytest.approx(expected, abs=1e-8)

    def test_mixture_residual_bounded_by_member_max(self):
        rng = np.random.default_rng(23)
        g = random_real_classical(rng, 1, max_degree=4)
        states = [ClassicalState([complex(rng.normal(), rng.normal()) * 0.7])
                  for _ in range(4)]
        e = WeightedEnsemble.uniform(states)
        basis = adequate_basis(e, degree=g.degree())
        member_residuals = [
            trace_theorem_check(g, WeightedEnsemble.point(s), basis).residual
            for s in states
        ]
        mixture = trace_theorem_check(g, e, basis).residual
        assert mixture <= max(member_residuals) + 1e-12

    def test_random_cases(self):
        rng = np.random.default_rng(71)
        for _ in range(12):
            n_modes = int(rng.integers(1, 3))
            g = random_real_classical(rng, n_modes, max_degree=4)
            count = int(rng.integers(1, 9))
            states = [
                ClassicalState(
                    (rng.normal(size=n_modes) + 1j * rng.normal(size=n_modes)) * 0.5
                )
                for _ in range(count)
            ]
            e = WeightedEnsemble.uniform(states)
            basis = adequate_basis(e, degree=g.degree(), tail_tol=1e-10)
            report = trace_theorem_check(g, e, basis, tail_tol=1e-10)
            assert report.residual <= 1e-6

    def test_degree_cap(self):
        e = WeightedEnsemble.point(ClassicalState([0.5]))
        g = classical("conj(al0)^4*al0^4")
        with pytest.raises(ValidationError, match="degree"):
            trace_theorem_check(g, e, FockBasis([30]))

    def test_truncation_reported(self):
        e = WeightedEnsemble.point(ClassicalState([2.0]))
        with pytest.raises(TruncationError):
            trace_theorem_check(classical("conj(al0)*al0"), e, FockBasis([6]))


class TestAdequateBasis:
    def test_meets_tail_target(self):
        e = WeightedEnsemble.point(ClassicalState([1.5, 0.5]))
        basis = adequate_basis(e, degree=4, tail_tol=1e-10)
        from bosonlab.pmap import ensemble_truncation_bound

        assert ensemble_truncation_bound(e, basis, degree_margin=4) <= 1e-10

    def test_unreachable_cutoff_raises(self):
        e = WeightedEnsemble.point(ClassicalState([20.0]))
        with pytest.raises(TruncationError):
            adequate_basis(e, tail_tol=1e-12, max_cutoff=64)

"""Classical states and weighted ensembles mapped to density matrices.

A point mass maps to the rank-1 projector onto its coherent state; a
weighted ensemble maps to the convex combination of member projectors.
`trace_theorem_check` compares the quantum trace against the classical
expectation for a polynomial observable; the classical side is exact, so
the residual isolates Fock truncation error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc

from .errors import ModeMismatchError, TruncationError, ValidationError
from .fock_numerics import (
    DEFAULT_TAIL_TOL,
    FockBasis,
    FockMatrix,
    build_matrix,
    coherent_state,
    density_of,
    trace_product,
    truncation_bound,
)
from .operator_algebra import (
    ClassicalPolynomial,
    ClassicalState,
    evaluate_classical,
    normal_product,
)

DEFAULT_MAX_DEGREE = 6


class WeightedEnsemble:
    """Finite list of (weight, state) pairs with weights summing to one."""

    __slots__ = ("members",)

    def __init__(self, members):
        members = [(float(w), s if isinstance(s, ClassicalState) else ClassicalState(s))
                   for w, s in members]
        if not members:
            raise ValidationError("ensemble must have at least one member")
        n_modes = members[0][1].n_modes
        for w, s in members:
            if w < 0:
                raise ValidationError(f"negative weight {w!r}")
            if s.n_modes != n_modes:
                raise ModeMismatchError("ensemble members have differing mode counts")
        total = math.fsum(w for w, _ in members)
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"weights sum to {total!r}, expected 1 within 1e-12")
        self.members = members

    @classmethod
    def point(cls, state) -> "WeightedEnsemble":
        return cls([(1.0, state)])

    @classmethod
    def uniform(cls, states) -> "WeightedEnsemble":
        states = list(states)
        if not states:
            raise ValidationError("ensemble must have at least one member")
        w = 1.0 / len(states)
        members = [(w, s) for s in states]
        # counteract accumulation error so the sum-to-one invariant holds
        members[-1] = (1.0 - w * (len(states) - 1), states[-1])
        return cls(members)

    @classmethod
    def normalized(cls, members) -> "WeightedEnsemble":
        members = list(members)
        total = math.fsum(w for w, _ in members)
        if total <= 0:
            raise ValidationError("weights must have positive sum")
        return cls([(w / total, s) for w, s in members])

    @property
    def n_modes(self) -> int:
        return self.members[0][1].n_modes

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def max_amplitude(self, mode: int) -> float:
        return max(abs(s.amplitudes[mode]) for _, s in self.members)


def phase_quadrature(radius: float, points: int, n_modes: int = 1, mode: int = 0) -> WeightedEnsemble:
    """Uniform-phase quadrature on the circle |alpha_mode| = radius.

    Discretizes the continuous phase average with `points` equally weighted
    nodes; all other modes sit at the origin.
    """
    if points < 1:
        raise ValidationError("need at least one quadrature point")
    states = []
    for j in range(points):
        amps = [0j] * n_modes
        amps[mode] = radius * complex(math.cos(2 * math.pi * j / points),
                                      math.sin(2 * math.pi * j / points))
        states.append(ClassicalState(amps))
    return WeightedEnsemble.uniform(states)


@dataclass
class TraceCheckReport:
    classical_expectation: complex
    quantum_trace: complex
    residual: float
    truncation_bound_used: float

    def as_dict(self) -> dict:
        return {
            "classical_expectation": [self.classical_expectation.real, self.classical_expectation.imag],
            "quantum_trace": [self.quantum_trace.real, self.quantum_trace.imag],
            "residual": self.residual,
            "truncation_bound_used": self.truncation_bound_used,
        }


def rho_of_state(s, basis: FockBasis, tail_tol: float = DEFAULT_TAIL_TOL) -> FockMatrix:
    """Rank-1 density matrix of the coherent state of s."""
    return density_of(coherent_state(s, basis, tail_tol=tail_tol))


def rho_of_ensemble(e: WeightedEnsemble, basis: FockBasis,
                    tail_tol: float = DEFAULT_TAIL_TOL) -> FockMatrix:
    """Convex combination of member density matrices (fixed summation order)."""
    total = np.zeros((basis.total_dimension, basis.total_dimension), dtype=complex)
    for w, s in e.members:
        if w == 0.0:
            continue
        total += w * rho_of_state(s, basis, tail_tol=tail_tol).data
    return FockMatrix(total, basis, hermitian=True)


def ensemble_truncation_bound(e: WeightedEnsemble, basis: FockBasis,
                              degree_margin: int = 0) -> float:
    """Worst member tail bound, with cutoffs shrunk by the degree margin.

    A degree-d observable couples occupations within d of the cutoff, so the
    adequacy check looks at the tail beyond cutoff - d.
    """
    if degree_margin:
        reduced = [c - degree_margin for c in basis.cutoffs]
        if any(c < 1 for c in reduced):
            return 1.0
        basis = FockBasis(reduced)
    return max(truncation_bound(s, basis) for _, s in e.members)


def adequate_basis(e: WeightedEnsemble, degree: int = 0,
                   tail_tol: float = 1e-10, max_cutoff: int = 200,
                   min_cutoff: int = 2) -> FockBasis:
    """Smallest per-mode cutoffs whose degree-adjusted tail bound meets tail_tol."""
    per_mode_tol = tail_tol / e.n_modes
    cutoffs = []
    for mode in range(e.n_modes):
        lam = e.max_amplitude(mode) ** 2
        n = max(min_cutoff, int(math.ceil(lam)))
        if lam > 0:
            while float(gammainc(n + 1, lam)) > per_mode_tol:
                n += 1
                if n > max_cutoff:
                    raise TruncationError(
                        f"no adequate cutoff below {max_cutoff} for |alpha|^2 = {lam:.3f}"
                    )
        cutoffs.append(n + degree)
    return FockBasis(cutoffs)


def trace_theorem_check(g: ClassicalPolynomial, e: WeightedEnsemble, basis: FockBasis,
                        max_degree: int = DEFAULT_MAX_DEGREE,
                        tail_tol: float = 1e-8) -> TraceCheckReport:
    """Compare Tr(rho G_n) with the classical ensemble expectation of g.

    The quantum side quantizes g as a normal product, builds its matrix and
    traces it against the ensemble density matrix; the classical side is the
    weighted exact polynomial evaluation.  Truncation inadequacy raises
    rather than silently degrading the comparison.
    """
    if g.n_modes != e.n_modes:
        raise ModeMismatchError("observable and ensemble mode counts differ")
    degree = g.degree()
    if degree > max_degree:
        raise ValidationError(f"degree {degree} exceeds configured max {max_degree}")
    bound = ensemble_truncation_bound(e, basis, degree_margin=degree)
    if bound > tail_tol:
        raise TruncationError(
            f"degree-adjusted truncation bound {bound:.3e} exceeds {tail_tol:.3e}"
        )
    quantum = trace_product(build_matrix(normal_product(g), basis),
                            rho_of_ensemble(e, basis, tail_tol=tail_tol))
    classical = 0j
    for w, s in e.members:
        classical += w * evaluate_classical(g, s)
    return TraceCheckReport(
        classical_expectation=classical,
        quantum_trace=quantum,
        residual=abs(classical - quantum),
        truncation_bound_used=bound,
    )


# ---------------------------------------------------------------------------
# Ensemble text format: one member per record, weight then Re/Im per mode
# ---------------------------------------------------------------------------

def ensemble_to_text(e: WeightedEnsemble) -> str:
    lines = []
    for w, s in e.members:
        cols = [repr(w)]
        for a in s.amplitudes:
            cols += [repr(a.real), repr(a.imag)]
        lines.append(" ".join(cols))
    return "\n".join(lines) + "\n"


def ensemble_from_text(text: str) -> WeightedEnsemble:
    members = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        vals = [float(x) for x in line.split()]
        if len(vals) < 3 or len(vals) % 2 == 0:
            raise ValidationError(
                "each record needs a weight plus (re, im) pairs for every mode"
            )
        w = vals[0]
        amps = [complex(vals[i], vals[i + 1]) for i in range(1, len(vals), 2)]
        members.append((w, ClassicalState(amps)))
    return WeightedEnsemble(members)

"""The quadratic spectral operator for definite-energy classical ensembles.

For a real classical Hamiltonian h and energy E, `build_M` quantizes the
squared deviation (h - E)^2 as a normal product.  Its gap from the square
of the quantized Hamiltonian is `delta_operator`, independent of E.
`analyze` eigendecomposes the operator on a truncated Fock space and
measures both Tr(M rho) and how much of a definite-energy ensemble's
density matrix leaks outside the zero eigenspace.

The operator is indefinite on the full Fock space (Fock states can give
negative expectations); only states in the classical image -- convex
mixtures of coherent projectors -- are guaranteed nonnegative values, which
`classical_image_min` probes directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DefiniteEnergyError, NotRealValuedError, ValidationError
from .fock_numerics import (
    DEFAULT_TAIL_TOL,
    FockBasis,
    FockMatrix,
    FockVector,
    build_matrix,
    coherent_state,
    expectation,
    hermitian_eigen,
    trace_product,
)
from .operator_algebra import (
    ClassicalPolynomial,
    ClassicalState,
    OperatorPolynomial,
    evaluate_classical,
    multiply,
    normal_product,
)
from .pmap import WeightedEnsemble, rho_of_ensemble

DEFINITE_ENERGY_TOL = 1e-9


def _require_real(h: ClassicalPolynomial):
    if not h.is_real_valued():
        raise NotRealValuedError(
            "classical Hamiltonian must be real-valued (conjugate-symmetric coefficients)"
        )


def build_M(h: ClassicalPolynomial, energy) -> OperatorPolynomial:
    """Normal-product quantization of (h - E)^2, expanded classically first."""
    _require_real(h)
    deviation = h - energy
    return normal_product(deviation * deviation)


def delta_operator(h: ClassicalPolynomial) -> OperatorPolynomial:
    """Gap between the normal product of h^2 and the square of the quantized h."""
    _require_real(h)
    hn = normal_product(h)
    return normal_product(h * h) - multiply(hn, hn)


def compare_with_square(h: ClassicalPolynomial, energy) -> OperatorPolynomial:
    """build_M(h, E) minus the plain operator square (H_n - E)^2.

    Equals `delta_operator(h)` identically; the E-dependent cross terms
    cancel because the normal product of h - E is H_n - E.
    """
    _require_real(h)
    hn_shifted = normal_product(h) - energy
    return build_M(h, energy) - multiply(hn_shifted, hn_shifted)


def zero_eigenspace(m: FockMatrix, tol: float) -> list[FockVector]:
    """Orthonormal eigenvectors with |eigenvalue| <= tol (possibly none)."""
    evals, evecs = hermitian_eigen(m)
    return [
        FockVector(evecs[:, i], m.basis)
        for i in range(len(evals))
        if abs(evals[i]) <= tol
    ]


@dataclass
class SpectralReport:
    energy: float
    eigenvalues: list
    zero_space_dimension: int
    zero_tolerance: float
    min_eigenvalue: float
    ensemble_residual: Optional[float] = None
    ensemble_projection_deficit: Optional[float] = None
    zero_modes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "energy": self.energy,
            "eigenvalues": list(self.eigenvalues),
            "zero_space_dimension": self.zero_space_dimension,
            "zero_tolerance": self.zero_tolerance,
            "min_eigenvalue": self.min_eigenvalue,
            "ensemble_residual": self.ensemble_residual,
            "ensemble_projection_deficit": self.ensemble_projection_deficit,
            "zero_modes": [list(occ) for occ in self.zero_modes],
        }


def analyze(h: ClassicalPolynomial, energy: float, e: Optional[WeightedEnsemble],
            basis: FockBasis, tol: Optional[float] = None,
            tail_tol: float = DEFAULT_TAIL_TOL) -> SpectralReport:
    """Eigenstructure of the spectral operator, plus ensemble diagnostics.

    When an ensemble is supplied every member must sit on the energy level
    set within 1e-9; the report then includes Tr(M(E) rho) and the trace
    norm of rho compressed outside the zero eigenspace.  The minimum
    eigenvalue is reported as the indefiniteness diagnostic.
    """
    _require_real(h)
    if e is not None:
        for idx, (_, s) in enumerate(e.members):
            value = evaluate_classical(h, s)
            if abs(value - energy) > DEFINITE_ENERGY_TOL:
                raise DefiniteEnergyError(idx, value, energy)

    m = build_matrix(build_M(h, energy), basis)
    evals, evecs = hermitian_eigen(m)
    spectral_radius = float(np.max(np.abs(evals))) if len(evals) else 0.0
    if tol is None:
        tol = 1e-8 * (1.0 + spectral_radius)
    zero_mask = np.abs(evals) <= tol
    zero_dim = int(np.count_nonzero(zero_mask))

    # label near-diagonal zero eigenvectors by their dominant occupation
    zero_modes = []
    for i in np.nonzero(zero_mask)[0]:
        dominant = int(np.argmax(np.abs(evecs[:, i])))
        zero_modes.append(basis.occupation_of(dominant))

    residual = None
    deficit = None
    if e is not None:
        rho = rho_of_ensemble(e, basis, tail_tol=tail_tol)
        residual = float(trace_product(m, rho).real)
        p0 = evecs[:, zero_mask]
        compress = rho.data - p0 @ (p0.conj().T @ rho.data) \
            - (rho.data @ p0) @ p0.conj().T \
            + p0 @ (p0.conj().T @ rho.data @ p0) @ p0.conj().T
        deficit = float(np.sum(np.abs(np.linalg.eigvalsh(compress))))

    return SpectralReport(
        energy=float(energy),
        eigenvalues=[float(v) for v in evals],
        zero_space_dimension=zero_dim,
        zero_tolerance=float(tol),
        min_eigenvalue=float(evals[0]),
        ensemble_residual=residual,
        ensemble_projection_deficit=deficit,
        zero_modes=zero_modes,
    )


# ---------------------------------------------------------------------------
# Definite-energy ensemble construction
# ---------------------------------------------------------------------------

def _free_mode_weights(h: ClassicalPolynomial):
    """Return per-mode positive weights when h = sum_j w_j |al_j|^2, else None."""
    weights = {}
    for key, coeff in h.terms.items():
        active = [(m, jk) for m, jk in enumerate(key) if jk != (0, 0)]
        if len(active) != 1 or active[0][1] != (1, 1):
            return None
        z = complex(coeff)
        if abs(z.imag) > 1e-12 or z.real <= 0:
            return None
        weights[active[0][0]] = z.real
    if not weights:
        return None
    return weights


def _wirtinger_gradient(h: ClassicalPolynomial, amplitudes):
    return np.array(
        [evaluate_classical(h.derivative(j), amplitudes) for j in range(h.n_modes)]
    )


def level_set_sampler(h: ClassicalPolynomial, energy: float, count: int,
                      seed: int, scale: float = 1.0,
                      level_tol: float = 1e-10) -> WeightedEnsemble:
    """Uniformly weighted states on the level set h(s) = E.

    Free Hamiltonians (sum of w_j |al_j|^2) get exact samples: actions drawn
    from the energy simplex, phases uniform on the torus.  General real h is
    sampled by Newton-projecting random states onto the level set along the
    gradient until |h - E| <= level_tol.
    """
    _require_real(h)
    if count < 1:
        raise ValidationError("need at least one sample")
    rng = np.random.default_rng(seed)
    n = h.n_modes
    states = []

    weights = _free_mode_weights(h)
    if weights is not None:
        modes = sorted(weights)
        for _ in range(count):
            actions = rng.dirichlet(np.ones(len(modes))) * energy
            phases = rng.uniform(0.0, 2.0 * math.pi, size=len(modes))
            amps = [0j] * n
            for (mode, x, th) in zip(modes, actions, phases):
                amps[mode] = math.sqrt(x / weights[mode]) * complex(math.cos(th), math.sin(th))
            states.append(ClassicalState(amps))
        return WeightedEnsemble.uniform(states)

    attempts = 0
    while len(states) < count:
        attempts += 1
        if attempts > 50 * count:
            raise ValidationError(
                f"level-set projection failed to converge for energy {energy!r}"
            )
        amps = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * scale
        ok = False
        for _ in range(100):
            g = complex(evaluate_classical(h, amps)).real - energy
            if abs(g) <= level_tol:
                ok = True
                break
            d = _wirtinger_gradient(h, amps)
            # real-coordinate gradient of h is 2*conj(d); step along it
            norm_sq = 4.0 * float(np.sum(np.abs(d) ** 2))
            if norm_sq < 1e-20:
                break
            amps = amps - g * 2.0 * np.conj(d) / norm_sq
        if ok:
            states.append(ClassicalState(amps))
    return WeightedEnsemble.uniform(states)


def classical_image_min(h: ClassicalPolynomial, energy: float, basis: FockBasis,
                        states=None, count: int = 8, seed: int = 0,
                        tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """Minimum of Tr(M(E) rho) over mixtures of sampled coherent projectors.

    The functional is linear in the mixture weights, so the minimum over the
    convex hull of the sampled states is attained at a vertex: it equals the
    smallest single-state expectation <alpha_i|M(E)|alpha_i>.  The trace
    theorem pins each of those at (h(s_i) - E)^2 >= 0, so up to truncation
    error this probes the nonnegativity of the operator over the classical
    image (superpositions of the same coherent states are NOT covered and do
    dip negative).
    """
    if states is None:
        states = [s for _, s in level_set_sampler(h, energy, count, seed).members]
    m = build_matrix(build_M(h, energy), basis)
    values = [
        expectation(m, coherent_state(s, basis, tail_tol=tail_tol)).real
        for s in states
    ]
    return min(values)

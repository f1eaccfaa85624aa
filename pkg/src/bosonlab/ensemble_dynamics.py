"""Hamiltonian flows, phase-space incompressibility and Boltzmann ensembles.

Systems are either Hamiltonian (a real polynomial H(phi, pi), flow
phi_dot = dH/dpi, pi_dot = -dH/dphi) or general vector fields, supplied
as per-component polynomials (exact symbolic divergence) or as a callable
(finite-difference divergence).  Separable Hamiltonians integrate with a
second-order kick-drift-kick splitting; general systems use classic RK4.

For a Hamiltonian with normalizable exp(-k H), `boltzmann_sample` draws a
seeded Metropolis chain, and `invariance_test` checks that moments do not
drift under the flow.  The drift test says nothing about ergodicity; it
only certifies that the sampled measure is (statistically) invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import scalars
from .errors import BlowUpError, ValidationError
from .operator_algebra import ClassicalPolynomial, OperatorPolynomial, normal_product
from .phase_space import PhaseSpacePolynomial

BLOWUP_LIMIT = 1e12
FD_STEP = 1e-5
INCOMPRESSIBILITY_TOL = 1e-7

ERGODICITY_NOTE = (
    "invariance of sample moments was tested; ergodicity of the flow was not"
)


class OdeSystem:
    """Phase-space flow on n pairs of conjugate coordinates."""

    __slots__ = ("pairs", "kind", "hamiltonian", "field_polys", "field_fn",
                 "_dphi", "_dpi")

    def __init__(self, pairs, kind, hamiltonian=None, field_polys=None, field_fn=None):
        self.pairs = pairs
        self.kind = kind
        self.hamiltonian = hamiltonian
        self.field_polys = field_polys
        self.field_fn = field_fn
        if hamiltonian is not None:
            self._dphi = [hamiltonian.d_pi(i) for i in range(pairs)]
            self._dpi = [hamiltonian.d_phi(i).scale(-1) for i in range(pairs)]
        elif field_polys is not None:
            self._dphi = field_polys[:pairs]
            self._dpi = field_polys[pairs:]
        else:
            self._dphi = self._dpi = None

    @classmethod
    def from_hamiltonian(cls, h: PhaseSpacePolynomial) -> "OdeSystem":
        if not h.is_real():
            raise ValidationError("Hamiltonian must have real coefficients")
        return cls(h.pairs, "hamiltonian", hamiltonian=h)

    @classmethod
    def from_field_polynomials(cls, polys) -> "OdeSystem":
        polys = list(polys)
        if not polys or len(polys) % 2:
            raise ValidationError("need phi-dot and pi-dot polynomials, one per coordinate")
        pairs = len(polys) // 2
        for p in polys:
            if p.pairs != pairs:
                raise ValidationError("component polynomials disagree on the pair count")
        return cls(pairs, "general", field_polys=polys)

    @classmethod
    def from_callable(cls, fn: Callable, pairs: int) -> "OdeSystem":
        return cls(pairs, "general", field_fn=fn)

    def flow(self, phi, pi):
        """Vector field at (phi, pi); broadcasts over leading sample axes."""
        if self.field_fn is not None:
            dphi, dpi = self.field_fn(phi, pi)
            return np.asarray(dphi, dtype=float), np.asarray(dpi, dtype=float)
        phi = np.asarray(phi, dtype=float)
        pi = np.asarray(pi, dtype=float)
        dphi = np.stack([p.evaluate(phi, pi) for p in self._dphi], axis=-1)
        dpi = np.stack([p.evaluate(phi, pi) for p in self._dpi], axis=-1)
        return dphi, dpi


@dataclass
class FlowEnsemble:
    """Sample cloud on phase space; weights uniform unless given."""

    phi: np.ndarray
    pi: np.ndarray
    weights: Optional[np.ndarray] = None
    seed: Optional[int] = None

    def __post_init__(self):
        self.phi = np.atleast_2d(np.asarray(self.phi, dtype=float))
        self.pi = np.atleast_2d(np.asarray(self.pi, dtype=float))
        if self.phi.shape != self.pi.shape:
            raise ValidationError("phi and pi sample shapes differ")
        if self.weights is None:
            n = self.phi.shape[0]
            self.weights = np.full(n, 1.0 / n)
        else:
            self.weights = np.asarray(self.weights, dtype=float)

    @property
    def size(self) -> int:
        return self.phi.shape[0]

    @property
    def pairs(self) -> int:
        return self.phi.shape[1]


def divergence_polynomial(sys: OdeSystem) -> PhaseSpacePolynomial:
    """Symbolic phase-space divergence; identically zero for Hamiltonian flows."""
    if sys._dphi is None:
        raise ValidationError("no symbolic form available for callable vector fields")
    div = PhaseSpacePolynomial.zero(sys.pairs)
    for i in range(sys.pairs):
        div = div + sys._dphi[i].d_phi(i) + sys._dpi[i].d_pi(i)
    return div


def divergence(sys: OdeSystem, point) -> float:
    """Divergence of the flow at one point.

    Polynomial systems evaluate the symbolic divergence (exact up to
    arithmetic); callable fields use central differences with step 1e-5.
    """
    phi, pi = point
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    pi = np.atleast_1d(np.asarray(pi, dtype=float))
    if sys._dphi is not None:
        value = float(np.asarray(divergence_polynomial(sys).evaluate(phi, pi)).reshape(()))
        return value
    total = 0.0
    for i in range(sys.pairs):
        for block, coords in ((0, phi), (1, pi)):
            plus = coords.copy()
            minus = coords.copy()
            plus[i] += FD_STEP
            minus[i] -= FD_STEP
            if block == 0:
                fp = sys.flow(plus, pi)[0][i]
                fm = sys.flow(minus, pi)[0][i]
            else:
                fp = sys.flow(phi, plus)[1][i]
                fm = sys.flow(phi, minus)[1][i]
            if not (np.isfinite(fp) and np.isfinite(fm)):
                raise ValidationError("vector field is not finite near the point")
            total += (fp - fm) / (2.0 * FD_STEP)
    return float(total)


def is_statistically_incompressible(sys: OdeSystem, sample_points) -> tuple[bool, float]:
    """(flag, max |divergence|) over the sample points.

    The flag is True when the maximum divergence magnitude is at most 1e-7;
    for polynomial systems whose symbolic divergence cancels exactly the
    maximum is exactly zero.
    """
    sample_points = list(sample_points)
    if not sample_points:
        raise ValidationError("need at least one sample point")
    worst = max(abs(divergence(sys, p)) for p in sample_points)
    return worst <= INCOMPRESSIBILITY_TOL, worst


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------

def _check_blowup(phi, pi):
    peak = max(float(np.max(np.abs(phi))), float(np.max(np.abs(pi))))
    if not np.isfinite(peak) or peak > BLOWUP_LIMIT:
        raise BlowUpError(f"coordinate magnitude reached {peak:.3e}")


def _leapfrog_steps(grad_v, grad_t, phi, pi, steps, dt):
    pi = pi - 0.5 * dt * grad_v(phi)
    for step in range(steps):
        phi = phi + dt * grad_t(pi)
        if step + 1 < steps:
            pi = pi - dt * grad_v(phi)
        _check_blowup(phi, pi)
    pi = pi - 0.5 * dt * grad_v(phi)
    return phi, pi


def evolve(sys: OdeSystem, e: FlowEnsemble, horizon: float, dt: float) -> FlowEnsemble:
    """Advance every sample by the horizon time.

    Hamiltonian systems must be separable (H = T(pi) + V(phi)) and use the
    second-order splitting integrator; general systems use RK4.  Any
    coordinate exceeding 1e12 aborts with BlowUpError.
    """
    if dt <= 0:
        raise ValidationError("dt must be positive")
    if e.pairs != sys.pairs:
        raise ValidationError("ensemble and system dimensions differ")
    phi = e.phi.copy()
    pi = e.pi.copy()
    if horizon == 0:
        return FlowEnsemble(phi, pi, weights=e.weights.copy(), seed=e.seed)

    full_steps = int(horizon / dt)
    remainder = horizon - full_steps * dt

    if sys.kind == "hamiltonian":
        t_part, v_part = sys.hamiltonian.split_separable()
        t_grads = [t_part.d_pi(i) for i in range(sys.pairs)]
        v_grads = [v_part.d_phi(i) for i in range(sys.pairs)]

        def grad_t(pi_arr):
            return np.stack([g.evaluate(phi * 0.0, pi_arr) for g in t_grads], axis=-1)

        def grad_v(phi_arr):
            return np.stack([g.evaluate(phi_arr, pi * 0.0) for g in v_grads], axis=-1)

        if full_steps:
            phi, pi = _leapfrog_steps(grad_v, grad_t, phi, pi, full_steps, dt)
        if remainder > 1e-15 * max(1.0, abs(horizon)):
            phi, pi = _leapfrog_steps(grad_v, grad_t, phi, pi, 1, remainder)
        return FlowEnsemble(phi, pi, weights=e.weights.copy(), seed=e.seed)

    def rk4_step(phi, pi, h):
        k1p, k1q = sys.flow(phi, pi)
        k2p, k2q = sys.flow(phi + 0.5 * h * k1p, pi + 0.5 * h * k1q)
        k3p, k3q = sys.flow(phi + 0.5 * h * k2p, pi + 0.5 * h * k2q)
        k4p, k4q = sys.flow(phi + h * k3p, pi + h * k3q)
        return (
            phi + h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p),
            pi + h / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q),
        )

    for _ in range(full_steps):
        phi, pi = rk4_step(phi, pi, dt)
        _check_blowup(phi, pi)
    if remainder > 1e-15 * max(1.0, abs(horizon)):
        phi, pi = rk4_step(phi, pi, remainder)
        _check_blowup(phi, pi)
    return FlowEnsemble(phi, pi, weights=e.weights.copy(), seed=e.seed)


# ---------------------------------------------------------------------------
# Boltzmann sampling
# ---------------------------------------------------------------------------

def _check_normalizable(h: PhaseSpacePolynomial):
    """Sufficient condition for exp(-kH) to be normalizable.

    Requires a positive-definite quadratic part and, beyond degree 2, only
    even monomials with nonnegative real coefficients.
    """
    quad = h.quadratic_part_matrix()
    if float(np.min(np.linalg.eigvalsh(quad))) <= 0:
        raise ValidationError("quadratic part of H is not positive definite")
    for key, coeff in h.terms.items():
        if sum(key) <= 2:
            continue
        z = complex(coeff)
        if any(p % 2 for p in key) or z.real < 0 or abs(z.imag) > 1e-12:
            raise ValidationError(
                "higher-degree terms must be even monomials with nonnegative coefficients"
            )


def boltzmann_sample(sys: OdeSystem, k: float, count: int, seed: int,
                     burn_in: int = 2000, thin: int = 10) -> FlowEnsemble:
    """Metropolis samples from the density proportional to exp(-k H).

    Isotropic Gaussian proposals, with the step scale tuned to a 20-40%
    acceptance rate during burn-in.  Fully determined by the seed.
    """
    if k <= 0:
        raise ValidationError("k must be positive (otherwise exp(-kH) is not normalizable)")
    if sys.hamiltonian is None:
        raise ValidationError("Boltzmann sampling needs a polynomial Hamiltonian")
    if count < 1:
        raise ValidationError("need at least one sample")
    h = sys.hamiltonian
    _check_normalizable(h)
    rng = np.random.default_rng(seed)
    n = 2 * sys.pairs

    def energy(x):
        return float(h.evaluate(x[: sys.pairs], x[sys.pairs :]))

    x = np.zeros(n)
    e_x = energy(x)
    sigma = 1.0 / math.sqrt(k)
    accepted_window = 0
    window = 0

    def step(x, e_x, sigma):
        proposal = x + sigma * rng.standard_normal(n)
        e_p = energy(proposal)
        if e_p <= e_x or rng.random() < math.exp(-k * (e_p - e_x)):
            return proposal, e_p, True
        return x, e_x, False

    for i in range(burn_in):
        x, e_x, ok = step(x, e_x, sigma)
        accepted_window += ok
        window += 1
        if window == 100:
            rate = accepted_window / window
            if rate < 0.20:
                sigma *= 0.8
            elif rate > 0.40:
                sigma *= 1.25
            accepted_window = 0
            window = 0

    phi = np.empty((count, sys.pairs))
    pi = np.empty((count, sys.pairs))
    accepted = 0
    total = 0
    for i in range(count):
        for _ in range(thin):
            x, e_x, ok = step(x, e_x, sigma)
            accepted += ok
            total += 1
        phi[i] = x[: sys.pairs]
        pi[i] = x[sys.pairs :]
    ens = FlowEnsemble(phi, pi, seed=seed)
    return ens


def gaussian_oracle_moments(h: PhaseSpacePolynomial, k: float) -> Optional[dict]:
    """Closed-form Boltzmann moments for purely quadratic H (else None).

    For H = x^T A x / 2 the covariance is (kA)^(-1); returns the mean energy
    and every <phi_i^2>, <pi_i^2>.
    """
    if h.has_linear_part() or any(sum(key) > 2 for key in h.terms):
        return None
    a = h.quadratic_part_matrix()
    if float(np.min(np.linalg.eigvalsh(a))) <= 0:
        return None
    cov = np.linalg.inv(k * a)
    n = h.pairs
    const = complex(h.terms.get((0,) * (2 * n), 0)).real
    moments = {"mean_energy": 0.5 * float(np.trace(a @ cov)) + const}
    for i in range(n):
        moments[f"phi{i}^2"] = float(cov[i, i])
        moments[f"pi{i}^2"] = float(cov[n + i, n + i])
    return moments


# ---------------------------------------------------------------------------
# Invariance test
# ---------------------------------------------------------------------------

@dataclass
class MomentDrift:
    name: str
    before: float
    after: float
    drift: float
    standard_error: float
    significant: bool


@dataclass
class InvarianceReport:
    horizon: float
    moments: list
    max_divergence: float
    note: str = ERGODICITY_NOTE

    @property
    def invariant(self) -> bool:
        return not any(m.significant for m in self.moments)

    def as_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "moments": [
                {
                    "name": m.name,
                    "before": m.before,
                    "after": m.after,
                    "drift": m.drift,
                    "standard_error": m.standard_error,
                    "significant": m.significant,
                }
                for m in self.moments
            ],
            "max_divergence": self.max_divergence,
            "invariant": self.invariant,
            "note": self.note,
        }


def _paired_drift(name, before, after) -> MomentDrift:
    diff = after - before
    drift = float(np.mean(diff))
    if diff.size > 1:
        se = float(np.std(diff, ddof=1) / math.sqrt(diff.size))
    else:
        se = 0.0
    significant = abs(drift) > 3.0 * se
    return MomentDrift(name, float(np.mean(before)), float(np.mean(after)),
                       drift, se, significant)


def invariance_test(sys: OdeSystem, e: FlowEnsemble, horizon: float,
                    dt: float = 1e-3) -> InvarianceReport:
    """Evolve the ensemble and compare pre/post moments pairwise.

    Drifts beyond three standard errors of the per-sample differences are
    flagged significant.  Checks invariance of the sampled measure only --
    see the report note.
    """
    if e.size < 1:
        raise ValidationError("ensemble is empty")
    evolved = evolve(sys, e, horizon, dt)
    moments = []
    if sys.hamiltonian is not None:
        h_before = np.asarray(sys.hamiltonian.evaluate(e.phi, e.pi), dtype=float)
        h_after = np.asarray(sys.hamiltonian.evaluate(evolved.phi, evolved.pi), dtype=float)
        moments.append(_paired_drift("mean_energy", h_before, h_after))
    for i in range(sys.pairs):
        moments.append(_paired_drift(f"phi{i}^2", e.phi[:, i] ** 2, evolved.phi[:, i] ** 2))
        moments.append(_paired_drift(f"pi{i}^2", e.pi[:, i] ** 2, evolved.pi[:, i] ** 2))
    sample_limit = min(e.size, 32)
    divs = [
        abs(divergence(sys, (e.phi[i], e.pi[i])))
        for i in range(sample_limit)
    ] if sys._dphi is not None or sys.field_fn is not None else []
    max_div = max(divs) if divs else 0.0
    return InvarianceReport(horizon=float(horizon), moments=moments, max_divergence=max_div)


# ---------------------------------------------------------------------------
# Dual operator representation
# ---------------------------------------------------------------------------

def dual_operator(k, h: ClassicalPolynomial, order: int) -> OperatorPolynomial:
    """Truncated normal-product quantization of exp(-k h).

    Expands exp(-k h) classically to the requested order in (k h) and maps
    each power term by term as a normal product.  Hermitian for real h.
    The remainder against Tr(F rho(s)) is bounded by
    (k h(s))^(order+1) / (order+1)! for h(s) >= 0.
    """
    if order < 0:
        raise ValidationError("order must be nonnegative")
    if isinstance(k, (int, Fraction)):
        k = scalars.exact(k)
    out = OperatorPolynomial.constant(1, h.n_modes)
    power = ClassicalPolynomial.constant(1, h.n_modes)
    coeff = scalars.exact(1)
    for m in range(1, order + 1):
        power = power * h
        coeff = coeff * (-1) * k / m
        out = out + normal_product(power).scale(coeff)
    return out


# ---------------------------------------------------------------------------
# Snapshot text format: one sample per record, phi coordinates then pi
# ---------------------------------------------------------------------------

def snapshot_to_text(e: FlowEnsemble) -> str:
    lines = []
    for i in range(e.size):
        cols = [repr(float(v)) for v in e.phi[i]] + [repr(float(v)) for v in e.pi[i]]
        lines.append(" ".join(cols))
    return "\n".join(lines) + "\n"


def snapshot_from_text(text: str) -> FlowEnsemble:
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        vals = [float(x) for x in line.split()]
        if len(vals) % 2:
            raise ValidationError("each record needs equally many phi and pi values")
        rows.append(vals)
    if not rows:
        raise ValidationError("snapshot holds no samples")
    arr = np.array(rows)
    n = arr.shape[1] // 2
    return FlowEnsemble(arr[:, :n], arr[:, n:])

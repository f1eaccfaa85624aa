"""Finite-mode scalar fields on a 1-D periodic lattice.

A configuration holds real field values phi and conjugate momenta pi on d
sites for each field component.  The orthonormal real Fourier basis
(constant, cosine/sine pairs, Nyquist) turns a configuration into complex
mode amplitudes

    alpha = sqrt(w/2) * phi_hat + i * pi_hat / sqrt(2 w),

with the lattice dispersion w = sqrt(m^2 + p_hat^2) and the forward-
difference momentum p_hat = 2 sin(pi k / d) / spacing.  Under this scaling
the free Hamiltonian is exactly sum_k w_k |alpha_k|^2, which is what makes
the quantized energy checks hold without stray constants.

Positive masses are required: the momentum scaling divides by sqrt(w).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, ValidationError
from .expressions import parse_phase_space
from .operator_algebra import ClassicalPolynomial, ClassicalState, normal_product
from .phase_space import PhaseSpacePolynomial

MAX_INTERACTION_DEGREE = 4


@dataclass(frozen=True)
class LatticeModel:
    """Periodic 1-D lattice of scalar field components.

    `interaction` is a local polynomial in phiJ/piJ (J indexes the field
    component), applied at every site and summed with the lattice measure.
    """

    sites: int
    masses: tuple
    spacing: float = 1.0
    interaction: Optional[PhaseSpacePolynomial] = None

    def __post_init__(self):
        if self.sites < 1:
            raise ValidationError("need at least one lattice site")
        if self.spacing <= 0:
            raise ValidationError("lattice spacing must be positive")
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))
        if not self.masses or any(m <= 0 for m in self.masses):
            raise ValidationError("all masses must be positive (massless modes excluded)")
        if self.interaction is not None:
            if self.interaction.pairs != self.field_count:
                raise ValidationError(
                    "interaction polynomial must use one (phi, pi) pair per field component"
                )
            if not self.interaction.is_real():
                raise ValidationError("interaction must have real coefficients")
            if self.interaction.degree() > MAX_INTERACTION_DEGREE:
                raise ValidationError(
                    f"interaction degree exceeds {MAX_INTERACTION_DEGREE}"
                )

    @property
    def field_count(self) -> int:
        return len(self.masses)

    @property
    def n_modes(self) -> int:
        return self.field_count * self.sites


class FieldConfiguration:
    """Real phi and pi values, shape (field_count, sites)."""

    __slots__ = ("phi", "pi")

    def __init__(self, phi, pi):
        self.phi = np.atleast_2d(np.asarray(phi, dtype=float))
        self.pi = np.atleast_2d(np.asarray(pi, dtype=float))
        if self.phi.shape != self.pi.shape:
            raise ValidationError("phi and pi shapes differ")
        if not (np.all(np.isfinite(self.phi)) and np.all(np.isfinite(self.pi))):
            raise ValidationError("field values must be finite")


def _real_dft_matrix(d: int) -> np.ndarray:
    """Columns are the orthonormal real Fourier modes on d sites."""
    u = np.zeros((d, d))
    x = np.arange(d)
    u[:, 0] = 1.0 / math.sqrt(d)
    col = 1
    for nu in range(1, d // 2 + 1):
        if 2 * nu == d:
            u[:, col] = np.cos(math.pi * x) / math.sqrt(d)
            col += 1
        else:
            u[:, col] = np.sqrt(2.0 / d) * np.cos(2.0 * math.pi * nu * x / d)
            u[:, col + 1] = np.sqrt(2.0 / d) * np.sin(2.0 * math.pi * nu * x / d)
            col += 2
    return u


def _momentum_numbers(d: int) -> list[int]:
    """Momentum index nu for each real-basis column (same order as the matrix)."""
    nums = [0]
    for nu in range(1, d // 2 + 1):
        if 2 * nu == d:
            nums.append(nu)
        else:
            nums += [nu, nu]
    return nums


class ModeTransform:
    """Invertible map between field configurations and mode amplitudes."""

    __slots__ = ("model", "basis_matrix", "frequencies")

    def __init__(self, model: LatticeModel):
        self.model = model
        d = model.sites
        self.basis_matrix = _real_dft_matrix(d)
        nums = _momentum_numbers(d)
        freqs = np.zeros((model.field_count, d))
        for j, mass in enumerate(model.masses):
            for k, nu in enumerate(nums):
                p_hat = 2.0 * abs(math.sin(math.pi * nu / d)) / model.spacing
                freqs[j, k] = math.sqrt(mass**2 + p_hat**2)
        self.frequencies = freqs

    def forward(self, cfg: FieldConfiguration) -> ClassicalState:
        model = self.model
        if cfg.phi.shape != (model.field_count, model.sites):
            raise ValidationError(
                f"configuration shape {cfg.phi.shape} does not match model "
                f"({model.field_count}, {model.sites})"
            )
        root_sp = math.sqrt(model.spacing)
        amps = []
        for j in range(model.field_count):
            phi_hat = self.basis_matrix.T @ cfg.phi[j] * root_sp
            pi_hat = self.basis_matrix.T @ cfg.pi[j] * root_sp
            w = self.frequencies[j]
            amps.extend(np.sqrt(w / 2.0) * phi_hat + 1j * pi_hat / np.sqrt(2.0 * w))
        return ClassicalState(amps)

    def inverse(self, state: ClassicalState) -> FieldConfiguration:
        model = self.model
        if state.n_modes != model.n_modes:
            raise ValidationError("state mode count does not match model")
        amps = np.asarray(state.amplitudes).reshape(model.field_count, model.sites)
        root_sp = math.sqrt(model.spacing)
        phi = np.zeros((model.field_count, model.sites))
        pi = np.zeros((model.field_count, model.sites))
        for j in range(model.field_count):
            w = self.frequencies[j]
            phi_hat = np.sqrt(2.0 / w) * amps[j].real
            pi_hat = np.sqrt(2.0 * w) * amps[j].imag
            phi[j] = self.basis_matrix @ phi_hat / root_sp
            pi[j] = self.basis_matrix @ pi_hat / root_sp
        return FieldConfiguration(phi, pi)


def mode_variables(cfg: FieldConfiguration, model: LatticeModel) -> ClassicalState:
    return ModeTransform(model).forward(cfg)


def field_energy(cfg: FieldConfiguration, model: LatticeModel) -> float:
    """Direct real-space energy of the discretized Hamiltonian.

    spacing * sum_x [ pi^2/2 + (forward-difference phi)^2/2 + m^2 phi^2/2
    + f(phi(x), pi(x)) ], with periodic wrap.  Independent of the mode
    decomposition; pins down all scaling conventions.
    """
    total = 0.0
    for j, mass in enumerate(model.masses):
        phi = cfg.phi[j]
        pi = cfg.pi[j]
        grad = (np.roll(phi, -1) - phi) / model.spacing
        total += 0.5 * float(np.sum(pi**2 + grad**2 + mass**2 * phi**2))
    if model.interaction is not None:
        values = model.interaction.evaluate(cfg.phi.T, cfg.pi.T)
        total += float(np.sum(values))
    return model.spacing * total


def classical_hamiltonian(model: LatticeModel) -> ClassicalPolynomial:
    """Full Hamiltonian as a polynomial in the mode amplitudes.

    The free part is exactly sum w |alpha|^2.  Interactions substitute the
    site-local field operators (linear forms in alpha, conj(alpha)) into the
    interaction polynomial and sum over sites with the lattice measure.
    """
    transform = ModeTransform(model)
    n_modes = model.n_modes
    h = ClassicalPolynomial.zero(n_modes)
    for j in range(model.field_count):
        for k in range(model.sites):
            mode = j * model.sites + k
            term = ClassicalPolynomial.monomial(
                [(1, 1) if m == mode else (0, 0) for m in range(n_modes)],
                coeff=transform.frequencies[j, k],
            )
            h = h + term
    if model.interaction is None:
        return h

    u = transform.basis_matrix
    root_sp = math.sqrt(model.spacing)
    for x in range(model.sites):
        images = []
        # phi_j(x) and pi_j(x) as linear forms in the mode variables
        for j in range(model.field_count):
            poly = ClassicalPolynomial.zero(n_modes)
            for k in range(model.sites):
                mode = j * model.sites + k
                w = transform.frequencies[j, k]
                coeff = u[x, k] / (root_sp * math.sqrt(2.0 * w))
                al = ClassicalPolynomial.variable(mode, n_modes)
                alc = ClassicalPolynomial.variable(mode, n_modes, conjugated=True)
                poly = poly + (al + alc).scale(coeff)
            images.append(poly)
        for j in range(model.field_count):
            poly = ClassicalPolynomial.zero(n_modes)
            for k in range(model.sites):
                mode = j * model.sites + k
                w = transform.frequencies[j, k]
                coeff = u[x, k] * math.sqrt(w / 2.0) / root_sp
                al = ClassicalPolynomial.variable(mode, n_modes)
                alc = ClassicalPolynomial.variable(mode, n_modes, conjugated=True)
                poly = poly + (al - alc).scale(complex(0.0, -coeff))
            images.append(poly)
        h = h + model.interaction.substitute(images).scale(model.spacing)
    return h


def normal_hamiltonian(model: LatticeModel):
    """Normal-product quantization of the lattice Hamiltonian (no zero point)."""
    return normal_product(classical_hamiltonian(model))


def phase_space_hamiltonian(model: LatticeModel) -> PhaseSpacePolynomial:
    """Real-space Hamiltonian as a polynomial in the site variables.

    Coordinate pairs are ordered (component, site); useful for feeding the
    lattice flow into the phase-space dynamics machinery.
    """
    pairs = model.n_modes
    d = model.sites

    def phi_at(j, x):
        return PhaseSpacePolynomial.phi(j * d + (x % d), pairs)

    def pi_at(j, x):
        return PhaseSpacePolynomial.pi(j * d + (x % d), pairs)

    h = PhaseSpacePolynomial.zero(pairs)
    inv_sp2 = 1.0 / model.spacing**2
    for j, mass in enumerate(model.masses):
        for x in range(d):
            grad = phi_at(j, x + 1) - phi_at(j, x)
            h = h + pi_at(j, x) * pi_at(j, x) * 0.5 \
                + grad * grad * (0.5 * inv_sp2) \
                + phi_at(j, x) * phi_at(j, x) * (0.5 * mass**2)
    if model.interaction is not None:
        for x in range(d):
            images = [phi_at(j, x) for j in range(model.field_count)] + [
                pi_at(j, x) for j in range(model.field_count)
            ]
            h = h + model.interaction.substitute(images)
    return h.scale(model.spacing)


def random_configuration(model: LatticeModel, rng, scale: float = 0.3) -> FieldConfiguration:
    shape = (model.field_count, model.sites)
    return FieldConfiguration(rng.normal(0.0, scale, shape), rng.normal(0.0, scale, shape))


# ---------------------------------------------------------------------------
# Model file: key = value lines
# ---------------------------------------------------------------------------

def load_model(text: str):
    """Parse a model config; returns (LatticeModel, cutoffs or None).

    Keys: sites, spacing, masses (space-separated), interaction (phiJ/piJ
    expression, optional), cutoffs (space-separated per mode, optional).
    """
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        entries[key.strip().lower()] = value.strip()
    try:
        sites = int(entries["sites"])
        masses = [float(x) for x in entries["masses"].split()]
    except KeyError as exc:
        raise ConfigError(f"missing required model key {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"bad numeric value in model file: {exc}") from exc
    spacing = float(entries.get("spacing", "1.0"))
    interaction = None
    if entries.get("interaction"):
        interaction = parse_phase_space(entries["interaction"], len(masses))
    cutoffs = None
    if entries.get("cutoffs"):
        cutoffs = [int(x) for x in entries["cutoffs"].split()]
    model = LatticeModel(sites=sites, masses=tuple(masses), spacing=spacing,
                         interaction=interaction)
    if cutoffs is not None and len(cutoffs) not in (1, model.n_modes):
        raise ConfigError("cutoffs must list one value or one per mode")
    return model, cutoffs

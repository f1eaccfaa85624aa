"""Dense numerics on a truncated multi-mode Fock space.

Matrices use the standard ladder elements a|n> = sqrt(n)|n-1>,
a^H|n> = sqrt(n+1)|n+1> per mode with tensor-product structure; mode 0 is
the slowest-varying index.  Everything is dense and double precision, with
a configurable dimension cap to keep eigendecomposition tractable.
"""

from __future__ import annotations

import math
from functools import reduce
from typing import Sequence

import numpy as np
from scipy.special import gammainc

from .errors import (
    DimensionLimitError,
    ModeMismatchError,
    NotHermitianError,
    TruncationError,
    ValidationError,
)
from .operator_algebra import OperatorPolynomial

DEFAULT_DIMENSION_LIMIT = 20_000
#: Default ceiling on the coherent-state tail mass left above the cutoffs.
DEFAULT_TAIL_TOL = 1e-6

HERMITIAN_TOL = 1e-10


class FockBasis:
    """Truncated occupation basis with per-mode cutoffs (0..n_max inclusive)."""

    __slots__ = ("cutoffs", "dims", "total_dimension")

    def __init__(self, cutoffs: Sequence[int], dimension_limit: int = DEFAULT_DIMENSION_LIMIT):
        cutoffs = tuple(int(c) for c in cutoffs)
        if not cutoffs or any(c < 1 for c in cutoffs):
            raise ValidationError("every cutoff must be >= 1")
        self.cutoffs = cutoffs
        self.dims = tuple(c + 1 for c in cutoffs)
        self.total_dimension = math.prod(self.dims)
        if self.total_dimension > dimension_limit:
            raise DimensionLimitError(
                f"total dimension {self.total_dimension} exceeds limit {dimension_limit}"
            )

    @property
    def n_modes(self) -> int:
        return len(self.cutoffs)

    def index_of(self, occupation: Sequence[int]) -> int:
        idx = 0
        for n, dim in zip(occupation, self.dims):
            if not 0 <= n < dim:
                raise ValidationError(f"occupation {tuple(occupation)} outside cutoffs")
            idx = idx * dim + n
        return idx

    def occupation_of(self, index: int) -> tuple[int, ...]:
        occ = []
        for dim in reversed(self.dims):
            occ.append(index % dim)
            index //= dim
        return tuple(reversed(occ))

    def __eq__(self, other):
        return isinstance(other, FockBasis) and self.cutoffs == other.cutoffs

    __hash__ = None

    def __repr__(self):
        return f"FockBasis(cutoffs={self.cutoffs})"


class FockVector:
    """Complex state vector over a FockBasis."""

    __slots__ = ("components", "basis", "truncation_deficit")

    def __init__(self, components, basis: FockBasis, truncation_deficit=None):
        components = np.asarray(components, dtype=complex)
        if components.shape != (basis.total_dimension,):
            raise ValidationError("component length does not match basis dimension")
        if not np.all(np.isfinite(components)):
            raise ValidationError("vector has non-finite entries")
        self.components = components
        self.basis = basis
        # L2 mass the untruncated state carried above the cutoffs, when known
        self.truncation_deficit = truncation_deficit

    def norm(self) -> float:
        return float(np.linalg.norm(self.components))

    def inner(self, other: "FockVector") -> complex:
        return complex(np.vdot(self.components, other.components))

    def __repr__(self):
        return f"<FockVector dim={self.basis.total_dimension}>"


class FockMatrix:
    """Dense complex matrix over a FockBasis."""

    __slots__ = ("data", "basis", "hermitian")

    def __init__(self, data, basis: FockBasis, hermitian: bool = False):
        data = np.asarray(data, dtype=complex)
        dim = basis.total_dimension
        if data.shape != (dim, dim):
            raise ValidationError("matrix shape does not match basis dimension")
        if hermitian:
            asym = float(np.max(np.abs(data - data.conj().T))) if dim else 0.0
            if asym > HERMITIAN_TOL:
                raise NotHermitianError(
                    f"matrix flagged hermitian but max |M - M^H| = {asym:.3e}"
                )
        self.data = data
        self.basis = basis
        self.hermitian = hermitian

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def __repr__(self):
        return f"<FockMatrix dim={self.basis.total_dimension} hermitian={self.hermitian}>"


# ---------------------------------------------------------------------------
# Operators and states
# ---------------------------------------------------------------------------

def _mode_monomial_matrix(c: int, a: int, dim: int) -> np.ndarray:
    """Matrix of (a^H)^c a^a on one mode; transitions above the cutoff drop."""
    m = np.zeros((dim, dim))
    for n in range(a, dim):
        target = n - a + c
        if target >= dim:
            continue
        val = 1.0
        for t in range(a):
            val *= n - t
        for t in range(1, c + 1):
            val *= n - a + t
        m[target, n] = math.sqrt(val)
    return m


def build_matrix(p: OperatorPolynomial, basis: FockBasis) -> FockMatrix:
    """Dense matrix of a canonical operator polynomial."""
    if p.n_modes != basis.n_modes:
        raise ModeMismatchError(
            f"polynomial has {p.n_modes} modes, basis has {basis.n_modes}"
        )
    dim = basis.total_dimension
    total = np.zeros((dim, dim), dtype=complex)
    for key, coeff in p.terms.items():
        mats = [
            _mode_monomial_matrix(c, a, d) if (c or a) else np.eye(d)
            for (c, a), d in zip(key, basis.dims)
        ]
        total += complex(coeff) * reduce(np.kron, mats)
    return FockMatrix(total, basis, hermitian=p.is_hermitian())


def truncation_bound(s, basis: FockBasis) -> float:
    """Upper bound on the coherent-state L2 mass above the cutoffs.

    Per mode the occupation distribution is Poisson with mean |alpha|^2, so
    the truncated mass is 1 - prod_j P(N_j <= cutoff_j); the per-mode tails
    are regularized incomplete gamma values.  Monotone decreasing in every
    cutoff.
    """
    amplitudes = list(s)
    if len(amplitudes) != basis.n_modes:
        raise ModeMismatchError("state and basis mode counts differ")
    head = 1.0
    for alpha, cutoff in zip(amplitudes, basis.cutoffs):
        lam = abs(complex(alpha)) ** 2
        if lam == 0.0:
            continue
        head *= 1.0 - float(gammainc(cutoff + 1, lam))
    return 1.0 - head


def coherent_state(s, basis: FockBasis, tail_tol: float = DEFAULT_TAIL_TOL) -> FockVector:
    """Coherent state from the explicit series, renormalized after truncation.

    The pre-normalization deficit (tail mass above the cutoffs) is recorded
    on the returned vector.  Raises TruncationError when the Poisson tail
    bound exceeds `tail_tol`.
    """
    amplitudes = [complex(a) for a in s]
    if len(amplitudes) != basis.n_modes:
        raise ModeMismatchError("state and basis mode counts differ")
    bound = truncation_bound(amplitudes, basis)
    if bound > tail_tol:
        raise TruncationError(
            f"truncation bound {bound:.3e} exceeds tolerance {tail_tol:.3e}; "
            "raise the cutoffs"
        )
    vec = np.ones(1, dtype=complex)
    for alpha, cutoff in zip(amplitudes, basis.cutoffs):
        ns = np.arange(cutoff + 1)
        log_fact = np.cumsum(np.concatenate(([0.0], np.log(np.arange(1, cutoff + 1)))))
        comps = np.exp(-0.5 * abs(alpha) ** 2 - 0.5 * log_fact) * alpha**ns
        vec = np.kron(vec, comps)
    prenorm = float(np.linalg.norm(vec))
    deficit = max(0.0, 1.0 - prenorm**2)
    return FockVector(vec / prenorm, basis, truncation_deficit=deficit)


def basis_vector(occupation: Sequence[int], basis: FockBasis) -> FockVector:
    vec = np.zeros(basis.total_dimension, dtype=complex)
    vec[basis.index_of(occupation)] = 1.0
    return FockVector(vec, basis, truncation_deficit=0.0)


def density_of(v: FockVector) -> FockMatrix:
    """Rank-1 projector |v><v| for a normalized vector."""
    nrm = v.norm()
    if abs(nrm - 1.0) > 1e-9:
        raise ValidationError(f"vector norm {nrm!r} is not 1 within 1e-9")
    rho = np.outer(v.components, v.components.conj())
    return FockMatrix(rho, v.basis, hermitian=True)


def hermitian_eigen(m: FockMatrix):
    """Eigendecomposition of a Hermitian FockMatrix.

    Returns (eigenvalues ascending, eigenvector matrix with orthonormal
    columns).  Deterministic for fixed input.
    """
    if not m.hermitian:
        asym = float(np.max(np.abs(m.data - m.data.conj().T)))
        if asym > HERMITIAN_TOL:
            raise NotHermitianError(f"matrix is not Hermitian (max asym {asym:.3e})")
    evals, evecs = np.linalg.eigh(m.data)
    return evals, evecs


def trace_product(a: FockMatrix, b: FockMatrix) -> complex:
    """Tr(A B) without forming the product matrix."""
    if a.basis.cutoffs != b.basis.cutoffs:
        raise ModeMismatchError("matrices live on different bases")
    return complex(np.sum(a.data * b.data.T))


def expectation(m: FockMatrix, v: FockVector) -> complex:
    return complex(np.vdot(v.components, m.data @ v.components))


# ---------------------------------------------------------------------------
# Text dumps (header + row-major complex entries)
# ---------------------------------------------------------------------------

def matrix_to_text(m: FockMatrix) -> str:
    lines = [
        f"dimension {m.basis.total_dimension}",
        "cutoffs " + " ".join(str(c) for c in m.basis.cutoffs),
        f"hermitian {int(m.hermitian)}",
    ]
    for row in m.data:
        lines.append(" ".join(f"{float(z.real)!r} {float(z.imag)!r}" for z in row))
    return "\n".join(lines) + "\n"


def matrix_from_text(text: str) -> FockMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    dim = int(lines[0].split()[1])
    cutoffs = [int(x) for x in lines[1].split()[1:]]
    hermitian = bool(int(lines[2].split()[1]))
    rows = []
    for ln in lines[3 : 3 + dim]:
        vals = [float(x) for x in ln.split()]
        rows.append([complex(vals[i], vals[i + 1]) for i in range(0, len(vals), 2)])
    return FockMatrix(np.array(rows), FockBasis(cutoffs), hermitian=hermitian)


def vector_to_text(v: FockVector) -> str:
    lines = [
        f"dimension {v.basis.total_dimension}",
        "cutoffs " + " ".join(str(c) for c in v.basis.cutoffs),
    ]
    lines += [f"{float(z.real)!r} {float(z.imag)!r}" for z in v.components]
    return "\n".join(lines) + "\n"


def vector_from_text(text: str) -> FockVector:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    dim = int(lines[0].split()[1])
    cutoffs = [int(x) for x in lines[1].split()[1:]]
    comps = []
    for ln in lines[2 : 2 + dim]:
        re_s, im_s = ln.split()
        comps.append(complex(float(re_s), float(im_s)))
    return FockVector(np.array(comps), FockBasis(cutoffs))

"""Real polynomials on phase space (phi_i, pi_i).

Used for lattice interaction terms, Hamiltonian ODE flows and the
divergence/incompressibility machinery.  Variables are ordered
``phi_0 .. phi_{n-1}, pi_0 .. pi_{n-1}``.
"""

from __future__ import annotations

import numpy as np

from . import _polycore, scalars
from .errors import ValidationError
from .scalars import ZERO_TOL, as_scalar


class PhaseSpacePolynomial:
    """Sparse polynomial in n pairs of conjugate real variables."""

    __slots__ = ("terms", "pairs")

    def __init__(self, terms: dict, pairs: int):
        if pairs < 1:
            raise ValidationError("need at least one (phi, pi) pair")
        self.pairs = pairs
        self.terms = _polycore.prune(terms)
        for key in self.terms:
            if len(key) != 2 * pairs:
                raise ValidationError("exponent tuple length does not match pair count")

    # -- constructors --------------------------------------------------
    @classmethod
    def zero(cls, pairs: int) -> "PhaseSpacePolynomial":
        return cls({}, pairs)

    @classmethod
    def constant(cls, value, pairs: int) -> "PhaseSpacePolynomial":
        return cls({(0,) * (2 * pairs): as_scalar(value)}, pairs)

    @classmethod
    def coordinate(cls, index: int, pairs: int) -> "PhaseSpacePolynomial":
        """phi_index for index < pairs, pi_(index - pairs) otherwise."""
        if not 0 <= index < 2 * pairs:
            raise ValidationError(f"coordinate {index} out of range")
        key = [0] * (2 * pairs)
        key[index] = 1
        return cls({tuple(key): scalars.exact(1)}, pairs)

    @classmethod
    def phi(cls, i: int, pairs: int) -> "PhaseSpacePolynomial":
        return cls.coordinate(i, pairs)

    @classmethod
    def pi(cls, i: int, pairs: int) -> "PhaseSpacePolynomial":
        return cls.coordinate(pairs + i, pairs)

    # -- algebra --------------------------------------------------------
    def _coerce(self, other) -> "PhaseSpacePolynomial":
        if isinstance(other, PhaseSpacePolynomial):
            if other.pairs != self.pairs:
                raise ValidationError("pair counts differ")
            return other
        return PhaseSpacePolynomial.constant(other, self.pairs)

    def __add__(self, other):
        other = self._coerce(other)
        return PhaseSpacePolynomial(_polycore.add(self.terms, other.terms), self.pairs)

    __radd__ = __add__

    def __sub__(self, other):
        return self + self._coerce(other).scale(-1)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return self.scale(-1)

    def scale(self, factor):
        return PhaseSpacePolynomial(_polycore.scale(self.terms, factor), self.pairs)

    def __mul__(self, other):
        if isinstance(other, PhaseSpacePolynomial):
            other = self._coerce(other)
            return PhaseSpacePolynomial(_polycore.mul(self.terms, other.terms), self.pairs)
        return self.scale(other)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        return PhaseSpacePolynomial(
            _polycore.power(self.terms, n, 2 * self.pairs), self.pairs
        )

    def __eq__(self, other):
        if not isinstance(other, PhaseSpacePolynomial):
            return NotImplemented
        if other.pairs != self.pairs:
            return False
        for key in self.terms.keys() | other.terms.keys():
            if not scalars.scalars_close(self.terms.get(key, 0), other.terms.get(key, 0)):
                return False
        return True

    __hash__ = None

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return _polycore.total_degree(self.terms)

    # -- calculus --------------------------------------------------------
    def derivative(self, index: int) -> "PhaseSpacePolynomial":
        return PhaseSpacePolynomial(_polycore.derive(self.terms, index), self.pairs)

    def d_phi(self, i: int) -> "PhaseSpacePolynomial":
        return self.derivative(i)

    def d_pi(self, i: int) -> "PhaseSpacePolynomial":
        return self.derivative(self.pairs + i)

    def evaluate(self, phi, pi):
        """Evaluate at coordinate arrays of shape (..., pairs); broadcasts over samples."""
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        pi = np.atleast_1d(np.asarray(pi, dtype=float))
        values = [phi[..., i] for i in range(self.pairs)] + [
            pi[..., i] for i in range(self.pairs)
        ]
        acc = values[0] * 0.0 + values[self.pairs] * 0.0
        for key, coeff in self.terms.items():
            z = complex(coeff)
            factor = z.real if z.imag == 0 else z
            for var, p in enumerate(key):
                if p:
                    factor = factor * values[var] ** p
            acc = acc + factor
        return acc

    def is_real(self, tol: float = ZERO_TOL) -> bool:
        return all(abs(complex(c).imag) <= tol for c in self.terms.values())

    def quadratic_part_matrix(self) -> np.ndarray:
        """Symmetric matrix A with  (quadratic terms) = 1/2 x^T A x."""
        n = 2 * self.pairs
        A = np.zeros((n, n))
        for key, coeff in self.terms.items():
            if sum(key) != 2:
                continue
            idx = [v for v, p in enumerate(key) for _ in range(p)]
            i, j = idx
            c = complex(coeff).real
            if i == j:
                A[i, i] += 2 * c
            else:
                A[i, j] += c
                A[j, i] += c
        return A

    def has_linear_part(self) -> bool:
        return any(sum(key) == 1 for key in self.terms)

    def is_separable(self) -> bool:
        """No term mixes phi and pi variables (kinetic/potential split exists)."""
        n = self.pairs
        for key in self.terms:
            has_phi = any(key[:n])
            has_pi = any(key[n:])
            if has_phi and has_pi:
                return False
        return True

    def split_separable(self):
        """Return (T, V) with T depending only on pi and V only on phi."""
        if not self.is_separable():
            raise ValidationError("Hamiltonian is not separable into T(pi) + V(phi)")
        n = self.pairs
        t_terms, v_terms = {}, {}
        for key, coeff in self.terms.items():
            if any(key[n:]):
                t_terms[key] = coeff
            else:
                v_terms[key] = coeff
        return (
            PhaseSpacePolynomial(t_terms, n),
            PhaseSpacePolynomial(v_terms, n),
        )

    def substitute(self, images: list):
        """Replace each coordinate with a polynomial from another commutative algebra.

        `images` lists one replacement per variable (phi block then pi block);
        replacements must support +, * and ** among themselves, e.g.
        ClassicalPolynomial values for mode-variable rewriting.
        """
        if len(images) != 2 * self.pairs:
            raise ValidationError("need one image per coordinate")
        one = images[0] ** 0
        return _polycore.compose(
            self.terms,
            images,
            one,
            lambda x, y: x * y,
            lambda x, n: x**n,
        )

    def __repr__(self):
        parts = []
        for key, coeff in sorted(self.terms.items(), key=lambda kv: (-sum(kv[0]), kv[0])):
            factors = []
            for var, p in enumerate(key):
                if not p:
                    continue
                name = f"phi{var}" if var < self.pairs else f"pi{var - self.pairs}"
                factors.append(name + (f"^{p}" if p > 1 else ""))
            body = "*".join(factors) if factors else "1"
            parts.append(f"{scalars.format_scalar(coeff)}*{body}")
        return "<PhaseSpacePolynomial " + (" + ".join(parts) if parts else "0") + ">"

"""Polynomials in multi-mode bosonic ladder operators and mode variables.

Two polynomial algebras live here.  `ClassicalPolynomial` is an ordinary
commutative polynomial in mode amplitudes ``al_j`` and their conjugates.
`OperatorPolynomial` is its noncommutative counterpart in ladder operators:
every value is kept in canonical normal-ordered form (all creation factors
left of all annihilation factors, per mode), and products are reordered with
the single-mode commutation rule

    a^m (a^H)^n = sum_t  t! C(m,t) C(n,t) (a^H)^(n-t) a^(m-t).

Distinct modes commute.  Coefficients stay exact Gaussian rationals whenever
the inputs were rational (see :mod:`bosonlab.scalars`).

The two quantization maps are deliberately separate operations:
`normal_product` sends a classical term ``al^j conj(al)^k`` to
``(a^H)^k a^j`` with the coefficient untouched, while `quantize_raw`
substitutes in the classical factor order ``a^j (a^H)^k`` and then
canonicalizes, which generates extra commutator terms.
"""

from __future__ import annotations

from math import comb, factorial
from typing import Iterable, Sequence

from . import scalars
from .errors import ModeMismatchError, ValidationError
from .scalars import ZERO_TOL, as_scalar, conj_scalar, is_zero, scalars_close

# A ladder "word" is a factor sequence in original (unordered) form:
# each factor is (mode, create) with create=True for a creation operator.
Factor = tuple[int, bool]
Word = tuple[Factor, ...]


def _zero_key(n_modes: int):
    return ((0, 0),) * n_modes


class ClassicalState:
    """Finite vector of complex mode amplitudes."""

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes: Iterable[complex]):
        self.amplitudes = tuple(complex(a) for a in amplitudes)
        for a in self.amplitudes:
            if not (abs(a.real) < float("inf") and abs(a.imag) < float("inf")):
                raise ValidationError("state amplitudes must be finite")

    @property
    def n_modes(self) -> int:
        return len(self.amplitudes)

    def __iter__(self):
        return iter(self.amplitudes)

    def __len__(self):
        return len(self.amplitudes)

    def __getitem__(self, i):
        return self.amplitudes[i]

    def __repr__(self):
        return f"ClassicalState({list(self.amplitudes)!r})"

    def __eq__(self, other):
        return isinstance(other, ClassicalState) and self.amplitudes == other.amplitudes

    def __hash__(self):
        return hash(self.amplitudes)


class _PolynomialBase:
    """Shared term-dict plumbing for both polynomial algebras."""

    __slots__ = ("terms", "n_modes")

    def __init__(self, terms: dict, n_modes: int):
        if n_modes < 1:
            raise ValidationError("polynomials need at least one mode")
        self.terms = {k: c for k, c in terms.items() if not is_zero(c)}
        self.n_modes = n_modes

    def _check_modes(self, other):
        if self.n_modes != other.n_modes:
            raise ModeMismatchError(
                f"mode counts differ: {self.n_modes} vs {other.n_modes}"
            )

    def __add__(self, other):
        if isinstance(other, type(self)):
            self._check_modes(other)
            out = dict(self.terms)
            for key, coeff in other.terms.items():
                out[key] = out.get(key, 0) + coeff
            return type(self)(out, self.n_modes)
        return self + type(self).constant(other, self.n_modes)

    def __radd__(self, other):
        return self + other

    def __sub__(self, other):
        return self + (-1) * (
            other if isinstance(other, type(self)) else type(self).constant(other, self.n_modes)
        )

    def __rsub__(self, other):
        return type(self).constant(other, self.n_modes) - self

    def __neg__(self):
        return (-1) * self

    def scale(self, factor):
        factor = as_scalar(factor)
        return type(self)({k: c * factor for k, c in self.terms.items()}, self.n_modes)

    def __rmul__(self, other):
        if isinstance(other, type(self)):
            return NotImplemented
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, type(self)):
            return NotImplemented
        if self.n_modes != other.n_modes:
            return False
        return self.isclose(other, tol=ZERO_TOL)

    __hash__ = None

    def isclose(self, other, tol: float = ZERO_TOL) -> bool:
        """Canonical-form equality within a coefficient tolerance."""
        self._check_modes(other)
        for key in self.terms.keys() | other.terms.keys():
            a = self.terms.get(key, 0)
            b = other.terms.get(key, 0)
            if not scalars_close(a, b, tol):
                return False
        return True

    def degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(c + a for c, a in key) for key in self.terms)

    def constant_term(self):
        return self.terms.get(_zero_key(self.n_modes), 0)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)


class OperatorPolynomial(_PolynomialBase):
    """Canonical normal-ordered polynomial in ladder operators.

    Terms map exponent multi-indices ``((c_0, a_0), (c_1, a_1), ...)`` --
    creation and annihilation powers per mode -- to coefficients.
    Values are immutable by convention; all operations return new objects.
    """

    @classmethod
    def constant(cls, value, n_modes: int) -> "OperatorPolynomial":
        value = as_scalar(value)
        return cls({_zero_key(n_modes): value}, n_modes)

    @classmethod
    def zero(cls, n_modes: int) -> "OperatorPolynomial":
        return cls({}, n_modes)

    @classmethod
    def ladder(cls, mode: int, create: bool, n_modes: int) -> "OperatorPolynomial":
        if not 0 <= mode < n_modes:
            raise ModeMismatchError(f"mode {mode} out of range for {n_modes} modes")
        key = list(_zero_key(n_modes))
        key[mode] = (1, 0) if create else (0, 1)
        return cls({tuple(key): scalars.exact(1)}, n_modes)

    @classmethod
    def monomial(cls, powers: Sequence[tuple[int, int]], coeff=1) -> "OperatorPolynomial":
        return cls({tuple((int(c), int(a)) for c, a in powers): as_scalar(coeff)}, len(powers))

    def __mul__(self, other):
        if isinstance(other, OperatorPolynomial):
            return multiply(self, other)
        return self.scale(other)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValidationError("operator powers must be nonnegative integers")
        out = OperatorPolynomial.constant(1, self.n_modes)
        for _ in range(n):
            out = multiply(out, self)
        return out

    def adjoint(self) -> "OperatorPolynomial":
        return adjoint(self)

    def is_hermitian(self, tol: float = ZERO_TOL) -> bool:
        return self.isclose(adjoint(self), tol)

    def __repr__(self):
        return f"<OperatorPolynomial {format_operator_polynomial(self)}>"


class ClassicalPolynomial(_PolynomialBase):
    """Commutative polynomial in mode variables ``al_j`` and ``conj(al_j)``.

    Terms map multi-indices ``((j_0, k_0), ...)`` -- the powers of ``al``
    and of ``conj(al)`` per mode -- to coefficients (the ``A_j^k``).
    """

    @classmethod
    def constant(cls, value, n_modes: int) -> "ClassicalPolynomial":
        return cls({_zero_key(n_modes): as_scalar(value)}, n_modes)

    @classmethod
    def zero(cls, n_modes: int) -> "ClassicalPolynomial":
        return cls({}, n_modes)

    @classmethod
    def variable(cls, mode: int, n_modes: int, conjugated: bool = False) -> "ClassicalPolynomial":
        if not 0 <= mode < n_modes:
            raise ModeMismatchError(f"mode {mode} out of range for {n_modes} modes")
        key = list(_zero_key(n_modes))
        key[mode] = (0, 1) if conjugated else (1, 0)
        return cls({tuple(key): scalars.exact(1)}, n_modes)

    @classmethod
    def monomial(cls, powers: Sequence[tuple[int, int]], coeff=1) -> "ClassicalPolynomial":
        return cls({tuple((int(j), int(k)) for j, k in powers): as_scalar(coeff)}, len(powers))

    def __mul__(self, other):
        if isinstance(other, ClassicalPolynomial):
            self._check_modes(other)
            out: dict = {}
            for k1, c1 in self.terms.items():
                for k2, c2 in other.terms.items():
                    key = tuple((j1 + j2, k1_ + k2_) for (j1, k1_), (j2, k2_) in zip(k1, k2))
                    contrib = c1 * c2
                    out[key] = out.get(key, 0) + contrib
            return ClassicalPolynomial(out, self.n_modes)
        return self.scale(other)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValidationError("powers must be nonnegative integers")
        out = ClassicalPolynomial.constant(1, self.n_modes)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self) -> "ClassicalPolynomial":
        out = {}
        for key, coeff in self.terms.items():
            out[tuple((k, j) for j, k in key)] = conj_scalar(coeff)
        return ClassicalPolynomial(out, self.n_modes)

    def is_real_valued(self, tol: float = ZERO_TOL) -> bool:
        """True when the polynomial takes real values: A[k,j] = conj(A[j,k])."""
        return self.isclose(self.conjugate(), tol)

    def derivative(self, mode: int, conjugated: bool = False) -> "ClassicalPolynomial":
        """Formal partial derivative with respect to al_mode (or its conjugate)."""
        out: dict = {}
        for key, coeff in self.terms.items():
            j, k = key[mode]
            p = k if conjugated else j
            if p == 0:
                continue
            nk = list(key)
            nk[mode] = (j, k - 1) if conjugated else (j - 1, k)
            nkey = tuple(nk)
            contrib = coeff * p
            out[nkey] = out.get(nkey, 0) + contrib
        return ClassicalPolynomial(out, self.n_modes)

    def __repr__(self):
        return f"<ClassicalPolynomial {format_classical_polynomial(self)}>"


# ---------------------------------------------------------------------------
# Canonicalization engine
# ---------------------------------------------------------------------------

def _mode_product(c1: int, a1: int, c2: int, a2: int):
    """Normal-order (ad^c1 a^a1)(ad^c2 a^a2) for one mode.

    Yields ((c, a), integer_weight) pairs from the reordering of the inner
    a^a1 ad^c2 block.
    """
    for t in range(min(a1, c2) + 1):
        weight = factorial(t) * comb(a1, t) * comb(c2, t)
        yield (c1 + c2 - t, a1 + a2 - t), weight


def multiply(lhs: OperatorPolynomial, rhs: OperatorPolynomial) -> OperatorPolynomial:
    """Canonical normal-ordered operator product."""
    lhs._check_modes(rhs)
    out: dict = {}
    for k1, c1 in lhs.terms.items():
        for k2, c2 in rhs.terms.items():
            partial = [((), 1)]
            for (pc1, pa1), (pc2, pa2) in zip(k1, k2):
                expanded = list(_mode_product(pc1, pa1, pc2, pa2))
                partial = [
                    (key + (mk,), w * mw)
                    for key, w in partial
                    for mk, mw in expanded
                ]
            base = c1 * c2
            for key, w in partial:
                contrib = base * w
                out[key] = out.get(key, 0) + contrib
    return OperatorPolynomial(out, lhs.n_modes)


def append_factor(terms: dict, n_modes: int, mode: int, create: bool) -> dict:
    """Right-multiply a canonical term dict by a single ladder factor.

    Creation factors commute into place with ``[a^m, a^H] = m a^(m-1)``;
    annihilation factors append directly.
    """
    out: dict = {}

    def _accum(key, coeff):
        out[key] = out.get(key, 0) + coeff

    for key, coeff in terms.items():
        c, a = key[mode]
        if create:
            k1 = key[:mode] + ((c + 1, a),) + key[mode + 1 :]
            _accum(k1, coeff)
            if a > 0:
                k2 = key[:mode] + ((c, a - 1),) + key[mode + 1 :]
                _accum(k2, coeff * a)
        else:
            k1 = key[:mode] + ((c, a + 1),) + key[mode + 1 :]
            _accum(k1, coeff)
    return out


def word_polynomial(words, n_modes: int) -> OperatorPolynomial:
    """Canonicalize a sum of raw ladder words via commutator rewriting."""
    total: dict = {}
    for coeff, word in words:
        terms = {_zero_key(n_modes): as_scalar(coeff)}
        for mode, create in word:
            terms = append_factor(terms, n_modes, mode, create)
        for key, c in terms.items():
            total[key] = total.get(key, 0) + c
    return OperatorPolynomial(total, n_modes)


# ---------------------------------------------------------------------------
# Quantization maps
# ---------------------------------------------------------------------------

def normal_product(p) -> OperatorPolynomial:
    """Normal-product quantization: reorder without commutators.

    Classical input maps ``al^j conj(al)^k -> (a^H)^k a^j`` term by term.
    Raw words (iterable of ``(coeff, word)``) have their factors counted per
    mode; coefficients are unchanged.  Canonical operator polynomials are
    already normal-ordered, so they pass through untouched.
    """
    if isinstance(p, OperatorPolynomial):
        return p
    if isinstance(p, ClassicalPolynomial):
        out = {}
        for key, coeff in p.terms.items():
            okey = tuple((k, j) for j, k in key)
            out[okey] = out.get(okey, 0) + coeff
        return OperatorPolynomial(out, p.n_modes)
    # raw words: infer the mode count from context of each word
    words = list(p)
    if not words:
        raise ValidationError("cannot take the normal product of an empty word list")
    n_modes = 1 + max((m for _, w in words for m, _ in w), default=0)
    out = {}
    for coeff, word in words:
        powers = [[0, 0] for _ in range(n_modes)]
        for mode, create in word:
            powers[mode][0 if create else 1] += 1
        key = tuple((c, a) for c, a in powers)
        coeff = as_scalar(coeff)
        out[key] = out.get(key, 0) + coeff
    return OperatorPolynomial(out, n_modes)


def quantize_raw(g: ClassicalPolynomial) -> OperatorPolynomial:
    """Raw quantization: substitute in classical factor order, then reorder.

    Each term ``A al^j conj(al)^k`` becomes ``A a^j (a^H)^k`` -- annihilation
    factors first -- which the canonicalizer rewrites with commutators, so
    the result differs from `normal_product` whenever mixed terms appear.
    """
    out = OperatorPolynomial.zero(g.n_modes)
    for key, coeff in g.terms.items():
        partial = [((), 1)]
        for j, k in key:
            expanded = list(_mode_product(0, j, k, 0))
            partial = [
                (pk + (mk,), w * mw) for pk, w in partial for mk, mw in expanded
            ]
        terms = {}
        for pkey, w in partial:
            terms[pkey] = terms.get(pkey, 0) + coeff * w
        out = out + OperatorPolynomial(terms, g.n_modes)
    return out


def adjoint(p: OperatorPolynomial) -> OperatorPolynomial:
    """Hermitian conjugate: reverse and dagger each monomial, conjugate coefficients.

    The reversal of a normal-ordered monomial is again normal-ordered, so no
    commutator terms arise.
    """
    out = {}
    for key, coeff in p.terms.items():
        akey = tuple((a, c) for c, a in key)
        out[akey] = conj_scalar(coeff)
    return OperatorPolynomial(out, p.n_modes)


def evaluate_classical(g: ClassicalPolynomial, s) -> complex:
    """Evaluate a classical polynomial at a state (exact polynomial arithmetic)."""
    amplitudes = s.amplitudes if isinstance(s, ClassicalState) else tuple(complex(a) for a in s)
    if len(amplitudes) != g.n_modes:
        raise ModeMismatchError(
            f"state has {len(amplitudes)} modes, polynomial has {g.n_modes}"
        )
    total = 0j
    for key, coeff in g.terms.items():
        term = complex(coeff)
        for mode, (j, k) in enumerate(key):
            a = amplitudes[mode]
            if j:
                term *= a**j
            if k:
                term *= a.conjugate() ** k
        total += term
    return total


# ---------------------------------------------------------------------------
# Pretty-printing and the term-record serialization
# ---------------------------------------------------------------------------

def _sorted_terms(p: _PolynomialBase):
    return sorted(
        p.terms.items(),
        key=lambda item: (-sum(x + y for x, y in item[0]), item[0]),
    )


def _join_terms(rendered: list[tuple[str, str]]) -> str:
    # rendered holds (sign, body) pairs with sign in {"+", "-"}
    if not rendered:
        return "0"
    sign, body = rendered[0]
    text = ("-" if sign == "-" else "") + body
    for sign, body in rendered[1:]:
        text += f" {sign} {body}"
    return text


def _render(p: _PolynomialBase, mono_fn) -> str:
    rendered = []
    for key, coeff in _sorted_terms(p):
        mono = mono_fn(key)
        z = complex(coeff)
        if z.imag == 0 and z != 0:
            sign = "-" if z.real < 0 else "+"
            mag = coeff if z.real > 0 else (-1) * coeff
            cstr = scalars.format_scalar(mag)
            if mono and cstr == "1":
                body = mono
            elif mono:
                body = f"{cstr}*{mono}"
            else:
                body = cstr
        else:
            cstr = scalars.format_scalar(coeff)
            sign = "+"
            body = f"{cstr}*{mono}" if mono else cstr
        rendered.append((sign, body))
    return _join_terms(rendered)


def format_operator_polynomial(p: OperatorPolynomial) -> str:
    def mono(key):
        parts = []
        for mode, (c, a) in enumerate(key):
            if c:
                parts.append(f"ad{mode}" + (f"^{c}" if c > 1 else ""))
            if a:
                parts.append(f"a{mode}" + (f"^{a}" if a > 1 else ""))
        return "*".join(parts)

    return _render(p, mono)


def format_classical_polynomial(p: ClassicalPolynomial) -> str:
    def mono(key):
        parts = []
        for mode, (j, k) in enumerate(key):
            if j:
                parts.append(f"al{mode}" + (f"^{j}" if j > 1 else ""))
            if k:
                parts.append(f"conj(al{mode})" + (f"^{k}" if k > 1 else ""))
        return "*".join(parts)

    return _render(p, mono)


def polynomial_to_records(p) -> str:
    """Serialize to the term-record text format.

    First line names the kind and mode count; then one term per line:
    ``coeff_re coeff_im [mode left_power right_power]...`` where the powers
    are (creation, annihilation) for operator polynomials and
    (plain, conjugated) for classical ones.  Only modes with nonzero powers
    are listed.
    """
    kind = "operator" if isinstance(p, OperatorPolynomial) else "classical"
    lines = [f"{kind} {p.n_modes}"]
    for key, coeff in _sorted_terms(p):
        z = complex(coeff)
        cols = [repr(z.real), repr(z.imag)]
        for mode, (x, y) in enumerate(key):
            if x or y:
                cols += [str(mode), str(x), str(y)]
        lines.append(" ".join(cols))
    return "\n".join(lines) + "\n"


def polynomial_from_records(text: str):
    """Inverse of `polynomial_to_records` (coefficients come back as floats)."""
    lines = [ln for ln in (raw.strip() for raw in text.splitlines()) if ln and not ln.startswith("#")]
    if not lines:
        raise ValidationError("empty polynomial record")
    kind, n_modes_s = lines[0].split()
    n_modes = int(n_modes_s)
    cls = OperatorPolynomial if kind == "operator" else ClassicalPolynomial
    terms = {}
    for ln in lines[1:]:
        cols = ln.split()
        coeff = complex(float(cols[0]), float(cols[1]))
        key = [[0, 0] for _ in range(n_modes)]
        for i in range(2, len(cols), 3):
            mode, x, y = int(cols[i]), int(cols[i + 1]), int(cols[i + 2])
            key[mode] = [x, y]
        tkey = tuple((x, y) for x, y in key)
        terms[tkey] = terms.get(tkey, 0) + coeff
    return cls(terms, n_modes)

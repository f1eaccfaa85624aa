"""Expression grammar for ladder, mode-variable and phase-space polynomials.

Grammar (whitespace-insensitive)::

    expr   := term (('+' | '-') term)*
    term   := power ('*' power)*
    power  := unary ('^' nonnegative-integer)*
    unary  := ('+' | '-') unary | atom
    atom   := number | number 'i' | 'i' | symbol | parameter
            | 'conj' '(' expr ')' | '(' expr ')'

Ladder symbols are ``aJ`` (annihilation) and ``adJ`` (creation); classical
mode variables are ``alJ`` with ``conj(...)`` for conjugation; phase-space
expressions use ``phiJ`` and ``piJ``.  ``J`` names a mode from the caller's
list.  Parameters (e.g. ``E``) are substituted at parse time from the
``parameters`` mapping.  Numeric literals parse to exact rationals so that
downstream commutator rewriting stays exact.
"""

from __future__ import annotations

import re
from decimal import Decimal
from fractions import Fraction

from .errors import ExpressionError, ValidationError
from .operator_algebra import ClassicalPolynomial, OperatorPolynomial
from .phase_space import PhaseSpacePolynomial
from .scalars import RationalComplex, as_scalar

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?i?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*^()])"
    r")"
)


def mode_names_for(n_modes: int) -> list[str]:
    return [str(i) for i in range(n_modes)]


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            rest = text[pos:].lstrip()
            if not rest:
                break
            at = pos + len(text[pos:]) - len(rest)
            raise ExpressionError(f"unexpected character {rest[0]!r}", position=at)
        if m.group("number") is not None:
            lit = m.group("number")
            start = m.start("number")
            imaginary = lit.endswith("i")
            if imaginary:
                lit = lit[:-1]
            value = Fraction(Decimal(lit))
            scalar = RationalComplex(0, value) if imaginary else RationalComplex(value, 0)
            tokens.append(("num", scalar, start))
        elif m.group("ident") is not None:
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive-descent parser producing a small tuple AST."""

    def __init__(self, text: str, resolver):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.resolver = resolver

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, value, pos = self.peek()
        if kind != "op" or value != op:
            raise ExpressionError(f"expected {op!r}", position=pos)
        self.advance()

    def parse(self):
        ast = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ExpressionError(f"unexpected token {value!r}", position=pos)
        return ast

    def expr(self):
        node = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                rhs = self.term()
                node = ("add" if value == "+" else "sub", node, rhs)
            else:
                return node

    def term(self):
        node = self.power()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value == "*":
                self.advance()
                node = ("mul", node, self.power())
            else:
                return node

    def power(self):
        node = self.unary()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value == "^":
                self.advance()
                nkind, nvalue, npos = self.advance()
                if nkind != "num" or nvalue.im != 0 or nvalue.re.denominator != 1 or nvalue.re < 0:
                    raise ExpressionError("exponent must be a nonnegative integer", position=npos)
                node = ("pow", node, int(nvalue.re))
            else:
                return node

    def unary(self):
        kind, value, _ = self.peek()
        if kind == "op" and value in "+-":
            self.advance()
            inner = self.unary()
            return inner if value == "+" else ("neg", inner)
        return self.atom()

    def atom(self):
        kind, value, pos = self.advance()
        if kind == "num":
            return ("num", value)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "ident":
            if value == "conj":
                self.expect_op("(")
                node = self.expr()
                self.expect_op(")")
                return ("conj", node)
            if value == "i":
                return ("num", RationalComplex(0, 1))
            return self.resolver(value, pos)
        raise ExpressionError(f"unexpected token {value!r}", position=pos)


# ---------------------------------------------------------------------------
# Symbol resolvers
# ---------------------------------------------------------------------------

def _check_mode_names(mode_names):
    if not mode_names:
        raise ValidationError("mode_names must not be empty")
    for name in mode_names:
        if not re.fullmatch(r"[0-9]+", name):
            raise ValidationError(
                f"mode name {name!r} must be a digit string (keeps aJ/adJ/alJ unambiguous)"
            )
    if len(set(mode_names)) != len(mode_names):
        raise ValidationError("mode names must be distinct")


def _parameter_scalar(value):
    if isinstance(value, str):
        try:
            return RationalComplex(Fraction(Decimal(value)))
        except (ValueError, ArithmeticError):
            return as_scalar(complex(value))
    return as_scalar(value)


def _mode_resolver(mode_names, parameters):
    index = {name: i for i, name in enumerate(mode_names)}

    def resolve(name, pos):
        for prefix, kind in (("ad", "ad"), ("al", "al"), ("a", "a")):
            if name.startswith(prefix) and name[len(prefix):] in index:
                return ("sym", kind, index[name[len(prefix):]])
        if name in parameters:
            return ("num", _parameter_scalar(parameters[name]))
        raise ExpressionError(f"unknown symbol {name!r}", position=pos)

    return resolve


def _field_resolver(pairs, parameters):
    def resolve(name, pos):
        for prefix, kind in (("phi", "phi"), ("pi", "pi")):
            if name.startswith(prefix):
                suffix = name[len(prefix):]
                if suffix.isdigit() and int(suffix) < pairs:
                    return ("sym", kind, int(suffix))
                if suffix.isdigit():
                    raise ExpressionError(
                        f"{name!r} exceeds the configured {pairs} pairs", position=pos
                    )
        if name in parameters:
            return ("num", _parameter_scalar(parameters[name]))
        raise ExpressionError(f"unknown symbol {name!r}", position=pos)

    return resolve


# ---------------------------------------------------------------------------
# AST evaluation in the three polynomial algebras
# ---------------------------------------------------------------------------

def _symbol_kinds(ast, found: set):
    tag = ast[0]
    if tag == "sym":
        found.add(ast[1])
    elif tag in ("add", "sub", "mul"):
        _symbol_kinds(ast[1], found)
        _symbol_kinds(ast[2], found)
    elif tag in ("neg", "conj"):
        _symbol_kinds(ast[1], found)
    elif tag == "pow":
        _symbol_kinds(ast[1], found)
    return found


def _eval_ast(ast, atom_fn, constant_fn, conj_fn):
    tag = ast[0]
    if tag == "num":
        return constant_fn(ast[1])
    if tag == "sym":
        return atom_fn(ast[1], ast[2])
    if tag == "add":
        return _eval_ast(ast[1], atom_fn, constant_fn, conj_fn) + _eval_ast(
            ast[2], atom_fn, constant_fn, conj_fn
        )
    if tag == "sub":
        return _eval_ast(ast[1], atom_fn, constant_fn, conj_fn) - _eval_ast(
            ast[2], atom_fn, constant_fn, conj_fn
        )
    if tag == "mul":
        return _eval_ast(ast[1], atom_fn, constant_fn, conj_fn) * _eval_ast(
            ast[2], atom_fn, constant_fn, conj_fn
        )
    if tag == "neg":
        return _eval_ast(ast[1], atom_fn, constant_fn, conj_fn).scale(-1)
    if tag == "pow":
        return _eval_ast(ast[1], atom_fn, constant_fn, conj_fn) ** ast[2]
    if tag == "conj":
        return conj_fn(_eval_ast(ast[1], atom_fn, constant_fn, conj_fn))
    raise AssertionError(f"unhandled AST node {tag}")


def parse_expression(text: str, mode_names, parameters=None):
    """Parse into a canonical OperatorPolynomial or ClassicalPolynomial.

    Operator expressions are normal-ordered on ingestion (commutators
    applied).  Mixing ladder and classical symbols raises ExpressionError.
    Expressions with no mode symbols come back as constant classical
    polynomials.
    """
    _check_mode_names(mode_names)
    parameters = parameters or {}
    n_modes = len(mode_names)
    ast = _Parser(text, _mode_resolver(mode_names, parameters)).parse()
    kinds = _symbol_kinds(ast, set())

    if kinds & {"a", "ad"} and "al" in kinds:
        raise ExpressionError("expression mixes ladder and classical symbols")

    if kinds & {"a", "ad"}:
        def atom(kind, mode):
            return OperatorPolynomial.ladder(mode, kind == "ad", n_modes)

        def conj(_):
            raise ExpressionError("conj(...) applies only to classical expressions")

        return _eval_ast(ast, atom, lambda v: OperatorPolynomial.constant(v, n_modes), conj)

    def atom(kind, mode):
        return ClassicalPolynomial.variable(mode, n_modes)

    return _eval_ast(
        ast,
        atom,
        lambda v: ClassicalPolynomial.constant(v, n_modes),
        lambda p: p.conjugate(),
    )


def parse_classical(text: str, mode_names, parameters=None) -> ClassicalPolynomial:
    poly = parse_expression(text, mode_names, parameters)
    if not isinstance(poly, ClassicalPolynomial):
        raise ExpressionError("expected a classical expression (alJ symbols only)")
    return poly


def parse_operator(text: str, mode_names, parameters=None) -> OperatorPolynomial:
    poly = parse_expression(text, mode_names, parameters)
    if isinstance(poly, ClassicalPolynomial):
        if poly.degree() > 0:
            raise ExpressionError("expected an operator expression (aJ/adJ symbols)")
        return OperatorPolynomial.constant(poly.constant_term(), len(mode_names))
    return poly


def parse_operator_words(text: str, mode_names, parameters=None):
    """Parse an operator expression into raw words without canonicalizing.

    Returns a list of ``(coeff, ((mode, create), ...))`` pairs preserving the
    written factor order, for use with `normal_product` and for rewrite-order
    experiments.
    """
    _check_mode_names(mode_names)
    parameters = parameters or {}
    ast = _Parser(text, _mode_resolver(mode_names, parameters)).parse()
    kinds = _symbol_kinds(ast, set())
    if "al" in kinds:
        raise ExpressionError("raw words are defined for ladder expressions only")

    class _Words:
        __slots__ = ("items",)

        def __init__(self, items):
            self.items = items

        def __add__(self, other):
            return _Words(self.items + other.items)

        def __sub__(self, other):
            return self + other.scale(-1)

        def __mul__(self, other):
            return _Words(
                [
                    (c1 * c2, w1 + w2)
                    for c1, w1 in self.items
                    for c2, w2 in other.items
                ]
            )

        def __pow__(self, n):
            out = _Words([(as_scalar(1), ())])
            for _ in range(n):
                out = out * self
            return out

        def scale(self, factor):
            return _Words([(c * as_scalar(factor), w) for c, w in self.items])

    def atom(kind, mode):
        return _Words([(as_scalar(1), ((mode, kind == "ad"),))])

    def conj(_):
        raise ExpressionError("conj(...) applies only to classical expressions")

    words = _eval_ast(ast, atom, lambda v: _Words([(v, ())]), conj)
    return words.items


def parse_phase_space(text: str, pairs: int, parameters=None) -> PhaseSpacePolynomial:
    """Parse a polynomial in phiJ/piJ symbols (J < pairs)."""
    parameters = parameters or {}
    ast = _Parser(text, _field_resolver(pairs, parameters)).parse()

    def atom(kind, index):
        if kind == "phi":
            return PhaseSpacePolynomial.phi(index, pairs)
        return PhaseSpacePolynomial.pi(index, pairs)

    def conj(p):
        raise ExpressionError("conj(...) is not defined for real field variables")

    return _eval_ast(
        ast, atom, lambda v: PhaseSpacePolynomial.constant(v, pairs), conj
    )

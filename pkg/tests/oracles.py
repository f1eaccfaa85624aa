"""Independent oracles for the test suite.

Everything here is deliberately written against the raw definitions
(ladder matrix elements, elementary commutator rewriting, direct series)
rather than through the library paths it is used to check.
"""

from __future__ import annotations

import math

import numpy as np


def ladder_matrix(dim: int) -> np.ndarray:
    """Annihilation matrix from the defining elements a|n> = sqrt(n)|n-1>."""
    m = np.zeros((dim, dim), dtype=complex)
    for n in range(1, dim):
        m[n - 1, n] = math.sqrt(n)
    return m


def factor_matrix(mode: int, create: bool, dims) -> np.ndarray:
    mats = []
    for j, d in enumerate(dims):
        if j == mode:
            a = ladder_matrix(d)
            mats.append(a.conj().T if create else a)
        else:
            mats.append(np.eye(d, dtype=complex))
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def word_matrix(word, dims) -> np.ndarray:
    """Matrix of a factor sequence, multiplied in the written order."""
    total = math.prod(dims)
    out = np.eye(total, dtype=complex)
    for mode, create in word:
        out = out @ factor_matrix(mode, create, dims)
    return out


def words_matrix(words, dims) -> np.ndarray:
    total = math.prod(dims)
    out = np.zeros((total, total), dtype=complex)
    for coeff, word in words:
        out += complex(coeff) * word_matrix(word, dims)
    return out


def coherent_vector(alphas, cutoffs) -> np.ndarray:
    """Normalized truncated coherent product state from the series."""
    vec = np.ones(1, dtype=complex)
    for alpha, cutoff in zip(alphas, cutoffs):
        comps = np.array(
            [alpha**n / math.sqrt(math.factorial(n)) for n in range(cutoff + 1)],
            dtype=complex,
        ) * math.exp(-abs(alpha) ** 2 / 2.0)
        vec = np.kron(vec, comps)
    return vec / np.linalg.norm(vec)


def poisson_tail(lam: float, cutoff: int) -> float:
    """P(X > cutoff) for Poisson(lam) by direct summation."""
    if lam == 0:
        return 0.0
    total = 0.0
    n = cutoff + 1
    term = math.exp(-lam) * lam**n / math.factorial(n)
    while term > 1e-300:
        total += term
        n += 1
        term *= lam / n
        if n > cutoff + 10_000:
            break
    return total


def safe_mask(dims, margin: int) -> np.ndarray:
    """Boolean mask of basis indices with every occupation <= cutoff - margin."""
    mask = np.ones(1, dtype=bool)
    for d in dims:
        keep = np.arange(d) <= (d - 1 - margin)
        mask = np.kron(mask, keep).astype(bool)
    return mask


def random_order_canonicalize(coeff, word, n_modes, rng) -> dict:
    """Normal-order a ladder word by elementary rewrites in random order.

    Repeatedly picks a random pending term and a random annihilation-before-
    creation adjacency, applying a a^H = a^H a + 1 (same mode) or the plain
    swap (distinct modes).  Terminates with the canonical term dict.
    """
    pending = [(complex(coeff), tuple(word))]
    done: dict = {}
    while pending:
        i = int(rng.integers(len(pending)))
        c, w = pending.pop(i)
        bad = [p for p in range(len(w) - 1) if (not w[p][1]) and w[p + 1][1]]
        if not bad:
            powers = [[0, 0] for _ in range(n_modes)]
            for mode, create in w:
                powers[mode][0 if create else 1] += 1
            key = tuple((cp, ap) for cp, ap in powers)
            done[key] = done.get(key, 0) + c
            continue
        p = bad[int(rng.integers(len(bad)))]
        m1 = w[p][0]
        m2 = w[p + 1][0]
        pending.append((c, w[:p] + (w[p + 1], w[p]) + w[p + 2:]))
        if m1 == m2:
            pending.append((c, w[:p] + w[p + 2:]))
    return {k: v for k, v in done.items() if abs(v) > 1e-12}


def random_word(rng, n_modes: int, max_len: int = 6):
    length = int(rng.integers(1, max_len + 1))
    return tuple(
        (int(rng.integers(n_modes)), bool(rng.integers(2))) for _ in range(length)
    )


def random_operator_polynomial(rng, n_modes: int, max_degree: int = 4,
                               integer_coeffs: bool = False, terms: int = 5):
    """Random canonical operator polynomial (library constructor, random data)."""
    from bosonlab import OperatorPolynomial

    chosen = {}
    for _ in range(terms):
        key = []
        budget = max_degree
        for _ in range(n_modes):
            c = int(rng.integers(0, budget + 1))
            budget -= c
            a = int(rng.integers(0, budget + 1))
            budget -= a
            key.append((c, a))
        if integer_coeffs:
            coeff = int(rng.integers(-3, 4))
            if coeff == 0:
                coeff = 1
        else:
            coeff = complex(rng.normal(), rng.normal())
        chosen[tuple(key)] = coeff
    return OperatorPolynomial(chosen, n_modes)


def random_real_classical(rng, n_modes: int, max_degree: int = 4,
                          terms: int = 4, rational: bool = False):
    """Random real-valued (conjugate-symmetric) classical polynomial."""
    from fractions import Fraction

    from bosonlab import ClassicalPolynomial
    from bosonlab.scalars import RationalComplex

    out = {}

    def _coeff(real_only: bool):
        if rational:
            re = Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 5)))
            im = Fraction(0) if real_only else Fraction(int(rng.integers(-6, 7)),
                                                        int(rng.integers(1, 5)))
            return RationalComplex(re, im)
        if real_only:
            return complex(rng.normal(), 0.0)
        return complex(rng.normal(), rng.normal())

    for _ in range(terms):
        key = []
        budget = max_degree
        for _ in range(n_modes):
            j = int(rng.integers(0, budget + 1))
            budget -= j
            k = int(rng.integers(0, budget + 1))
            budget -= k
            key.append((j, k))
        key = tuple(key)
        swapped = tuple((k, j) for j, k in key)
        if key == swapped:
            out[key] = _coeff(real_only=True)
        else:
            c = _coeff(real_only=False)
            out[key] = c
            out[swapped] = c.conjugate()
    return ClassicalPolynomial(out, n_modes)


def random_phase_space_hamiltonian(rng, pairs: int, max_degree: int = 4,
                                   terms: int = 6):
    """Random real polynomial Hamiltonian on `pairs` coordinate pairs."""
    from bosonlab import PhaseSpacePolynomial

    out = {}
    nvars = 2 * pairs
    for _ in range(terms):
        key = [0] * nvars
        budget = max_degree
        for v in range(nvars):
            p = int(rng.integers(0, budget + 1))
            key[v] = p
            budget -= p
        out[tuple(key)] = float(rng.normal())
    return PhaseSpacePolynomial(out, pairs)

"""Noncommutative polynomials in two parties' +-1 observables.

The algebra is generated by ``A_1..A_n`` (Alice) and ``B_1..B_n`` (Bob) with
exactly two relations: every generator squares to the identity, and Alice's
generators commute with Bob's.  Same-party generators do *not* commute.

A word is stored in normal form as a pair ``(alice, bob)`` of index tuples:
Alice's letters first, then Bob's, each in original order with adjacent
equal letters cancelled.  Out-of-range indices are folded back into
``1..n`` through ``C_{n+i} = -C_i`` and ``C_{-i} = -C_{n-i}``; the sign
goes into the coefficient.
"""

from typing import NamedTuple

import numpy as np

PRUNE_TOL = 1e-14
SYMBOLIC_TOL = 1e-10

ALICE = "A"
BOB = "B"


class Generator(NamedTuple):
    party: str
    index: int

    def __str__(self):
        return f"{self.party}{self.index}"


def A(i):
    return Generator(ALICE, i)


def B(i):
    return Generator(BOB, i)


def parse_generator(token):
    token = token.strip()
    if len(token) < 2 or token[0] not in (ALICE, BOB):
        raise ValueError(f"bad generator token {token!r}")
    return Generator(token[0], int(token[1:]))


def wrap_index(i, n, limit=None):
    """Fold ``i`` into ``1..n`` with the antiperiodic convention.

    Indices already in ``1..limit`` (``limit`` defaults to ``n``) are kept,
    which lets Bob carry an extra, non-wrapped generator ``B_{n+1}``.

    Returns ``(sign, index)``.
    """
    limit = n if limit is None else limit
    if 1 <= i <= limit:
        return 1, i
    q, r = divmod(i - 1, n)
    return (-1 if q % 2 else 1), r + 1


def _reduce(letters):
    out = []
    for x in letters:
        if out and out[-1] == x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def normalize(letters, n, bob_inputs=None):
    """Normal form of a product of generators.

    Returns ``(sign, (alice, bob))`` where ``alice``/``bob`` are tuples of
    canonical indices.

    >>> normalize([B(1), A(2)], 3)
    (1, ((2,), (1,)))
    >>> normalize([A(5)], 4)
    (-1, ((1,), ()))
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    sign = 1
    alice, bob = [], []
    for g in letters:
        party, idx = g
        if party == ALICE:
            s, k = wrap_index(idx, n)
            alice.append(k)
        elif party == BOB:
            s, k = wrap_index(idx, n, bob_inputs)
            bob.append(k)
        else:
            raise ValueError(f"unknown party {party!r}")
        sign *= s
    return sign, (_reduce(alice), _reduce(bob))


def word_letters(word):
    alice, bob = word
    return [A(i) for i in alice] + [B(j) for j in bob]


def format_word(word):
    letters = word_letters(word)
    return " ".join(str(g) for g in letters) if letters else "1"


def _mul_words(w1, w2):
    return _reduce(w1[0] + w2[0]), _reduce(w1[1] + w2[1])


def _adj_word(w):
    return tuple(reversed(w[0])), tuple(reversed(w[1]))


IDENTITY_WORD = ((), ())


class NcPolynomial:
    """Polynomial with complex coefficients over normal-form words.

    Instances are treated as immutable; arithmetic returns new objects.
    """

    __slots__ = ("n_inputs", "bob_inputs", "terms")

    def __init__(self, n_inputs, terms=None, bob_inputs=None):
        if n_inputs < 2:
            raise ValueError("n_inputs must be >= 2")
        self.n_inputs = int(n_inputs)
        self.bob_inputs = int(bob_inputs) if bob_inputs is not None else self.n_inputs
        self.terms = {}
        for w, c in (terms or {}).items():
            c = complex(c)
            if abs(c) > PRUNE_TOL:
                self.terms[w] = c

    # -- constructors ----------------------------------------------------
    @classmethod
    def constant(cls, c, n, bob_inputs=None):
        return cls(n, {IDENTITY_WORD: c}, bob_inputs)

    @classmethod
    def monomial(cls, letters, n, coeff=1.0, bob_inputs=None):
        sign, word = normalize(letters, n, bob_inputs)
        return cls(n, {word: sign * coeff}, bob_inputs)

    @classmethod
    def gen(cls, party, index, n, bob_inputs=None):
        return cls.monomial([Generator(party, index)], n, bob_inputs=bob_inputs)

    # -- helpers ---------------------------------------------------------
    def _like(self, terms):
        return NcPolynomial(self.n_inputs, terms, self.bob_inputs)

    def _check(self, other):
        if (self.n_inputs, self.bob_inputs) != (other.n_inputs, other.bob_inputs):
            raise ValueError(
                f"input count mismatch: {(self.n_inputs, self.bob_inputs)} "
                f"vs {(other.n_inputs, other.bob_inputs)}"
            )

    def _coerce(self, other):
        if isinstance(other, NcPolynomial):
            self._check(other)
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return self._like({IDENTITY_WORD: other})
        return NotImplemented

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self.terms)
        for w, c in other.terms.items():
            terms[w] = terms.get(w, 0) + c
        return self._like(terms)

    __radd__ = __add__

    def __neg__(self):
        return self._like({w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self._like({w: c * other for w, c in self.terms.items()})
        if not isinstance(other, NcPolynomial):
            return NotImplemented
        return multiply(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        return self * (1.0 / other)

    def adjoint(self):
        return self._like({_adj_word(w): np.conj(c) for w, c in self.terms.items()})

    # -- inspection ------------------------------------------------------
    def coefficient(self, word):
        return self.terms.get(word, 0j)

    def identity_coefficient(self):
        return self.coefficient(IDENTITY_WORD)

    def is_hermitian(self, tol=SYMBOLIC_TOL):
        return poly_distance(self, self.adjoint()) <= tol

    def degree(self):
        return max((len(a) + len(b) for a, b in self.terms), default=0)

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if not isinstance(other, NcPolynomial):
            return NotImplemented
        return (self.n_inputs, self.bob_inputs) == (other.n_inputs, other.bob_inputs) and \
            poly_distance(self, other) <= PRUNE_TOL

    __hash__ = None

    def __repr__(self):
        body = " + ".join(f"({c:.6g})*{format_word(w)}" for w, c in sorted(self.terms.items()))
        return f"NcPolynomial(n={self.n_inputs}, {body or '0'})"

    def dump(self):
        """One term per line: ``coefficient<TAB>word``; identity word is ``1``."""
        from .linalg import format_complex

        lines = [f"{format_complex(c)}\t{format_word(w)}" for w, c in sorted(self.terms.items())]
        return "\n".join(lines) + ("\n" if lines else "")


def multiply(p, q):
    """Product ``p * q`` with every word renormalized."""
    p._check(q)
    terms = {}
    for w1, c1 in p.terms.items():
        for w2, c2 in q.terms.items():
            w = _mul_words(w1, w2)
            terms[w] = terms.get(w, 0) + c1 * c2
    return p._like(terms)


def sos_expand(terms, weights, n_inputs=2):
    """``sum_i w_i P_i^dagger P_i``.

    ``n_inputs`` only matters for an empty term list, which expands to the
    zero polynomial.
    """
    terms = list(terms)
    weights = list(weights)
    if len(terms) != len(weights):
        raise ValueError(f"{len(terms)} terms but {len(weights)} weights")
    if not terms:
        return NcPolynomial(n_inputs)
    if any(w < 0 for w in weights):
        raise ValueError("SOS weights must be nonnegative")
    acc = {}
    for p, w in zip(terms, weights):
        terms[0]._check(p)
        for w_, c in multiply(p.adjoint(), p).terms.items():
            acc[w_] = acc.get(w_, 0) + w * c
    return terms[0]._like(acc)


def poly_distance(p, q):
    """Max over all words of the absolute coefficient difference."""
    p._check(q)
    words = set(p.terms) | set(q.terms)
    return max((abs(p.coefficient(w) - q.coefficient(w)) for w in words), default=0.0)


def substitute(p, mapping):
    """Apply a letter substitution.

    ``mapping(generator) -> Generator`` may return an out-of-range index; it
    is folded with the usual sign convention.
    """
    n, nb = p.n_inputs, p.bob_inputs
    terms = {}
    for w, c in p.terms.items():
        images = [mapping(g) for g in word_letters(w)]
        sign, word = normalize(images, n, nb)
        terms[word] = terms.get(word, 0) + sign * c
    return p._like(terms)


def _party_product(obs, indices, dim, cache):
    if indices in cache:
        return cache[indices]
    if not indices:
        m = np.eye(dim, dtype=complex)
    else:
        m = _party_product(obs, indices[:-1], dim, cache) @ obs[indices[-1] - 1]
    cache[indices] = m
    return m


def evaluate(p, r):
    """Matrix of ``p`` on the joint space of realization ``r``.

    ``A_i -> A_i (x) 1`` and ``B_j -> 1 (x) B_j``.
    """
    alice, bob = list(r.alice_obs), list(r.bob_obs)
    if len(alice) < p.n_inputs or len(bob) < p.bob_inputs:
        raise ValueError(
            f"realization has {len(alice)}/{len(bob)} observables, polynomial "
            f"needs {p.n_inputs}/{p.bob_inputs}"
        )
    da, db = alice[0].shape[0], bob[0].shape[0]
    out = np.zeros((da * db, da * db), dtype=complex)
    ca, cb = {}, {}
    for (wa, wb), c in p.terms.items():
        out += c * np.kron(_party_product(alice, wa, da, ca), _party_product(bob, wb, db, cb))
    return out

"""The chained Bell scenario: coefficients, polynomials, bounds, realizations
and the two sum-of-squares certificates of the shifted Bell operator.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import linalg
from .ncpoly import ALICE, BOB, A, B, Generator, NcPolynomial, sos_expand, substitute

BRUTEFORCE_MAX_N = 12
SOS_SECOND_MAX_N = 8


def _half_angle_cos(n):
    return math.cos(math.pi / (2 * n))


def _check_n(n, minimum=2):
    if int(n) != n or n < minimum:
        raise ValueError(f"n must be an integer >= {minimum}, got {n}")


# -- coefficients ---------------------------------------------------------


def _check_coeff_index(n, i):
    _check_n(n, 3)
    if not 1 <= i <= n - 2:
        raise ValueError(f"coefficient index {i} outside 1..{n - 2} for n={n}")


def coeff_alpha(n, i):
    _check_coeff_index(n, i)
    s1 = math.sin(math.pi * i / n)
    s2 = math.sin(math.pi * (i + 1) / n)
    return math.sin(math.pi / n) / (2 * _half_angle_cos(n)) * math.sqrt(1 / (s1 * s2))


def coeff_beta(n, i):
    _check_coeff_index(n, i)
    s1 = math.sin(math.pi * i / n)
    s2 = math.sin(math.pi * (i + 1) / n)
    return -1 / (2 * _half_angle_cos(n)) * math.sqrt(s2 / s1)


def coeff_gamma(n, i):
    _check_coeff_index(n, i)
    s1 = math.sin(math.pi * i / n)
    s2 = math.sin(math.pi * (i + 1) / n)
    return 1 / (2 * _half_angle_cos(n)) * math.sqrt(s1 / s2)


def xi(n, i):
    """``2 cos((2i+1) pi / 2n)``."""
    return 2 * math.cos((2 * i + 1) * math.pi / (2 * n))


def zeta(n, i):
    """``2 cos(i pi / n)``."""
    return 2 * math.cos(i * math.pi / n)


def delta_components(n):
    """Closed forms of ``sum alpha_i^2``, ``sum beta_i^2``, ``sum gamma_i^2``
    and of the total identity coefficient of the first-degree certificate.

    Returns ``(delta_alpha, delta_beta, delta_gamma, delta)``.
    """
    _check_n(n, 3)
    c2 = _half_angle_cos(n) ** 2
    cn = math.cos(math.pi / n)
    d_alpha = cn / (2 * c2)
    d_beta = (n - 1) * cn / (4 * c2)
    d_gamma = (n - 1) * cn / (4 * c2)
    delta = _half_angle_cos(n) * (n + n / (2 * c2) + d_alpha + d_beta + d_gamma)
    return d_alpha, d_beta, d_gamma, delta


def delta_sums(n):
    """Direct sums of squared coefficients (the oracle for the closed forms)."""
    _check_n(n, 3)
    idx = range(1, n - 1)
    return (
        math.fsum(coeff_alpha(n, i) ** 2 for i in idx),
        math.fsum(coeff_beta(n, i) ** 2 for i in idx),
        math.fsum(coeff_gamma(n, i) ** 2 for i in idx),
    )


def second_degree_identity_coefficient(n):
    """Identity-word coefficient of the second-degree certificate, tallied
    block by block (shifted square, mixed squares, chain squares, and both
    alpha/beta/gamma blocks)."""
    _check_n(n, 2)
    c = _half_angle_cos(n)
    head = (8 * n**2 * c**2 + 4 * n + 4 * n * (n - 2) + 4 * n) / (8 * n * c)
    if n == 2:
        return head
    d_alpha, d_beta, d_gamma, _ = delta_components(n)
    return head + c * (d_alpha + d_beta + d_gamma)


# -- scenario -------------------------------------------------------------


@dataclass(frozen=True)
class ChainedScenario:
    n: int

    def __post_init__(self):
        _check_n(self.n)


@dataclass(frozen=True)
class Realization:
    """Pure state on ``H_A (x) H_B`` plus +-1 observables for each party."""

    state: np.ndarray
    alice_obs: tuple
    bob_obs: tuple

    def __post_init__(self):
        object.__setattr__(self, "state", np.asarray(self.state, dtype=complex))
        object.__setattr__(self, "alice_obs", tuple(np.asarray(o, dtype=complex) for o in self.alice_obs))
        object.__setattr__(self, "bob_obs", tuple(np.asarray(o, dtype=complex) for o in self.bob_obs))

    @property
    def n(self):
        return len(self.alice_obs)

    @property
    def dim_a(self):
        return self.alice_obs[0].shape[0]

    @property
    def dim_b(self):
        return self.bob_obs[0].shape[0]

    def validate(self, tol=1e-10):
        if len(self.alice_obs) < 2 or len(self.bob_obs) < len(self.alice_obs):
            raise ValueError("realization needs n >= 2 observables per party")
        if self.state.shape != (self.dim_a * self.dim_b,):
            raise ValueError(
                f"state of length {self.state.shape} does not match {self.dim_a}x{self.dim_b}"
            )
        if abs(np.linalg.norm(self.state) - 1) > tol:
            raise ValueError("state is not normalized")
        for party, obs, dim in (("A", self.alice_obs, self.dim_a), ("B", self.bob_obs, self.dim_b)):
            for k, o in enumerate(obs, 1):
                if o.shape != (dim, dim):
                    raise ValueError(f"{party}{k} has shape {o.shape}, expected {(dim, dim)}")
                if not linalg.is_hermitian(o, tol):
                    raise ValueError(f"{party}{k} is not Hermitian")
                if np.abs(o @ o - np.eye(dim)).max() > tol:
                    raise ValueError(f"{party}{k} does not square to the identity")
        return self

    def alice(self, i):
        """``A_i (x) 1`` with the wrap convention applied to ``i``."""
        from .ncpoly import wrap_index

        s, k = wrap_index(i, self.n)
        return s * np.kron(self.alice_obs[k - 1], np.eye(self.dim_b))

    def bob(self, j):
        from .ncpoly import wrap_index

        s, k = wrap_index(j, self.n, len(self.bob_obs))
        return s * np.kron(np.eye(self.dim_a), self.bob_obs[k - 1])


def _as_n(s):
    return s.n if isinstance(s, ChainedScenario) else int(s)


def alice_angle(n, i):
    return (i - 1) * math.pi / n


def bob_angle(n, i):
    return (2 * i - 1) * math.pi / (2 * n)


def xz_observable(angle):
    return math.sin(angle) * linalg.X + math.cos(angle) * linalg.Z


def reference_alice(n, i):
    return xz_observable(alice_angle(n, i))


def reference_bob(n, i):
    return xz_observable(bob_angle(n, i))


def realization_from_angles(alice_angles, bob_angles, state=None):
    state = linalg.PHI_PLUS if state is None else state
    return Realization(
        state,
        tuple(xz_observable(a) for a in alice_angles),
        tuple(xz_observable(b) for b in bob_angles),
    )


def optimal_realization(n):
    """Maximally entangled qubit pair with measurements equally spaced in the
    XZ plane; attains ``2n cos(pi/2n)``."""
    n = _as_n(n)
    _check_n(n)
    return realization_from_angles(
        [alice_angle(n, i) for i in range(1, n + 1)],
        [bob_angle(n, i) for i in range(1, n + 1)],
    )


# -- Bell polynomial and bounds ---------------------------------------------


def bell_polynomial(s):
    """``sum_i (A_i B_i + A_{i+1} B_i)`` with ``A_{n+1} = -A_1``."""
    n = _as_n(s)
    _check_n(n)
    p = NcPolynomial(n)
    for i in range(1, n + 1):
        p = p + NcPolynomial.monomial([A(i), B(i)], n) + NcPolynomial.monomial([A(i + 1), B(i)], n)
    return p


def max_violation(n):
    _check_n(n)
    return 2 * n * _half_angle_cos(n)


def shifted_bell_polynomial(s):
    n = _as_n(s)
    return max_violation(n) - bell_polynomial(n)


def classical_bound(n):
    _check_n(n)
    return 2 * n - 2


def correlation_matrix(p):
    """Split a polynomial of degree <= 2 into ``(const, a_vec, b_vec, C)`` so
    that its value on deterministic strategies ``a, b`` is
    ``const + a.a_vec + b.b_vec + a^T C b``."""
    na, nb = p.n_inputs, p.bob_inputs
    const = 0.0
    av, bv = np.zeros(na), np.zeros(nb)
    cm = np.zeros((na, nb))
    for (wa, wb), c in p.terms.items():
        if abs(c.imag) > 1e-12:
            raise ValueError("deterministic value needs real coefficients")
        c = c.real
        if len(wa) > 1 or len(wb) > 1:
            raise ValueError("deterministic enumeration handles correlator polynomials only")
        if wa and wb:
            cm[wa[0] - 1, wb[0] - 1] += c
        elif wa:
            av[wa[0] - 1] += c
        elif wb:
            bv[wb[0] - 1] += c
        else:
            const += c
    return const, av, bv, cm


def _all_sign_vectors(k):
    bits = (np.arange(2**k)[:, None] >> np.arange(k)[None, :]) & 1
    return 1.0 - 2.0 * bits


def classical_max_bruteforce(p, max_inputs=2 * BRUTEFORCE_MAX_N + 1, chunk=256):
    """Maximum of ``p`` over every deterministic +-1 assignment.

    All ``2^(n_A + n_B)`` strategies are evaluated; the work is blocked over
    Alice's strategies to bound memory.
    """
    const, av, bv, cm = correlation_matrix(p)
    na, nb = cm.shape
    if na + nb > max_inputs:
        raise ValueError(f"{na + nb} inputs exceeds the brute-force cap of {max_inputs}")
    sa = _all_sign_vectors(na)
    sb = _all_sign_vectors(nb)
    bob_part = sb @ bv
    best = -np.inf
    for start in range(0, sa.shape[0], chunk):
        block = sa[start:start + chunk]
        vals = (block @ cm) @ sb.T + bob_part[None, :] + (block @ av)[:, None]
        best = max(best, float(vals.max()))
    return const + best


def classical_bound_bruteforce(n):
    _check_n(n)
    if n > BRUTEFORCE_MAX_N:
        raise ValueError(f"brute force refuses n={n} > {BRUTEFORCE_MAX_N}")
    return int(round(classical_max_bruteforce(bell_polynomial(n))))


# -- sum-of-squares certificates -----------------------------------------------


class SosTerm(NamedTuple):
    poly: NcPolynomial
    weight: float
    block: str


def split_terms(terms):
    """``(polys, weights)`` from a list of :class:`SosTerm`."""
    return [t.poly for t in terms], [t.weight for t in terms]


def expand_terms(terms, n=2):
    polys, weights = split_terms(terms)
    return sos_expand(polys, weights, n)


def _gen(party, i, n):
    return NcPolynomial.gen(party, i, n)


def _abg(n, i, j, party):
    """``alpha_i C_j + beta_i C_{i+j} + gamma_i C_{i+j+1}``."""
    return (
        coeff_alpha(n, i) * _gen(party, j, n)
        + coeff_beta(n, i) * _gen(party, i + j, n)
        + coeff_gamma(n, i) * _gen(party, i + j + 1, n)
    )


def sos_terms_first(s, j_fixed=None):
    """First-degree certificate of ``B_max - Bell``.

    ``n`` squares ``1 - A_i (B_i + B_{i-1}) / 2cos(pi/2n)`` with weight
    ``cos(pi/2n)``, plus the alpha/beta/gamma block averaged over ``j``
    (weight ``cos(pi/2n)/n``) or taken at a single ``j_fixed`` (weight
    ``cos(pi/2n)``).
    """
    n = _as_n(s)
    _check_n(n)
    if j_fixed is not None and not 1 <= j_fixed <= n:
        raise ValueError(f"j_fixed must be in 1..{n}, got {j_fixed}")
    c = _half_angle_cos(n)
    terms = []
    for i in range(1, n + 1):
        p = 1 - (1 / (2 * c)) * (
            NcPolynomial.monomial([A(i), B(i)], n) + NcPolynomial.monomial([A(i), B(i - 1)], n)
        )
        terms.append(SosTerm(p, c, "main"))
    js = range(1, n + 1) if j_fixed is None else [j_fixed]
    w = c / n if j_fixed is None else c
    for j in js:
        for i in range(1, n - 1):
            terms.append(SosTerm(_abg(n, i, j, BOB), w, "abg"))
    return terms


def sos_terms_second(s):
    """Second-degree certificate of ``B_max - Bell``."""
    n = _as_n(s)
    _check_n(n)
    c = _half_angle_cos(n)
    w = 1 / (8 * n * c)
    mono = lambda *letters: NcPolynomial.monomial(list(letters), n)  # noqa: E731

    terms = [SosTerm(shifted_bell_polynomial(n), 2 * w, "shifted")]
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if (j - i) % n in (0, n - 1):
                continue
            p = mono(A(i), B(i)) + mono(A(i), B(i - 1)) - mono(A(j), B(j)) - mono(A(j + 1), B(j))
            terms.append(SosTerm(p, w, "mixed"))
    for i in range(1, n + 1):
        terms.append(SosTerm(mono(A(i), B(i)) - mono(A(i + 1), B(i + 1)), w, "chain"))
        terms.append(SosTerm(mono(A(i), B(i - 1)) - mono(A(i + 1), B(i)), w, "chain"))
    for i in range(1, n - 1):
        terms.append(SosTerm(_abg(n, i, 1, BOB), c / 2, "abg_B"))
        terms.append(SosTerm(_abg(n, i, 1, ALICE), c / 2, "abg_A"))
    return terms


def _to_bob(g):
    return Generator(BOB, g.index) if g.party == ALICE else g


def _to_alice(g):
    return Generator(ALICE, g.index) if g.party == BOB else g


def _dual_letter(g):
    # simultaneous A_i -> B_i, B_i -> A_{i+1}
    if g.party == ALICE:
        return Generator(BOB, g.index)
    return Generator(ALICE, g.index + 1)


def _swap_parties(g):
    return Generator(BOB if g.party == ALICE else ALICE, g.index)


_DUAL_RULES = {
    "main": _dual_letter,
    "shifted": _dual_letter,
    "mixed": _dual_letter,
    "chain": _dual_letter,
    "abg": _to_alice,
    "abg_A": _swap_parties,
    "abg_B": _swap_parties,
}


def sos_variant(terms, transform="swap_to_dual"):
    """Map a certificate to its party-swapped sibling.

    Correlator blocks take ``A_i -> B_i, B_i -> A_{i+1}``; the single-party
    alpha/beta/gamma blocks move to the other party with the same indices.
    """
    if transform != "swap_to_dual":
        raise ValueError(f"unknown transform {transform!r}")
    out = []
    for t in terms:
        rule = _DUAL_RULES.get(t.block)
        if rule is None:
            raise ValueError(f"no dual rule for block {t.block!r}")
        out.append(SosTerm(substitute(t.poly, rule), t.weight, t.block))
    return out


def sos_residual(terms, n):
    """Coefficient-wise distance between an expanded certificate and the
    shifted Bell polynomial."""
    from .ncpoly import poly_distance

    return poly_distance(expand_terms(terms, n), shifted_bell_polynomial(n))


def bell_value(r, poly=None):
    """``<psi| Bell |psi>`` for a realization."""
    from .ncpoly import evaluate

    poly = bell_polynomial(r.n) if poly is None else poly
    return float(np.real(np.vdot(r.state, evaluate(poly, r) @ r.state)))


def random_realization(n, dim, seed, bob_inputs=None):
    """Random pure state on ``C^dim (x) C^dim`` with random +-1 observables."""
    _check_n(n)
    rng = np.random.default_rng(seed)
    nb = n if bob_inputs is None else bob_inputs
    v = rng.standard_normal(dim * dim) + 1j * rng.standard_normal(dim * dim)
    alice = tuple(linalg.random_observable(dim, rng.integers(2**63)) for _ in range(n))
    bob = tuple(linalg.random_observable(dim, rng.integers(2**63)) for _ in range(nb))
    return Realization(v / np.linalg.norm(v), alice, bob)


def sos_numeric_residual(terms, r):
    """Operator-norm gap between ``sum w P^dagger P`` and the shifted Bell
    operator, both evaluated on the observables of ``r``."""
    from .ncpoly import evaluate

    n = r.n
    lhs = evaluate(shifted_bell_polynomial(n), r)
    rhs = np.zeros_like(lhs)
    for t in terms:
        m = evaluate(t.poly, r)
        rhs += t.weight * (linalg.dag(m) @ m)
    return linalg.op_norm(lhs - rhs)

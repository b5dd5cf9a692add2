"""Randomness certification from a modified chained inequality.

Bob gets one extra input ``B_{n+1}`` and the expression gains the single
correlator ``A_k B_{n+1}``.  At the quantum maximum ``B_{n+1}`` must mirror
``A_k``, and since ``A_{k+n/2}`` anticommutes with ``A_k`` the outcomes of
``(A_{k+n/2}, B_{n+1})`` are uniform: two bits of min-entropy.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .chained import Realization, bell_polynomial, max_violation, optimal_realization
from .ncpoly import A, B, NcPolynomial

NORMALIZATION_TOL = 1e-10


@dataclass(frozen=True)
class ProbabilityTable:
    """``probs[a, b]`` with outcome index 0 meaning ``+1``."""

    probs: np.ndarray
    setting_pair: tuple

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (2, 2):
            raise ValueError(f"probability table must be 2x2, got {p.shape}")
        if (p < -NORMALIZATION_TOL).any() or abs(p.sum() - 1) > NORMALIZATION_TOL:
            raise ValueError("entries must be nonnegative and sum to one")
        object.__setattr__(self, "probs", p)

    def as_dict(self):
        return {(a, b): float(self.probs[a, b]) for a in (0, 1) for b in (0, 1)}


def _check_even(n):
    if n < 2 or n % 2:
        raise ValueError(f"the modified inequality needs an even n >= 2, got {n}")


def _check_k(n, k):
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}, got {k}")


def modified_bell_polynomial(n, k=1):
    """``Bell_n + A_k B_{n+1}``; Bob carries ``n + 1`` generators."""
    _check_even(n)
    _check_k(n, k)
    base = bell_polynomial(n)
    p = NcPolynomial(n, base.terms, bob_inputs=n + 1)
    return p + NcPolynomial.monomial([A(k), B(n + 1)], n, bob_inputs=n + 1)


def modified_bounds(n):
    """``(classical, quantum) = (2n - 1, 2n cos(pi/2n) + 1)``."""
    _check_even(n)
    return 2 * n - 1, max_violation(n) + 1


def certified_alice_index(n, k=1):
    """Alice input paired with ``B_{n+1}``: ``k + n/2`` folded into ``1..n``."""
    _check_even(n)
    _check_k(n, k)
    return (k - 1 + n // 2) % n + 1


def optimal_modified_realization(n, k=1):
    """The chained optimum with ``B_{n+1} = A_k^T``.

    ``(A (x) 1)|phi+> = (1 (x) A^T)|phi+>``, so this is the mirror of ``A_k``
    through the maximally entangled state.
    """
    _check_even(n)
    _check_k(n, k)
    base = optimal_realization(n)
    extra = np.transpose(base.alice_obs[k - 1]).copy()
    return Realization(base.state, base.alice_obs, base.bob_obs + (extra,))


def outcome_table(r, i, j):
    """``p(a, b | A_i, B_j)`` from the projectors ``(1 +- O)/2``."""
    ia, ib = np.eye(r.dim_a), np.eye(r.dim_b)
    ao, bo = r.alice_obs[i - 1], r.bob_obs[j - 1]
    p = np.zeros((2, 2))
    for a, sa in enumerate((1, -1)):
        for b, sb in enumerate((1, -1)):
            m = np.kron((ia + sa * ao) / 2, (ib + sb * bo) / 2)
            p[a, b] = np.real(linalg.expectation(m, r.state))
    return ProbabilityTable(p, (i, j))


def certified_distribution(r, n=None, k=1):
    """Outcome table for ``(A_{k+n/2}, B_{n+1})``."""
    n = r.n if n is None else n
    _check_even(n)
    if len(r.bob_obs) < n + 1:
        raise ValueError(f"realization lacks B_{n + 1}")
    return outcome_table(r, certified_alice_index(n, k), n + 1)


def min_entropy(t):
    """``-log2`` of the largest entry, in bits."""
    probs = t.probs if isinstance(t, ProbabilityTable) else np.asarray(t, dtype=float)
    return float(-math.log2(probs.max()))


def marginals(r, n=None, k=1):
    """``(<A_k>, <B_{n+1}>, <A_{k+n/2} B_{n+1}>)``; all vanish at the optimum."""
    n = r.n if n is None else n
    ia, ib = np.eye(r.dim_a), np.eye(r.dim_b)
    ak = np.kron(r.alice_obs[k - 1], ib)
    bx = np.kron(ia, r.bob_obs[n])
    ac = np.kron(r.alice_obs[certified_alice_index(n, k) - 1], ib)
    return tuple(float(np.real(linalg.expectation(m, r.state))) for m in (ak, bx, ac @ bx))


def mirror_residual(r, n=None, k=1):
    """``||(A_k (x) 1 - 1 (x) B_{n+1}) psi||``."""
    n = r.n if n is None else n
    ia, ib = np.eye(r.dim_a), np.eye(r.dim_b)
    d = np.kron(r.alice_obs[k - 1], ib) - np.kron(ia, r.bob_obs[n])
    return float(np.linalg.norm(d @ r.state))

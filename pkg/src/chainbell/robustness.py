"""Closed-form robustness bounds for the chained-Bell self-test and a harness
that compares them against distances measured on perturbed realizations.

Every bound is a nonnegative combination of ``sqrt(eps)`` terms, so all of
them vanish at ``eps = 0`` and scale like ``sqrt(eps)``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .chained import (
    alice_angle,
    bell_value,
    bob_angle,
    coeff_alpha,
    coeff_gamma,
    max_violation,
    realization_from_angles,
    xi,
    zeta,
)
from .selftest import build_swap_operators, exact_identity_diagnostics, theorem1_distances

VACUOUS_THRESHOLD = 2.0
NEGATIVE_EPS_TOL = 1e-9
JUNK_VARIANTS = ("main_text", "appendix")

HOLDS = "holds"
VIOLATED = "violated"
VACUOUS = "bound-vacuous"


class BoundUndefinedError(ValueError):
    """Raised for ``n = 2`` where the alpha-indexed terms do not exist."""


@dataclass
class RobustnessReport:
    n: int
    epsilon: float
    eps1: float
    eps2: float
    omega: float
    junk_bound: float
    g: dict
    h: dict
    f_state: float
    f_A: dict
    f_B: dict
    f_AB: dict
    empirical: dict = None
    verdicts: dict = field(default_factory=dict)

    def bound_for(self, label):
        """Bound matching a :func:`theorem1_distances` label."""
        if label == "state":
            return self.f_state
        if label.startswith("A") and "B" in label:
            i, j = label[1:].split("B")
            return self.f_AB[(int(i), int(j))]
        if label.startswith("A"):
            return self.f_A[int(label[1:])]
        if label.startswith("B"):
            return self.f_B[int(label[1:])]
        raise KeyError(label)

    def bounds(self):
        """All bounds keyed by condition label."""
        out = {"state": self.f_state}
        out.update({f"A{i}": v for i, v in self.f_A.items()})
        out.update({f"B{j}": v for j, v in self.f_B.items()})
        out.update({f"A{i}B{j}": v for (i, j), v in self.f_AB.items()})
        return out

    @property
    def violated(self):
        return [k for k, v in self.verdicts.items() if v == VIOLATED]


def _check_eps(eps):
    if eps < 0 or not math.isfinite(eps):
        raise ValueError(f"epsilon must be a finite nonnegative number, got {eps}")


def _c(n):
    return math.cos(math.pi / (2 * n))


def eps1(eps, n):
    """``eps / cos(pi/2n)``."""
    _check_eps(eps)
    return eps / _c(n)


def eps2(eps, n):
    """``8 cos(pi/2n) eps``."""
    _check_eps(eps)
    return 8 * _c(n) * eps


def _require_formula_range(n):
    if n == 2:
        raise BoundUndefinedError("bound undefined at n=2")
    if n < 2:
        raise ValueError("n must be >= 2")


def omega_chsh(eps):
    """Anticommutator bound at ``n = 2``.

    From ``A_1 ~ (B_1 - B_2)/sqrt2`` and ``A_2 ~ (B_1 + B_2)/sqrt2`` (each
    within ``sqrt(eps1)``) and the exact anticommutation of these two Bob
    operators, whose norms are at most ``sqrt2``:
    ``||{A_1, A_2}psi|| <= 2 (1 + sqrt2) sqrt(eps1)``.
    """
    return 2 * (1 + math.sqrt(2)) * math.sqrt(eps1(eps, 2))


def omega(eps, n, chsh_fallback=False):
    """Bound on the anticommutator of Alice's extraction observables."""
    _check_eps(eps)
    if n == 2 and chsh_fallback:
        return omega_chsh(eps)
    _require_formula_range(n)
    e1, e2 = eps1(eps, n), eps2(eps, n)
    r1 = math.sqrt(e1)
    if n % 2 == 0:
        k = n // 2 - 1
        return math.sqrt(2 * e1) + (4 * r1 / coeff_alpha(n, k) + n * math.sqrt(2 * e2)) / xi(n, k)
    k = (n - 1) // 2
    z = zeta(n, k)
    al, ga = coeff_alpha(n, k), coeff_gamma(n, k)
    return (
        2 * math.sqrt(e1 * n) * (math.sqrt(2) / z + math.sqrt(n - 1))
        + r1 * (1 + math.sqrt(2))
        + 3 * r1 / (_c(n) * al * z) * (2 + ga / coeff_alpha(n, 1))
    )


# Alice's and Bob's structure bounds are sums of halves of two kinds of
# relation errors on |psi'>:
#   zeta type  ||(C_i +- C_{2-i} - zeta_m C_ref) psi||
#   xi type    ||(C_i +- C_{1-i} - xi_m C_ref) psi||
# Each is obtained from the alpha/beta/gamma relations, which hold within
# sqrt(eps1) on either party.


def _zeta_error(r1, n, m):
    if m == 0 or 2 * m == n:
        return 0.0
    if m == n - 1:
        # one alpha/beta/gamma relation at i = 1, j = n, divided by alpha_1
        return r1 / coeff_alpha(n, 1)
    return (2 + coeff_gamma(n, m) / coeff_alpha(n, 1)) * r1 / coeff_alpha(n, m)


def _xi_error(r1, n, m):
    if m < 0:
        m = -m - 1
    if m in (0, n - 1):
        return 0.0
    return 2 * r1 / coeff_alpha(n, m)


def _check_index(n, i):
    if not 1 <= i <= n:
        raise ValueError(f"index {i} out of range 1..{n}")


def g_bound(eps, n, i, chsh_fallback=False):
    """Bound on ``||(A_i - s_i X_A - c_i Z_A) psi'||``."""
    _check_eps(eps)
    _check_index(n, i)
    if n == 2:
        if chsh_fallback:
            return 0.0  # A_1 = Z_A and A_2 = X_A identically
        _require_formula_range(n)
    r1 = math.sqrt(eps1(eps, n))
    if n % 2 == 0:
        return 0.5 * _zeta_error(r1, n, abs(n // 2 + 1 - i)) + 0.5 * _zeta_error(r1, n, i - 1)
    return 0.5 * _xi_error(r1, n, (n + 1) // 2 - i) + 0.5 * _zeta_error(r1, n, i - 1)


def h_bound(eps, n, i, chsh_fallback=False):
    """Bound on ``||(B_i - s'_i X_B - c'_i Z_B) psi'||``."""
    _check_eps(eps)
    _check_index(n, i)
    if n == 2:
        if chsh_fallback:
            return 0.0  # B_i is exactly s'_i X_B + c'_i Z_B at n = 2
        _require_formula_range(n)
    r1 = math.sqrt(eps1(eps, n))
    if n % 2 == 0:
        return 0.5 * _xi_error(r1, n, n // 2 - i) + 0.5 * _xi_error(r1, n, i - 1)
    return 0.5 * _zeta_error(r1, n, abs((n + 1) // 2 - i)) + 0.5 * _xi_error(r1, n, i - 1)


def junk_bound(eps, n, variant="main_text", chsh_fallback=False):
    """Bound on the distance between the normalized and the ideal junk state.

    ``main_text``: ``(1/2 + sqrt2) sqrt(eps1) + omega``;
    ``appendix``: ``(1/2 + sqrt2) sqrt(eps1) + omega/4``.
    """
    if variant not in JUNK_VARIANTS:
        raise ValueError(f"unknown junk-bound variant {variant!r}")
    w = omega(eps, n, chsh_fallback)
    head = (0.5 + math.sqrt(2)) * math.sqrt(eps1(eps, n))
    return head + (w if variant == "main_text" else w / 4)


def f_bounds(eps, n, variant="main_text", chsh_fallback=False):
    """Every self-testing distance bound at violation deficit ``eps``."""
    _check_eps(eps)
    e1, e2 = eps1(eps, n), eps2(eps, n)
    r1 = math.sqrt(e1)
    w = omega(eps, n, chsh_fallback)
    junk = junk_bound(eps, n, variant, chsh_fallback)
    g = {i: g_bound(eps, n, i, chsh_fallback) for i in range(1, n + 1)}
    h = {j: h_bound(eps, n, j, chsh_fallback) for j in range(1, n + 1)}
    f_state = 6 * r1 + w + junk
    f_a = {i: 12 * r1 + 3 * w + g[i] + junk for i in g}
    f_b = {j: 13 * r1 + 3 * w + h[j] + junk for j in h}
    f_ab = {(i, j): 28 * r1 + 6 * w + g[i] + h[j] + junk for i in g for j in h}
    return RobustnessReport(
        n=n,
        epsilon=eps,
        eps1=e1,
        eps2=e2,
        omega=w,
        junk_bound=junk,
        g=g,
        h=h,
        f_state=f_state,
        f_A=f_a,
        f_B=f_b,
        f_AB=f_ab,
    )


def diagnostic_bounds(eps, n, chsh_fallback=False):
    """Bound for each label family of
    :func:`chainbell.selftest.exact_identity_diagnostics`.

    Returns a function ``label -> bound``.
    """
    r1 = math.sqrt(eps1(eps, n))
    rn = math.sqrt(n * eps2(eps, n))
    table = {
        "align_A": r1, "align_B": r1, "abg": r1, "match": r1, "regularized": r1,
        "chain_same": rn, "chain_shift": rn,
    }

    def bound(label):
        head = label.split(":")[0]
        if head in table:
            return table[head]
        if head == "anti":
            return omega(eps, n, chsh_fallback)
        if head == "structA":
            return g_bound(eps, n, int(label.split(":")[1]), chsh_fallback)
        if head == "structB":
            return h_bound(eps, n, int(label.split(":")[1]), chsh_fallback)
        raise KeyError(label)

    return bound


def verdict(measured, bound, vacuous_threshold=VACUOUS_THRESHOLD):
    if bound >= vacuous_threshold:
        return VACUOUS
    return HOLDS if measured <= bound else VIOLATED


def deficit(r):
    """``B_max - <Bell>``; tiny negative values from rounding are clipped."""
    eps = max_violation(r.n) - bell_value(r)
    if eps < -NEGATIVE_EPS_TOL:
        raise ValueError(f"violation exceeds the quantum maximum by {-eps:.3e}; broken realization")
    return max(eps, 0.0)


def empirical_check(r, variant="main_text", chsh_fallback=False, method="closed_form"):
    """Measure every self-testing distance on ``r`` and pair it with its bound.

    Verdicts: ``holds`` if measured <= bound, ``bound-vacuous`` if the bound
    is at least 2, ``violated`` otherwise.
    """
    eps = deficit(r)
    report = f_bounds(eps, r.n, variant, chsh_fallback)
    measured = theorem1_distances(r, method=method)
    report.empirical = dict(measured.condition_distances)
    report.verdicts = {
        k: verdict(v, report.bound_for(k)) for k, v in report.empirical.items()
    }
    return report


def diagnostics_check(r, chsh_fallback=False):
    """``{label: (residual, bound)}`` for every exact-case identity."""
    eps = deficit(r)
    bound = diagnostic_bounds(eps, r.n, chsh_fallback)
    res = exact_identity_diagnostics(r, build_swap_operators(r))
    return {k: (v, bound(k)) for k, v in res.items()}


def junk_gap(r):
    """``|| |phi> - |phi'> ||`` with ``|phi'> = (1 + Z_A)(1 + Z_B~)|psi'>/2sqrt2``."""
    ops = build_swap_operators(r)
    ia, ib = np.eye(r.dim_a), np.eye(r.dim_b)
    za, zb = np.kron(ops.z_a, ib), np.kron(ia, ops.z_b_tilde)
    v = r.state + za @ r.state
    v = v + zb @ v
    norm = np.linalg.norm(v)
    return float(np.linalg.norm(v / norm - v / (2 * math.sqrt(2))))


def perturbed_realization(n, jitter, seed, theta=None):
    """Optimal angles each shifted by a uniform draw from ``[-jitter, jitter]``.

    The state stays ``|phi+>`` unless ``theta`` is given, in which case it is
    ``cos(theta)|00> + sin(theta)|11>``.
    """
    if jitter < 0:
        raise ValueError("jitter must be nonnegative")
    rng = np.random.default_rng(seed)
    da = rng.uniform(-jitter, jitter, n)
    db = rng.uniform(-jitter, jitter, n)
    a = [alice_angle(n, i) + da[i - 1] for i in range(1, n + 1)]
    b = [bob_angle(n, i) + db[i - 1] for i in range(1, n + 1)]
    state = None
    if theta is not None:
        state = math.cos(theta) * np.kron(linalg.KET0, linalg.KET0) + math.sin(theta) * np.kron(
            linalg.KET1, linalg.KET1
        )
    return realization_from_angles(a, b, state)


def loglog_slope(xs, ys):
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])

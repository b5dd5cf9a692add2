"""Swap-isometry extraction of the certified qubit pair and the exact-case
diagnostics that make it work.

Output vectors of the isometry live on ``H_A (x) H_B (x) C^2 (x) C^2`` with
Alice's ancilla before Bob's.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .chained import (
    Realization,
    coeff_alpha,
    coeff_beta,
    coeff_gamma,
    reference_alice,
    reference_bob,
    alice_angle,
    bob_angle,
)
from .ncpoly import NcPolynomial, evaluate, wrap_index

JUNK_NORM_MIN = 1e-10


class DegenerateExtractionError(ValueError):
    """The junk-state normalization vanished ("extraction degenerate")."""


@dataclass(frozen=True)
class SwapOperators:
    x_a: np.ndarray
    z_a: np.ndarray
    x_b_tilde: np.ndarray
    z_b_tilde: np.ndarray
    x_a_raw: np.ndarray
    x_b_raw: np.ndarray
    z_b_raw: np.ndarray
    parity: str
    repaired_a_x: bool = False
    repaired_b_x: bool = False
    repaired_b_z: bool = False


@dataclass
class SwapReport:
    junk_state: np.ndarray
    fidelity: float
    condition_distances: dict = field(default_factory=dict)
    junk_norm: float = 0.0
    junk_exact_gap: float = 0.0

    @property
    def max_distance(self):
        return max(self.condition_distances.values(), default=0.0)


def build_swap_operators(r, kernel_threshold=linalg.DEFAULT_KERNEL_THRESHOLD):
    """Raw and regularized extraction observables for both parties.

    Even ``n``: ``X_A = A_{n/2+1}`` and ``X_B = (B_{n/2} + B_{n/2+1})/2c``.
    Odd ``n``: ``X_A = (A_{(n+1)/2} + A_{(n+3)/2})/2c`` and ``X_B = B_{(n+1)/2}``.
    Always ``Z_A = A_1`` and ``Z_B = (B_1 - B_n)/2c``; ``c = cos(pi/2n)``.
    Non-unitary ones are replaced by their polar unitary with kernel repair.
    """
    n = r.n
    c = math.cos(math.pi / (2 * n))
    a, b = r.alice_obs, r.bob_obs
    if n % 2 == 0:
        parity = "even"
        x_a_raw = a[n // 2]
        x_b_raw = (b[n // 2 - 1] + b[n // 2]) / (2 * c)
    else:
        parity = "odd"
        x_a_raw = (a[(n + 1) // 2 - 1] + a[(n + 3) // 2 - 1]) / (2 * c)
        x_b_raw = b[(n + 1) // 2 - 1]
    z_a = a[0]
    z_b_raw = (b[0] - b[n - 1]) / (2 * c)

    if parity == "odd":
        x_a, rep_ax = linalg.polar_unitary(x_a_raw, kernel_threshold)
    else:
        x_a, rep_ax = x_a_raw, False
    x_b, rep_bx = linalg.polar_unitary(x_b_raw, kernel_threshold)
    z_b, rep_bz = linalg.polar_unitary(z_b_raw, kernel_threshold)
    return SwapOperators(
        x_a=x_a,
        z_a=z_a,
        x_b_tilde=x_b,
        z_b_tilde=z_b,
        x_a_raw=x_a_raw,
        x_b_raw=x_b_raw,
        z_b_raw=z_b_raw,
        parity=parity,
        repaired_a_x=rep_ax,
        repaired_b_x=rep_bx,
        repaired_b_z=rep_bz,
    )


def _joint(ops, r):
    ia, ib = np.eye(r.dim_a), np.eye(r.dim_b)
    return (
        np.kron(ops.x_a, ib),
        np.kron(ops.z_a, ib),
        np.kron(ia, ops.x_b_tilde),
        np.kron(ia, ops.z_b_tilde),
    )


def _input_vector(r, pre_operator):
    if pre_operator is None:
        return r.state
    if isinstance(pre_operator, NcPolynomial):
        return evaluate(pre_operator, r) @ r.state
    return np.asarray(pre_operator, dtype=complex) @ r.state


def swap_closed_form(v, ops, r):
    """Isometry applied to ``v (x) |00>`` via its four-branch expansion."""
    xa, za, xb, zb = _joint(ops, r)
    pa, ma = v + za @ v, v - za @ v
    out = np.empty((v.shape[0], 2, 2), dtype=complex)
    out[:, 0, 0] = (pa + zb @ pa) / 4
    out[:, 1, 0] = xa @ (ma + zb @ ma) / 4
    out[:, 0, 1] = xb @ (pa - zb @ pa) / 4
    out[:, 1, 1] = xa @ (xb @ (ma - zb @ ma)) / 4
    return out.reshape(-1)


def swap_gates(v, ops, r):
    """Same isometry, gate by gate: H, controlled-Z, H, controlled-X on each
    side (Alice's ancilla first)."""
    xa, za, xb, zb = _joint(ops, r)
    d = v.shape[0]
    t = np.zeros((d, 2, 2), dtype=complex)
    t[:, 0, 0] = v
    h = linalg.H
    t = np.einsum("ab,dbc->dac", h, t)
    t = np.einsum("bc,dac->dab", h, t)
    t[:, 1, :] = za @ t[:, 1, :]
    t[:, :, 1] = zb @ t[:, :, 1]
    t = np.einsum("ab,dbc->dac", h, t)
    t = np.einsum("bc,dac->dab", h, t)
    t[:, 1, :] = xa @ t[:, 1, :]
    t[:, :, 1] = xb @ t[:, :, 1]
    return t.reshape(-1)


def apply_swap(r, ops, pre_operator=None, method="closed_form"):
    """Run the swap isometry on ``pre_operator |psi'> (x) |00>``.

    ``pre_operator`` may be an :class:`NcPolynomial` (evaluated on ``r``) or
    a matrix on the joint space.
    """
    v = _input_vector(r, pre_operator)
    if v.shape != (r.dim_a * r.dim_b,):
        raise ValueError("input vector does not match the realization dimensions")
    if method == "closed_form":
        return swap_closed_form(v, ops, r)
    if method == "gates":
        return swap_gates(v, ops, r)
    raise ValueError(f"unknown method {method!r}")


def ancilla_dims(r):
    return (r.dim_a, r.dim_b, 2, 2)


def ancilla_state(out, dims):
    rho = np.outer(out, np.conj(out))
    return linalg.partial_trace(rho, dims, keep=(2, 3))


def ancilla_fidelity(out, dims):
    """``<phi+| rho_anc |phi+>`` of the (normalized) swap output."""
    out = np.asarray(out, dtype=complex)
    norm = np.linalg.norm(out)
    rho = ancilla_state(out / norm, dims)
    return float(np.real(np.vdot(linalg.PHI_PLUS, rho @ linalg.PHI_PLUS)))


def junk_state(r, ops):
    """``(1 + Z_A)(1 + Z_B~)|psi'>`` normalized; also returns the norm."""
    _, za, _, zb = _joint(ops, r)
    v = r.state + za @ r.state
    v = v + zb @ v
    norm = float(np.linalg.norm(v))
    if norm < JUNK_NORM_MIN:
        raise DegenerateExtractionError(f"extraction degenerate: junk norm {norm:.3e}")
    return v / norm, norm


def junk_state_exact(r, ops):
    """``(1 + Z_A)^2 |psi'> / 2sqrt2``, the form valid at an exact optimum."""
    _, za, _, _ = _joint(ops, r)
    v = r.state + za @ r.state
    return (v + za @ v) / (2 * math.sqrt(2))


def _target(junk, ma, mb):
    return np.kron(junk, np.kron(ma, mb) @ linalg.PHI_PLUS)


def theorem1_distances(r, ops=None, method="closed_form"):
    """Distances between the isometry output and the reference output
    ``|junk> (x) A_i B_j |phi+>`` for every condition.

    Labels: ``"state"``, ``"A{i}"``, ``"B{j}"``, ``"A{i}B{j}"``.
    """
    n = r.n
    ops = build_swap_operators(r) if ops is None else ops
    junk, norm = junk_state(r, ops)
    dims = ancilla_dims(r)
    i2 = linalg.I2
    ref_a = [reference_alice(n, i) for i in range(1, n + 1)]
    ref_b = [reference_bob(n, j) for j in range(1, n + 1)]
    ia, ib = np.eye(r.dim_a), np.eye(r.dim_b)
    a_vecs = [np.kron(r.alice_obs[i], ib) @ r.state for i in range(n)]

    def run(v):
        if method == "gates":
            return swap_gates(v, ops, r)
        return swap_closed_form(v, ops, r)

    dist = {}
    out0 = run(r.state)
    dist["state"] = float(np.linalg.norm(out0 - _target(junk, i2, i2)))
    for i in range(n):
        dist[f"A{i + 1}"] = float(np.linalg.norm(run(a_vecs[i]) - _target(junk, ref_a[i], i2)))
    for j in range(n):
        bj = np.kron(ia, r.bob_obs[j])
        dist[f"B{j + 1}"] = float(np.linalg.norm(run(bj @ r.state) - _target(junk, i2, ref_b[j])))
        for i in range(n):
            out = run(bj @ a_vecs[i])
            dist[f"A{i + 1}B{j + 1}"] = float(np.linalg.norm(out - _target(junk, ref_a[i], ref_b[j])))
    exact_gap = float(np.linalg.norm(junk - junk_state_exact(r, ops)))
    return SwapReport(
        junk_state=junk,
        fidelity=ancilla_fidelity(out0, dims),
        condition_distances=dist,
        junk_norm=norm,
        junk_exact_gap=exact_gap,
    )


# -- exact-case identities ----------------------------------------------------


def exact_identity_diagnostics(r, ops=None):
    """Residual norms of every exact-case identity on ``|psi'>``.

    Label families (``C`` is ``A`` or ``B``):

    ``align_A:A{i}``         ``A_i - (B_i + B_{i-1})/2c``
    ``align_B:B{i}``         ``(A_i + A_{i+1})/2c - B_i``
    ``abg:C:i{i}:j{j}``      ``alpha_i C_j + beta_i C_{i+j} + gamma_i C_{i+j+1}``
    ``chain_same:i{i}``      ``A_i B_i - A_{i+1} B_{i+1}``
    ``chain_shift:i{i}``     ``A_i B_{i-1} - A_{i+1} B_i``
    ``match:X/Z``            ``X_A - X_B`` and ``Z_A - Z_B`` (raw operators)
    ``regularized:XB/ZB/XA`` regularized minus raw
    ``anti``                 the parity-appropriate anticommutator
    ``structA:{i}``          ``A_i - (s_i X_A + c_i Z_A)``, raw ``X_A``
    ``structB:{i}``          ``B_i - (s'_i X_B + c'_i Z_B)``, raw operators
    """
    n = r.n
    ops = build_swap_operators(r) if ops is None else ops
    psi = r.state
    c = math.cos(math.pi / (2 * n))
    ia, ib = np.eye(r.dim_a), np.eye(r.dim_b)
    a_ops = [np.kron(o, ib) for o in r.alice_obs[:n]]
    b_ops = [np.kron(ia, o) for o in r.bob_obs[:n]]

    def Aj(i):
        s, k = wrap_index(i, n)
        return s * a_ops[k - 1]

    def Bj(j):
        s, k = wrap_index(j, n)
        return s * b_ops[k - 1]

    def res(m):
        return float(np.linalg.norm(m @ psi))

    out = {}
    for i in range(1, n + 1):
        out[f"align_A:A{i}"] = res(Aj(i) - (Bj(i) + Bj(i - 1)) / (2 * c))
        out[f"align_B:B{i}"] = res((Aj(i) + Aj(i + 1)) / (2 * c) - Bj(i))
    for party, C in (("A", Aj), ("B", Bj)):
        for i in range(1, n - 1):
            al, be, ga = coeff_alpha(n, i), coeff_beta(n, i), coeff_gamma(n, i)
            for j in range(1, n + 1):
                out[f"abg:{party}:i{i}:j{j}"] = res(al * C(j) + be * C(i + j) + ga * C(i + j + 1))
    for i in range(1, n + 1):
        out[f"chain_same:i{i}"] = res(Aj(i) @ Bj(i) - Aj(i + 1) @ Bj(i + 1))
        out[f"chain_shift:i{i}"] = res(Aj(i) @ Bj(i - 1) - Aj(i + 1) @ Bj(i))

    xa_raw = np.kron(ops.x_a_raw, ib)
    za = np.kron(ops.z_a, ib)
    xb_raw = np.kron(ia, ops.x_b_raw)
    zb_raw = np.kron(ia, ops.z_b_raw)
    out["match:X"] = res(xa_raw - xb_raw)
    out["match:Z"] = res(za - zb_raw)
    out["regularized:XB"] = res(np.kron(ia, ops.x_b_tilde) - xb_raw)
    out["regularized:ZB"] = res(np.kron(ia, ops.z_b_tilde) - zb_raw)
    if ops.parity == "odd":
        out["regularized:XA"] = res(np.kron(ops.x_a, ib) - xa_raw)
        pair = Aj((n + 1) // 2) + Aj((n + 3) // 2)
    else:
        pair = Aj(n // 2 + 1)
    out["anti"] = res(Aj(1) @ pair + pair @ Aj(1))

    for i in range(1, n + 1):
        s, cc = math.sin(alice_angle(n, i)), math.cos(alice_angle(n, i))
        out[f"structA:{i}"] = res(Aj(i) - s * xa_raw - cc * za)
        s, cc = math.sin(bob_angle(n, i)), math.cos(bob_angle(n, i))
        out[f"structB:{i}"] = res(Bj(i) - s * xb_raw - cc * zb_raw)
    return out


# -- realizations equivalent to the optimum -----------------------------------


def embed_with_junk(r, junk, u_a=None, u_b=None):
    """Realization ``(U_A (x) U_B)(|psi> (x) |junk>)`` with observables
    ``U (O (x) 1) U^dagger``.

    ``junk`` is a matrix of amplitudes indexed ``[j_A, j_B]``; Alice's space
    becomes ``H_A (x) J_A`` and Bob's ``H_B (x) J_B``.
    """
    junk = np.asarray(junk, dtype=complex)
    ja, jb = junk.shape
    da, db = r.dim_a, r.dim_b
    psi = r.state.reshape(da, db)
    # amplitudes [a, ja, b, jb]
    big = np.einsum("ab,xy->axby", psi, junk).reshape(da * ja * db * jb)
    big = big / np.linalg.norm(big)
    u_a = np.eye(da * ja) if u_a is None else u_a
    u_b = np.eye(db * jb) if u_b is None else u_b
    state = np.kron(u_a, u_b) @ big
    alice = [u_a @ np.kron(o, np.eye(ja)) @ linalg.dag(u_a) for o in r.alice_obs]
    bob = [u_b @ np.kron(o, np.eye(jb)) @ linalg.dag(u_b) for o in r.bob_obs]
    hermit = lambda m: (m + linalg.dag(m)) / 2  # noqa: E731
    return Realization(state, tuple(hermit(m) for m in alice), tuple(hermit(m) for m in bob))


def random_junk(ja, jb, seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((ja, jb)) + 1j * rng.standard_normal((ja, jb))
    return m / np.linalg.norm(m)


def locally_rotated(r, seed, junk_dims=(1, 1)):
    """``r`` with random junk of the given dimensions and Haar local unitaries."""
    rng = np.random.default_rng(seed)
    ja, jb = junk_dims
    junk = random_junk(ja, jb, rng.integers(2**63))
    u_a = linalg.random_unitary(r.dim_a * ja, rng.integers(2**63))
    u_b = linalg.random_unitary(r.dim_b * jb, rng.integers(2**63))
    return embed_with_junk(r, junk, u_a, u_b)


def correlation_table(r):
    """``p[i, j, a, b]`` for every input pair; outcome index 0 is ``+1``."""
    ia, ib = np.eye(r.dim_a), np.eye(r.dim_b)
    na, nb = len(r.alice_obs), len(r.bob_obs)
    p = np.zeros((na, nb, 2, 2))
    for i, ao in enumerate(r.alice_obs):
        for j, bo in enumerate(r.bob_obs):
            for a, sa in enumerate((1, -1)):
                ma = np.kron((ia + sa * ao) / 2, ib)
                for b, sb in enumerate((1, -1)):
                    mb = np.kron(ia, (ib + sb * bo) / 2)
                    p[i, j, a, b] = np.real(np.vdot(r.state, ma @ mb @ r.state))
    return p

"""Dense complex matrix and state-vector helpers.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128`` and
states are one-dimensional complex arrays.  Every function here is pure.
"""

from functools import reduce

import numpy as np

DEFAULT_KERNEL_THRESHOLD = 1e-12
HERMITIAN_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def as_matrix(m):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    return m


def _require_square(m, what="matrix"):
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{what} must be square, got shape {m.shape}")


def tensor(*ops):
    """Kronecker product of any number of matrices or vectors."""
    if not ops:
        raise ValueError("tensor needs at least one operand")
    return reduce(np.kron, (np.asarray(o, dtype=complex) for o in ops))


def dag(m):
    return np.conj(np.transpose(m))


def is_hermitian(m, tol=HERMITIAN_TOL):
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and np.abs(m - dag(m)).max(initial=0.0) <= tol


def is_unitary(m, tol=1e-10):
    m = np.asarray(m)
    if m.shape[0] != m.shape[1]:
        return False
    return np.abs(dag(m) @ m - np.eye(m.shape[0])).max(initial=0.0) <= tol


def op_norm(m):
    """Largest singular value."""
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return 0.0
    if m.ndim == 1:
        return float(np.linalg.norm(m))
    return float(np.linalg.norm(m, ord=2))


def min_eigenvalue(m, tol=HERMITIAN_TOL):
    """Smallest eigenvalue of a Hermitian matrix.

    Raises
    ------
    ValueError
        If ``m`` is not Hermitian within ``tol``.
    """
    m = as_matrix(m)
    _require_square(m)
    if not is_hermitian(m, tol):
        raise ValueError("min_eigenvalue requires a Hermitian matrix")
    return float(np.linalg.eigvalsh((m + dag(m)) / 2)[0])


def polar_unitary(m, kernel_threshold=DEFAULT_KERNEL_THRESHOLD):
    """Unitary factor of the polar decomposition with kernel repair.

    Directions whose singular value falls below ``kernel_threshold`` are
    treated as kernel and mapped with eigenvalue one, i.e. the result is the
    unitary factor of ``m + P`` where ``P`` projects onto the kernel.

    Hermitian input goes through ``eigh`` (the unitary factor is then the
    sign function of ``m``); anything else through the SVD.

    Returns
    -------
    u : ndarray
        Unitary matrix with ``u |m| = m``.
    repaired : bool
        Whether any kernel direction was replaced.
    """
    m = as_matrix(m)
    _require_square(m, "polar_unitary input")
    if is_hermitian(m, 1e-12):
        evals, vecs = np.linalg.eigh((m + dag(m)) / 2)
        kernel = np.abs(evals) < kernel_threshold
        signs = np.where(kernel, 1.0, np.sign(evals))
        u = (vecs * signs) @ dag(vecs)
        return u, bool(kernel.any())

    # for non-normal input the kernel block of the full SVD is an arbitrary
    # unitary completion; it is only pinned to "eigenvalue 1" when m is normal
    w, s, vh = np.linalg.svd(m)
    kernel = s < kernel_threshold
    return w @ vh, bool(kernel.any())


def partial_trace(rho, dims, keep):
    """Trace out every subsystem not listed in ``keep``.

    Parameters
    ----------
    rho : array
        Density operator on the tensor product of ``dims``.
    dims : sequence of int
        Local dimensions, in tensor order.
    keep : iterable of int
        Indices of the subsystems to keep; output follows ``dims`` order.
    """
    rho = as_matrix(rho)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise ValueError(f"dims {dims} do not match matrix shape {rho.shape}")
    keep = sorted(set(keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    nsys = len(dims)
    trace_out = [k for k in range(nsys) if k not in keep]

    t = rho.reshape(dims + dims)
    # contract bra/ket pairs from the highest index down so positions stay valid
    for k in sorted(trace_out, reverse=True):
        cur = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=k + cur)
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d_keep, d_keep)


def random_unitary(dim, seed):
    """Haar-random unitary (QR of a complex Ginibre matrix, phase-fixed)."""
    rng = np.random.default_rng(seed)
    g = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_observable(dim, seed):
    """Random Hermitian involution ``2P - 1`` for a random projector ``P``.

    The rank of ``P`` is drawn uniformly from ``0..dim`` and its range is
    spanned by the leading columns of a Haar unitary.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    rank = int(rng.integers(0, dim + 1))
    u = random_unitary(dim, rng.integers(2**63))
    signs = np.concatenate([np.ones(rank), -np.ones(dim - rank)])
    obs = (u * signs) @ dag(u)
    # symmetrize to kill rounding asymmetry
    return (obs + dag(obs)) / 2


def normalize_state(v):
    v = np.asarray(v, dtype=complex)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("cannot normalize the zero vector")
    return v / norm


def expectation(op, state):
    return complex(np.vdot(state, op @ state))


def format_complex(z):
    """Locale-independent ``re±imi`` rendering that round-trips exactly."""
    z = complex(z)
    re = repr(float(z.real)) if z.real != 0 else "0.0"
    im = float(z.imag)
    sign = "-" if np.signbit(im) else "+"
    return f"{re}{sign}{repr(abs(im))}i"


def dump_matrix(m):
    """Text dump: one row per line, entries separated by single spaces."""
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    return "\n".join(" ".join(format_complex(z) for z in row) for row in m) + "\n"


def load_matrix(text):
    """Inverse of :func:`dump_matrix`."""
    rows = []
    for line in text.strip().splitlines():
        rows.append([complex(tok.replace("i", "j")) for tok in line.split()])
    return np.array(rows, dtype=complex)

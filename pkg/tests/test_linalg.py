import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from chainbell import linalg


def test_paulis_anticommute_and_square_to_one():
    for p in (linalg.X, linalg.Y, linalg.Z):
        assert_allclose(p @ p, linalg.I2)
    assert_allclose(linalg.X @ linalg.Z + linalg.Z @ linalg.X, 0)


def test_tensor_matches_kron_and_order():
    m = linalg.tensor(linalg.X, linalg.I2, linalg.Z)
    assert m.shape == (8, 8)
    assert_allclose(m, np.kron(np.kron(linalg.X, linalg.I2), linalg.Z))
    assert_allclose(linalg.tensor(linalg.KET0, linalg.KET1), [0, 1, 0, 0])
    with pytest.raises(ValueError):
        linalg.tensor()


def test_op_norm_and_min_eigenvalue():
    assert linalg.op_norm(2 * linalg.X) == pytest.approx(2.0)
    assert linalg.min_eigenvalue(linalg.Z) == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        linalg.min_eigenvalue(np.array([[0, 1], [0, 0]]))


class TestPolar:
    def test_unitary_input_is_returned(self):
        u, repaired = linalg.polar_unitary(linalg.X)
        assert_allclose(u, linalg.X, atol=1e-14)
        assert not repaired

    def test_kernel_mapped_to_plus_one(self):
        u, repaired = linalg.polar_unitary(np.diag([0.0, -0.3]))
        assert repaired
        assert_allclose(u, np.diag([1.0, -1.0]))

    def test_zero_matrix_gives_identity(self):
        u, repaired = linalg.polar_unitary(np.zeros((3, 3)))
        assert repaired
        assert_allclose(u, np.eye(3))

    def test_non_hermitian_factorization(self):
        m = np.array([[1.0, 2.0], [0.5j, -1.0]])
        u, repaired = linalg.polar_unitary(m)
        assert not repaired
        assert linalg.is_unitary(u)
        w, s, vh = np.linalg.svd(m)
        p = vh.conj().T @ np.diag(s) @ vh
        assert_allclose(u @ p, m, atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 5), st.integers(0, 2**31))
    def test_hermitian_output_is_hermitian_unitary(self, dim, seed):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        u, _ = linalg.polar_unitary(a + linalg.dag(a))
        assert linalg.is_unitary(u)
        assert linalg.is_hermitian(u)


class TestPartialTrace:
    def test_bell_state_marginal(self):
        rho = np.outer(linalg.PHI_PLUS, linalg.PHI_PLUS.conj())
        assert_allclose(linalg.partial_trace(rho, (2, 2), [0]), np.eye(2) / 2)

    def test_product_state_keeps_factor(self):
        a = np.diag([0.3, 0.7]).astype(complex)
        b = np.full((3, 3), 1 / 3, dtype=complex)
        rho = np.kron(a, b)
        assert_allclose(linalg.partial_trace(rho, (2, 3), [1]), b)
        assert_allclose(linalg.partial_trace(rho, (2, 3), [0]), a)

    def test_keep_order_and_middle_system(self):
        rng = np.random.default_rng(2)
        mats = [rng.standard_normal((d, d)) for d in (2, 3, 2)]
        mats = [m @ m.T / np.trace(m @ m.T) for m in mats]
        rho = linalg.tensor(*mats)
        assert_allclose(linalg.partial_trace(rho, (2, 3, 2), [0, 2]), np.kron(mats[0], mats[2]), atol=1e-14)
        assert_allclose(linalg.partial_trace(rho, (2, 3, 2), [1]), mats[1], atol=1e-14)

    def test_bad_dims(self):
        with pytest.raises(ValueError):
            linalg.partial_trace(np.eye(4), (2, 3), [0])
        with pytest.raises(ValueError):
            linalg.partial_trace(np.eye(4), (2, 2), [5])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31))
def test_random_observable_is_involution(dim, seed):
    o = linalg.random_observable(dim, seed)
    assert linalg.is_hermitian(o)
    assert_allclose(o @ o, np.eye(dim), atol=1e-12)


def test_random_unitary_deterministic():
    assert_allclose(linalg.random_unitary(3, 7), linalg.random_unitary(3, 7))
    assert linalg.is_unitary(linalg.random_unitary(4, 1))


def test_dump_load_roundtrip_exact():
    m = linalg.random_unitary(3, 11) * 1e-7 + np.array([[1e300, 0, -0.0]] * 3)
    assert np.array_equal(linalg.load_matrix(linalg.dump_matrix(m)), m)
    assert linalg.format_complex(1 - 2j) == "1.0-2.0i"

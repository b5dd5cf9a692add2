import numpy as np
import pytest
from numpy.testing import assert_allclose

from chainbell import randomness as rnd
from chainbell.chained import Realization, bell_value, classical_max_bruteforce
from chainbell.selftest import locally_rotated


def test_modified_polynomial_shape():
    p = rnd.modified_bell_polynomial(2)
    assert len(p) == 5
    assert p.bob_inputs == 3
    assert p.coefficient(((1,), (3,))) == 1
    assert len(rnd.modified_bell_polynomial(4)) == 9
    with pytest.raises(ValueError):
        rnd.modified_bell_polynomial(3)


@pytest.mark.parametrize("n,classical,quantum", [(2, 3, 3.8284271247461901), (4, 7, 8.3910362600902940)])
def test_bounds_and_bruteforce(n, classical, quantum):
    c, q = rnd.modified_bounds(n)
    assert c == classical
    assert q == pytest.approx(quantum, abs=1e-12)
    assert classical_max_bruteforce(rnd.modified_bell_polynomial(n)) == classical


@pytest.mark.parametrize("n", [2, 4, 6])
def test_optimum_is_uniform(n):
    r = rnd.optimal_modified_realization(n)
    assert bell_value(r, rnd.modified_bell_polynomial(n)) == pytest.approx(rnd.modified_bounds(n)[1], abs=1e-9)
    assert rnd.mirror_residual(r) < 1e-10
    t = rnd.certified_distribution(r)
    assert t.setting_pair == (n // 2 + 1, n + 1)
    assert_allclose(t.probs, 0.25, atol=1e-9)
    assert rnd.min_entropy(t) == pytest.approx(2.0, abs=1e-7)
    assert_allclose(rnd.marginals(r), 0, atol=1e-9)
    for o in r.bob_obs:
        assert_allclose(o @ o, np.eye(2), atol=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_extended_pairs_uniform(k):
    r = rnd.optimal_modified_realization(4, k)
    assert bell_value(r, rnd.modified_bell_polynomial(4, k)) == pytest.approx(rnd.modified_bounds(4)[1], abs=1e-9)
    assert_allclose(rnd.certified_distribution(r, k=k).probs, 0.25, atol=1e-9)


def test_rotated_optimum_uniform():
    r = locally_rotated(rnd.optimal_modified_realization(4), seed=3, junk_dims=(2, 2))
    assert_allclose(rnd.certified_distribution(r, 4).probs, 0.25, atol=1e-9)
    assert_allclose(rnd.marginals(r, 4), 0, atol=1e-9)


def test_min_entropy_limits():
    assert rnd.min_entropy(np.full((2, 2), 0.25)) == 2.0
    assert rnd.min_entropy(rnd.ProbabilityTable(np.diag([1.0, 0.0]), (1, 1))) == 0.0
    assert rnd.min_entropy(np.array([[0.5, 0.25], [0.25, 0]])) == pytest.approx(1.0)


def test_table_validation():
    with pytest.raises(ValueError):
        rnd.ProbabilityTable(np.full((2, 2), 0.3), (1, 1))
    r = rnd.optimal_modified_realization(2)
    short = Realization(r.state, r.alice_obs, r.bob_obs[:2])
    with pytest.raises(ValueError, match="lacks B_3"):
        rnd.certified_distribution(short)

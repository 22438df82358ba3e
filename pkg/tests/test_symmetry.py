import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homghost import rng
from homghost.symmetry import (
    change_basis,
    exchange_apply,
    invariance_trials,
    is_unitary,
    random_joint_vector,
    random_unitary,
    symmetry_decompose,
    symmetry_eigenvalue,
)

S2 = 1 / math.sqrt(2)


def ket(n, pairs):
    v = np.zeros((n, n), dtype=complex)
    for (i, j), a in pairs.items():
        v[i, j] = a
    return v


SYM = ket(2, {(0, 1): S2, (1, 0): S2})
ANTI = ket(2, {(0, 1): S2, (1, 0): -S2})


def test_exchange_examples():
    assert np.array_equal(exchange_apply(SYM), SYM)
    assert np.array_equal(exchange_apply(ANTI), -ANTI)
    v = random_joint_vector(5, np.random.default_rng(0))
    assert np.array_equal(exchange_apply(exchange_apply(v)), v)


def test_decompose_examples():
    sym, anti = symmetry_decompose(ANTI)
    assert not sym.any()
    prod = ket(3, {(0, 0): 1.0})
    sym, anti = symmetry_decompose(prod)
    assert np.array_equal(sym, prod) and not anti.any()
    v = random_joint_vector(4, np.random.default_rng(1))
    sym, anti = symmetry_decompose(v)
    assert np.linalg.norm(sym) ** 2 + np.linalg.norm(anti) ** 2 == pytest.approx(np.linalg.norm(v) ** 2, abs=1e-12)


def test_eigenvalue_examples():
    assert symmetry_eigenvalue(ANTI) == -1
    assert symmetry_eigenvalue(SYM) == 1
    assert symmetry_eigenvalue(ket(2, {(0, 1): 1.0})) is None
    with pytest.raises(ValueError):
        symmetry_eigenvalue(np.zeros((2, 2)))


def test_change_basis_identity_and_errors():
    v = random_joint_vector(3, np.random.default_rng(2))
    np.testing.assert_array_equal(change_basis(v, np.eye(3)), v)
    with pytest.raises(ValueError):
        change_basis(v, np.ones((3, 3)))
    with pytest.raises(ValueError):
        change_basis(v, np.eye(2))
    with pytest.raises(ValueError):
        exchange_apply(np.zeros(4))


@pytest.mark.parametrize("parity", [1, -1])
@pytest.mark.parametrize("n", [2, 3, 4, 8])
def test_same_unitary_preserves_symmetry(n, parity):
    gen = np.random.default_rng(n * 10 + parity)
    for _ in range(20):
        v = random_joint_vector(n, gen, parity)
        u = random_unitary(n, gen)
        assert is_unitary(u)
        assert symmetry_eigenvalue(change_basis(v, u)) == parity


def test_different_unitaries_can_break_symmetry():
    gen = np.random.default_rng(3)
    v = random_joint_vector(3, gen, -1)
    u1, u2 = random_unitary(3, gen), random_unitary(3, gen)
    assert symmetry_eigenvalue(change_basis(v, u1, u2)) is None


def test_invariance_trials():
    res = invariance_trials(200, seed=4)
    assert res == {"trials": 200, "preserved": 200, "failures": [], "involution_exact": True}


def test_trials_reproducible():
    a = rng.stream(9, 3, rng.TRIALS).standard_normal(4)
    b = rng.stream(9, 3, rng.TRIALS).standard_normal(4)
    c = rng.stream(9, 3, rng.MASKS).standard_normal(4)
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    with pytest.raises(ValueError):
        rng.stream(-1, 0)


@settings(max_examples=50)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_decomposition_parts_are_eigenvectors(n, seed):
    v = random_joint_vector(n, np.random.default_rng(seed))
    sym, anti = symmetry_decompose(v)
    np.testing.assert_allclose(sym + anti, v, rtol=0, atol=1e-15)  # equal up to one rounding
    if np.linalg.norm(sym) > 1e-12:
        assert symmetry_eigenvalue(sym) == 1
    if np.linalg.norm(anti) > 1e-12:
        assert symmetry_eigenvalue(anti) == -1
    assert np.array_equal(exchange_apply(exchange_apply(v)), v)

import numpy as np
import pytest

from phwell import numlin
from phwell.errors import NotHermitian


def test_kernel_basis_row_vector():
    K = numlin.kernel_basis(np.array([[1.0, 0.0]]))
    assert K.shape == (2, 1)
    np.testing.assert_allclose(np.abs(K[:, 0]), [0.0, 1.0], atol=1e-14)


def test_kernel_basis_zero_matrix():
    K = numlin.kernel_basis(np.zeros((2, 2)))
    assert K.shape == (2, 2)
    np.testing.assert_allclose(K.conj().T @ K, np.eye(2), atol=1e-14)


def test_kernel_basis_hand_nullspace():
    # [u-1, u+1] at u=2 -> kernel spanned by (3, -1)/sqrt(10)
    K = numlin.kernel_basis(np.array([[1.0, 3.0]]))
    assert K.shape == (2, 1)
    target = np.array([3.0, -1.0]) / np.sqrt(10.0)
    assert abs(abs(np.vdot(K[:, 0], target)) - 1.0) < 1e-12


def test_kernel_basis_random_properties():
    rng = np.random.default_rng(0)
    for _ in range(30):
        p, q = rng.integers(1, 7, size=2)
        M = rng.normal(size=(p, q)) + 1j * rng.normal(size=(p, q))
        K = numlin.kernel_basis(M)
        if K.shape[1]:
            smax = np.linalg.norm(M, 2)
            assert np.linalg.norm(M @ K) <= 1e-10 * smax * np.sqrt(q) + 1e-15
            np.testing.assert_allclose(K.conj().T @ K, np.eye(K.shape[1]),
                                       atol=1e-12)


def test_definiteness_zero():
    rep = numlin.definiteness(np.zeros((3, 3)))
    assert rep.verdict == "zero"
    assert rep.is_psd and rep.is_nsd


def test_definiteness_tree_diagonal():
    rep = numlin.definiteness(0.25 * np.diag([1.0, 1.0, 2.0, 2.0, 2.0, 2.0]))
    assert rep.verdict == "positive_semidefinite"


def test_definiteness_indefinite():
    rep = numlin.definiteness(np.diag([1.0, -1.0]))
    assert rep.verdict == "indefinite"


def test_definiteness_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        numlin.definiteness(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_operator_norm_values():
    assert numlin.operator_norm(np.eye(3)) == pytest.approx(1.0)
    assert numlin.operator_norm(np.array([[0.0, 2.0], [0.0, 0.0]])) == pytest.approx(2.0)
    # truncated down-shift has norm exactly 1 for d >= 2
    L = np.zeros((5, 5))
    for j in range(4):
        L[j, j + 1] = 1.0
    assert numlin.operator_norm(L) == pytest.approx(1.0, abs=1e-14)


def test_hermitian_eigendecomposition_reconstructs():
    rng = np.random.default_rng(1)
    for _ in range(20):
        d = int(rng.integers(1, 7))
        A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        P = 0.5 * (A + A.conj().T)
        S, w = numlin.hermitian_eigendecomposition(P)
        np.testing.assert_allclose(S.conj().T @ np.diag(w) @ S, P,
                                   atol=1e-12 * max(1, np.linalg.norm(P, 2)))
        np.testing.assert_allclose(S.conj().T @ S, np.eye(d), atol=1e-12)
        assert np.all(np.diff(w) <= 1e-12)  # descending


def test_hermitian_eigendecomposition_examples():
    S, w = numlin.hermitian_eigendecomposition(np.array([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(w, [1.0, -1.0], atol=1e-14)
    np.testing.assert_allclose(np.abs(S), np.full((2, 2), 1 / np.sqrt(2)), atol=1e-14)
    S2, w2 = numlin.hermitian_eigendecomposition(np.diag([2.0, -3.0]))
    np.testing.assert_allclose(w2, [2.0, -3.0])
    np.testing.assert_allclose(np.abs(S2), np.eye(2), atol=1e-14)


@pytest.mark.parametrize("P,expected", [
    (np.array([[0.0, 1.0], [1.0, 0.0]]), (1, 0, 1)),
    (-np.eye(3), (0, 0, 3)),
    (np.diag([1.0, 0.0]), (1, 1, 0)),
])
def test_inertia_examples(P, expected):
    assert numlin.inertia(P) == expected


def test_inertia_sums_to_dimension():
    rng = np.random.default_rng(2)
    for _ in range(20):
        d = int(rng.integers(1, 8))
        A = rng.normal(size=(d, d))
        P = A + A.T
        n1, n0, n2 = numlin.inertia(P)
        assert n1 + n0 + n2 == d

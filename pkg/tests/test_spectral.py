import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netcusum.errors import ConvergenceError, ValidationError
from netcusum.spectral import SpectralConfig, numerical_rank, op_norm
from oracles import exact_rank, jacobi_op_norm


def random_symmetric(rng, n):
    A = rng.normal(size=(n, n))
    return (A + A.T) / 2


@st.composite
def symmetric_matrices(draw, max_n=25):
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_symmetric(np.random.default_rng(seed), n)


def test_config_validation():
    with pytest.raises(ValidationError):
        SpectralConfig(rel_tol=0)
    with pytest.raises(ValidationError):
        SpectralConfig(max_iter=0)
    with pytest.raises(ValidationError):
        SpectralConfig(restarts=0)


def test_zero_matrix():
    assert op_norm(np.zeros((7, 7))) == 0.0
    assert op_norm(np.zeros((0, 0))) == 0.0


def test_scaled_all_ones_minus_identity():
    n, rho = 100, 0.05
    M = rho * (np.ones((n, n)) - np.eye(n))
    assert op_norm(M) == pytest.approx(4.95, rel=1e-10)
    assert jacobi_op_norm(M) == pytest.approx(4.95, rel=1e-12)


def test_random_10x10_matches_jacobi():
    M = random_symmetric(np.random.default_rng(10), 10)
    ref = jacobi_op_norm(M)
    assert abs(op_norm(M) - ref) <= 1e-8 * ref


@settings(max_examples=150, deadline=None)
@given(symmetric_matrices())
def test_matches_jacobi_oracle(M):
    ref = jacobi_op_norm(M)
    assert abs(op_norm(M) - ref) <= 1e-8 * ref


@pytest.mark.parametrize("c", [-2.0, 0.5, 10.0])
def test_scale_equivariance(c):
    rng = np.random.default_rng(3)
    for n in (2, 9, 30):
        M = random_symmetric(rng, n)
        assert op_norm(c * M) == pytest.approx(abs(c) * op_norm(M), rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(symmetric_matrices(max_n=20), st.integers(0, 2**32 - 1))
def test_triangle_inequality(A, seed):
    B = random_symmetric(np.random.default_rng(seed), A.shape[0])
    assert op_norm(A + B) <= op_norm(A) + op_norm(B) + 1e-9 * (op_norm(A) + op_norm(B))


def test_sign_ambiguous_spectra():
    assert op_norm(np.array([[0.0, 3.0], [3.0, 0.0]])) == pytest.approx(3.0, rel=1e-12)
    # Spectrum symmetric about zero: +-5, +-2.
    D = np.diag([5.0, -5.0, 2.0, -2.0])
    Q, _ = np.linalg.qr(np.random.default_rng(0).normal(size=(4, 4)))
    assert op_norm(Q @ D @ Q.T) == pytest.approx(5.0, rel=1e-10)
    # Dominant eigenvalue negative.
    assert op_norm(np.diag([1.0, -7.0, 3.0])) == pytest.approx(7.0, rel=1e-12)


def test_bipartite_adjacency():
    # Bipartite graphs have a spectrum symmetric about zero.
    n1, n2 = 6, 9
    B = np.ones((n1, n2))
    M = np.block([[np.zeros((n1, n1)), B], [B.T, np.zeros((n2, n2))]])
    assert op_norm(M) == pytest.approx(np.sqrt(n1 * n2), rel=1e-10)


def test_deterministic_given_seed():
    M = random_symmetric(np.random.default_rng(5), 40)
    cfg = SpectralConfig(seed=11)
    assert op_norm(M, cfg) == op_norm(M, cfg)


def test_rejects_asymmetric_and_non_finite():
    with pytest.raises(ValidationError):
        op_norm(np.array([[0.0, 1.0], [1.0 + 1e-9, 0.0]]))
    with pytest.raises(ValidationError):
        op_norm(np.array([[np.inf, 0.0], [0.0, 1.0]]))
    with pytest.raises(ValidationError):
        op_norm(np.zeros((2, 3)))
    # Asymmetry below the tolerance is accepted.
    op_norm(np.array([[0.0, 1.0], [1.0 + 1e-14, 0.0]]))


def test_short_iteration_budget_with_spectral_gap():
    # Budget below n: a well separated top eigenvalue still converges.
    rng = np.random.default_rng(8)
    Q, _ = np.linalg.qr(rng.normal(size=(30, 30)))
    eig = np.concatenate([[-10.0], rng.uniform(-1, 1, 29)])
    M = Q @ np.diag(eig) @ Q.T
    M = (M + M.T) / 2
    assert op_norm(M, SpectralConfig(max_iter=20, restarts=2)) == pytest.approx(10.0, rel=1e-9)


def test_non_convergence_carries_best_estimate():
    # Two iterations cannot resolve the extreme eigenvalues of a random 30x30.
    M = random_symmetric(np.random.default_rng(2), 30)
    with pytest.raises(ConvergenceError) as info:
        op_norm(M, SpectralConfig(max_iter=2, restarts=1))
    assert 0 < info.value.best_estimate <= jacobi_op_norm(M) * (1 + 1e-12)


# numerical_rank


def test_rank_examples():
    assert numerical_rank(np.eye(5)) == 5
    assert numerical_rank(np.ones((6, 6))) == 1
    assert numerical_rank(np.zeros((3, 3))) == 0
    M = np.kron(np.array([[0.6, 1.0], [1.0, 0.6]]), np.ones((4, 4)))
    assert numerical_rank(M) == exact_rank(M) == 2


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 8), st.integers(0, 2**32 - 1))
def test_rank_matches_row_reduction(rows, cols, r, seed):
    rng = np.random.default_rng(seed)
    r = min(r, rows, cols)
    # Integer low-rank products are exact in floating point.
    M = (rng.integers(-3, 4, size=(rows, r)) @ rng.integers(-3, 4, size=(r, cols))).astype(float)
    assert numerical_rank(M) == exact_rank(M)


def test_rank_rejects_negative_tol():
    with pytest.raises(ValidationError):
        numerical_rank(np.eye(2), tol=-1)

import numpy as np
import pytest

from bshear.errors import ConvergenceError, NumericalError
from bshear.linalg import (LinearOperatorHandle, cg_solve,
                           extremal_eigenvalues, largest_singular_value)

RNG = np.random.default_rng(11)


def spd_handle(dim, seed=5, shift=0.5):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((dim, dim))
    A = A @ A.T + shift * np.eye(dim)
    return A, LinearOperatorHandle.from_matrix(A, self_adjoint=True)


def test_cg_identity_one_iteration():
    I = LinearOperatorHandle.from_matrix(np.eye(3), self_adjoint=True)
    b = np.array([1.0, 2.0, 3.0])
    x, info = cg_solve(I, b, return_info=True)
    assert np.allclose(x, b)
    assert info["iterations"] == 1


def test_cg_diagonal_closed_form():
    D = LinearOperatorHandle.from_matrix(np.diag([1.0, 2.0, 4.0]), self_adjoint=True)
    x = cg_solve(D, np.array([1.0, 2.0, 4.0]), tol=1e-12)
    assert np.allclose(x, np.ones(3), atol=1e-10)


def test_cg_matches_dense_solver():
    A, h = spd_handle(60)
    b = RNG.standard_normal(60)
    x = cg_solve(h, b, tol=1e-12, max_iter=5000)
    assert np.linalg.norm(x - np.linalg.solve(A, b)) <= 1e-10 * np.linalg.norm(x)


def test_cg_residuals_nonincreasing_up_to_transient():
    _, h = spd_handle(80, seed=3)
    b = RNG.standard_normal(80)
    _, info = cg_solve(h, b, tol=1e-10, max_iter=5000, return_info=True)
    res = np.array(info["residuals"])
    best = np.minimum.accumulate(res)
    assert (res <= 10.0 * np.maximum(best, 1e-300)).all()


def test_cg_zero_rhs():
    _, h = spd_handle(10)
    assert np.all(cg_solve(h, np.zeros(10)) == 0)


def test_cg_rejects_non_self_adjoint():
    N = LinearOperatorHandle.from_matrix(np.array([[1.0, 5.0], [0.0, 1.0]]),
                                         self_adjoint=True)
    with pytest.raises(NumericalError):
        cg_solve(N, np.ones(2))


def test_cg_nonconvergence_carries_residual():
    A = np.diag(np.geomspace(1e-8, 1.0, 40))
    h = LinearOperatorHandle.from_matrix(A, self_adjoint=True)
    with pytest.raises(ConvergenceError) as err:
        cg_solve(h, RNG.standard_normal(40), tol=1e-14, max_iter=3)
    assert err.value.residual is not None and err.value.residual > 0


def test_extremal_diag_explicit():
    h = LinearOperatorHandle.from_matrix(np.diag([1.0, 2.0, 3.0]), self_adjoint=True)
    est = extremal_eigenvalues(h, tol=1e-10)
    assert abs(est.lambda_max - 3.0) < 1e-8
    assert abs(est.lambda_min - 1.0) < 1e-8
    assert abs(est.quotient - 3.0) < 1e-7


def test_extremal_rank_deficient_flagged():
    h = LinearOperatorHandle.from_matrix(np.diag([0.0, 1.0]), self_adjoint=True)
    est = extremal_eigenvalues(h, tol=1e-8)
    assert est.lambda_min_below_threshold
    assert est.quotient == float("inf")


def test_extremal_matches_dense_eig():
    A, h = spd_handle(50, seed=9)
    est = extremal_eigenvalues(h, tol=1e-10)
    ev = np.linalg.eigvalsh(A)
    assert abs(est.lambda_max - ev[-1]) <= 1e-6 * ev[-1]
    assert abs(est.lambda_min - ev[0]) <= 1e-6 * ev[0]


def test_extremal_clustered_top():
    d = np.concatenate([[10.0, 10.0 * (1 - 1e-5), 10.0 * (1 - 2e-5)],
                        np.linspace(0.5, 8.0, 60)])
    h = LinearOperatorHandle.from_matrix(np.diag(d), self_adjoint=True)
    est = extremal_eigenvalues(h, tol=1e-10, block=6)
    assert abs(est.lambda_max - 10.0) <= 1e-8 * 10.0
    assert abs(est.lambda_min - 0.5) <= 1e-8


def test_rayleigh_monotone_no_warning():
    import warnings

    _, h = spd_handle(40, seed=2)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        extremal_eigenvalues(h, tol=1e-9)


def test_singular_value_closed_forms():
    comp = LinearOperatorHandle.from_matrix(4.0 * np.eye(4), self_adjoint=True)
    assert abs(largest_singular_value(comp, tol=1e-12) - 2.0) < 1e-10
    M = np.diag([1.0, 3.0])
    comp = LinearOperatorHandle.from_matrix(M.T @ M, self_adjoint=True)
    assert abs(largest_singular_value(comp, tol=1e-12) - 3.0) < 1e-10


def test_singular_value_matches_dense_svd():
    rng = np.random.default_rng(21)
    M = rng.standard_normal((40, 25))
    comp = LinearOperatorHandle.from_matrix(M.T @ M, self_adjoint=True)
    sv = np.linalg.svd(M, compute_uv=False)[0]
    assert abs(largest_singular_value(comp, tol=1e-12) - sv) <= 1e-8 * sv


def test_dot_test_reports_discrepancy():
    A = RNG.standard_normal((30, 20))
    h = LinearOperatorHandle.from_matrix(A)
    assert h.dot_test(probes=5) < 1e-12
    bad = LinearOperatorHandle(20, 30, lambda x: A @ x,
                               adjoint_apply=lambda y: A.T @ y + 0.01)
    assert bad.dot_test(probes=5) > 1e-10


def test_apply_budget_returns_unconverged_estimate():
    A = np.diag(np.geomspace(1e-4, 1.0, 200))
    h = LinearOperatorHandle.from_matrix(A, self_adjoint=True)
    est = extremal_eigenvalues(h, tol=1e-10, apply_budget=40)
    assert not est.min_converged
    assert est.lambda_max > 0.99

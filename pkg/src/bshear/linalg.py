"""Matrix-free operator contract and the iterative numerics built on it:
conjugate gradients for inverting the frame operator, subspace (block power)
iteration for extremal eigenvalues, and the largest singular value of
assembled normal operators.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, NumericalError

DOT_TEST_REL = 1.0e-10
LAMBDA_MIN_FLOOR = 1.0e-12  # below lambda_max * this, the frame is collapsed


class LinearOperatorHandle:
    """A linear map given by callables, with an adjoint and a dot-test."""

    def __init__(self, dim_in: int, dim_out: int, apply, adjoint_apply=None,
                 self_adjoint: bool = False, exact: bool = True):
        """exact=False marks operators applied through inner iterative solves,
        whose symmetry holds only up to the inner tolerance; these must be
        self-adjoint by construction and skip the strict probe."""
        if self_adjoint and dim_in != dim_out:
            raise ValueError("self-adjoint operators must be square")
        self.dim_in = dim_in
        self.dim_out = dim_out
        self.apply = apply
        self.adjoint_apply = apply if (self_adjoint and adjoint_apply is None) else adjoint_apply
        self.self_adjoint = self_adjoint
        self._adjoint_checked = not exact

    def dot_test(self, probes: int = 3, seed: int = 1234) -> float:
        """Max relative discrepancy |<Ax, y> - <x, A*y>| / (|x||y|)."""
        if self.adjoint_apply is None:
            raise NumericalError("operator has no adjoint to test")
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(probes):
            x = rng.standard_normal(self.dim_in)
            y = rng.standard_normal(self.dim_out)
            lhs = float(np.dot(self.apply(x), y))
            rhs = float(np.dot(x, self.adjoint_apply(y)))
            worst = max(worst, abs(lhs - rhs) / (np.linalg.norm(x) * np.linalg.norm(y)))
        return worst

    def check_self_adjoint(self, probes: int = 2, seed: int = 99):
        if not self.self_adjoint:
            raise NumericalError("operator is not flagged self-adjoint")
        if self._adjoint_checked:
            return
        rng = np.random.default_rng(seed)
        for _ in range(probes):
            x = rng.standard_normal(self.dim_in)
            y = rng.standard_normal(self.dim_in)
            lhs = float(np.dot(self.apply(x), y))
            rhs = float(np.dot(x, self.apply(y)))
            if abs(lhs - rhs) > 100 * DOT_TEST_REL * np.linalg.norm(x) * np.linalg.norm(y):
                raise NumericalError(
                    f"self-adjointness dot-test failed: discrepancy {abs(lhs - rhs):.3e}"
                )
        self._adjoint_checked = True

    @classmethod
    def from_matrix(cls, A: np.ndarray, self_adjoint: bool = False):
        A = np.asarray(A, dtype=float)
        return cls(A.shape[1], A.shape[0], lambda x: A @ x,
                   adjoint_apply=lambda y: A.T @ y, self_adjoint=self_adjoint)


@dataclass
class SpectralEstimate:
    """Extremal eigenvalues of a self-adjoint PSD operator."""

    lambda_min: float
    lambda_max: float
    iterations: int
    residual: float
    lambda_min_below_threshold: bool = False
    min_converged: bool = True

    @property
    def quotient(self) -> float:
        """lambda_max / lambda_min, infinite when the bottom is unresolvable."""
        if self.lambda_min_below_threshold or self.lambda_min <= 0:
            return float("inf")
        if self.lambda_min / self.lambda_max < LAMBDA_MIN_FLOOR:
            return float("inf")
        return self.lambda_max / self.lambda_min


def cg_solve(op: LinearOperatorHandle, b: np.ndarray, tol: float = 1.0e-8,
             max_iter: int = 2000, x0: np.ndarray | None = None,
             return_info: bool = False):
    """Conjugate gradients for op x = b with op self-adjoint PSD.

    Stops when ||op x - b|| <= tol ||b||; raises ConvergenceError (carrying
    the final relative residual) when max_iter is hit first.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    op.check_self_adjoint()
    b = np.asarray(b, dtype=float)
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        x = np.zeros(op.dim_in)
        return (x, {"iterations": 0, "residuals": [0.0]}) if return_info else x
    x = np.zeros(op.dim_in) if x0 is None else np.array(x0, dtype=float)
    r = b - op.apply(x)
    p = r.copy()
    rs = float(np.dot(r, r))
    res = [np.sqrt(rs) / bnorm]
    best = res[0]
    warned = False
    it = 0
    while res[-1] > tol:
        if it >= max_iter:
            raise ConvergenceError(
                f"CG did not reach {tol:.1e} in {max_iter} iterations "
                f"(residual {res[-1]:.3e})",
                residual=res[-1], iterations=it,
            )
        Ap = op.apply(p)
        pAp = float(np.dot(p, Ap))
        if pAp <= 0:
            raise NumericalError(
                f"CG breakdown: curvature {pAp:.3e} <= 0 (operator not PSD?)"
            )
        alpha = rs / pAp
        x += alpha * p
        r -= alpha * Ap
        rs_new = float(np.dot(r, r))
        res.append(np.sqrt(rs_new) / bnorm)
        if res[-1] > 1.0e6 * best:
            raise NumericalError(
                f"CG diverged: residual rose {res[-1] / best:.1e}x above its "
                "running best (operator numerically singular?)"
            )
        if res[-1] > 10.0 * best and not warned:
            warnings.warn(
                f"CG residual rose {res[-1] / best:.1f}x above its running best; "
                "operator may be ill-conditioned"
            )
            warned = True
        best = min(best, res[-1])
        p = r + (rs_new / rs) * p
        rs = rs_new
        it += 1
    return (x, {"iterations": it, "residuals": res}) if return_info else x


def _subspace_extreme(apply_fn, dim: int, tol: float, block: int, max_iter: int,
                      seed: int, check_monotone: bool = False, q0=None):
    """Top Ritz value of a self-adjoint PSD map via block power iteration.

    Returns (value, vector, iterations, last_rel_change).
    """
    rng = np.random.default_rng(seed)
    block = max(1, min(block, dim))
    start = rng.standard_normal((dim, block))
    if q0 is not None:
        start[:, 0] = q0
    Q, _ = np.linalg.qr(start)
    prev = -np.inf
    val = 0.0
    vec = Q[:, 0]
    rel = np.inf
    for it in range(1, max_iter + 1):
        Z = np.column_stack([apply_fn(Q[:, i]) for i in range(Q.shape[1])])
        H = Q.T @ Z
        H = 0.5 * (H + H.T)
        evals, evecs = np.linalg.eigh(H)
        val = float(evals[-1])
        vec = Q @ evecs[:, -1]
        if check_monotone and val < prev - 1.0e-12 * max(abs(prev), 1.0):
            warnings.warn(
                f"Rayleigh quotient decreased ({prev:.6e} -> {val:.6e}); "
                "operator may not be PSD"
            )
        rel = abs(val - prev) / max(abs(val), 1e-300)
        if rel <= tol:
            return val, vec, it, rel
        prev = val
        Q, _ = np.linalg.qr(Z)
    return val, vec, max_iter, rel


def extremal_eigenvalues(op: LinearOperatorHandle, tol: float = 1.0e-8,
                         block: int = 6, max_iter: int = 500,
                         seed: int = 1234, min_block: int | None = None,
                         cg_max_iter: int | None = None,
                         apply_budget: int | None = None) -> SpectralEstimate:
    """Smallest and largest eigenvalues of a self-adjoint PSD operator.

    lambda_max by block power iteration with Rayleigh-quotient convergence;
    lambda_min by inverse iteration, every inverse apply done with CG at a
    tenth of the requested tolerance.  A bottom eigenvalue that CG cannot
    resolve (collapsed frame) is flagged instead of raised.  apply_budget
    caps the total operator applies spent on the bottom estimate: on badly
    conditioned systems the current (upper) estimate is returned with
    min_converged=False.
    """
    op.check_self_adjoint()
    lam_max, vmax, it_max, rel = _subspace_extreme(
        op.apply, op.dim_in, tol, block, max_iter, seed, check_monotone=True
    )
    r = op.apply(vmax) - lam_max * vmax
    residual = float(np.linalg.norm(r) / max(lam_max, 1e-300))

    inner_tol = tol / 10.0
    if cg_max_iter is None:
        cg_max_iter = max(2000, 40 * int(np.sqrt(op.dim_in)))
    flagged = False
    converged = True
    lam_min = 0.0
    spent = 0
    rng = np.random.default_rng(seed + 1)
    block_m = max(1, min(min_block if min_block is not None else block, op.dim_in))
    Q, _ = np.linalg.qr(rng.standard_normal((op.dim_in, block_m)))
    warm = [None] * block_m  # inverse-iteration columns drift slowly: reuse
    prev = np.inf
    it_min = 0
    try:
        for it_min in range(1, max_iter + 1):
            cols = []
            for i in range(Q.shape[1]):
                limit = cg_max_iter
                if apply_budget is not None:
                    limit = min(limit, apply_budget - spent)
                    if limit <= 0:
                        raise _BudgetExhausted
                x, info = cg_solve(op, Q[:, i], tol=inner_tol, max_iter=limit,
                                   x0=warm[i], return_info=True)
                spent += info["iterations"]
                warm[i] = x
                cols.append(x)
            X = np.column_stack(cols)
            H = Q.T @ X
            H = 0.5 * (H + H.T)
            mu = float(np.linalg.eigvalsh(H)[-1])  # top Ritz of the inverse
            lam_min = 1.0 / mu if mu > 0 else 0.0
            if mu <= 0 or lam_min / lam_max < LAMBDA_MIN_FLOOR:
                flagged = True
                break
            if abs(lam_min - prev) / max(lam_min, 1e-300) <= tol:
                break
            prev = lam_min
            Q, _ = np.linalg.qr(X)
        else:
            converged = False
    except _BudgetExhausted:
        converged = False
    except ConvergenceError as exc:
        # the CG iteration cap cut an unfinished solve: singular S when even
        # a generous cap made no progress, otherwise just an unconverged row
        if apply_budget is not None and exc.iterations is not None \
                and exc.iterations < cg_max_iter:
            converged = False
        else:
            flagged = True
        if not np.isfinite(prev):
            lam_min = 0.0
    except NumericalError:
        # S is numerically singular at this tolerance: the bottom eigenvalue
        # is below what CG can resolve
        flagged = True
        if not np.isfinite(prev):
            lam_min = 0.0
    return SpectralEstimate(
        lambda_min=lam_min, lambda_max=lam_max,
        iterations=it_max + it_min, residual=residual,
        lambda_min_below_threshold=flagged,
        min_converged=converged and not flagged,
    )


class _BudgetExhausted(Exception):
    pass


def largest_singular_value(composite: LinearOperatorHandle, tol: float = 1.0e-8,
                           block: int = 4, max_iter: int = 500,
                           seed: int = 1234, q0=None, return_vector: bool = False):
    """sigma_max(M) from the assembled normal operator composite = M^T M."""
    composite.check_self_adjoint()
    lam, vec, _, _ = _subspace_extreme(
        composite.apply, composite.dim_in, tol, block, max_iter, seed,
        check_monotone=True, q0=q0,
    )
    sigma = float(np.sqrt(max(lam, 0.0)))
    return (sigma, vec) if return_vector else sigma

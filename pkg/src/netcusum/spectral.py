"""Operator norm of symmetric matrices.

The norm of a symmetric matrix is its largest eigenvalue in absolute value.
``op_norm`` finds it with Lanczos tridiagonalization (full
reorthogonalization) and falls back to power iteration on ``M @ M`` when the
Lanczos budget runs out before the extreme Ritz values settle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConvergenceError, ValidationError

_SYMMETRY_TOL = 1e-12
# Ritz extraction is the dominant cost; do it every few steps only.
_CHECK_EVERY = 4


@dataclass(frozen=True)
class SpectralConfig:
    rel_tol: float = 1e-10
    max_iter: int = 5000
    restarts: int = 3
    seed: int = 0

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValidationError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_iter < 1:
            raise ValidationError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.restarts < 1:
            raise ValidationError(f"restarts must be >= 1, got {self.restarts}")


def _check_symmetric(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValidationError("matrix has non-finite entries")
    if M.size and np.max(np.abs(M - M.T)) > _SYMMETRY_TOL * max(1.0, np.max(np.abs(M))):
        raise ValidationError("matrix is not symmetric")
    return M


def _lanczos(M, v0, steps, rel_tol):
    """Run up to ``steps`` Lanczos steps from ``v0``.

    Returns ``(estimate, converged)`` where ``estimate`` is the largest
    absolute Ritz value.
    """
    n = M.shape[0]
    basis = np.empty((steps, n))
    alphas = np.empty(steps)
    betas = np.empty(steps)
    q = v0 / np.linalg.norm(v0)
    scale = np.linalg.norm(M)  # Frobenius bounds the spectral norm
    estimate = 0.0
    for j in range(steps):
        basis[j] = q
        w = M @ q
        alphas[j] = q @ w
        # Two passes of classical Gram-Schmidt keep the basis orthogonal.
        w -= basis[: j + 1].T @ (basis[: j + 1] @ w)
        w -= basis[: j + 1].T @ (basis[: j + 1] @ w)
        beta = np.linalg.norm(w)
        betas[j] = beta

        invariant = beta <= 1e-14 * scale
        if not (invariant or j + 1 == steps or (j + 1) % _CHECK_EVERY == 0):
            q = w / beta
            continue

        if j == 0:
            ritz = alphas[:1]
            last = np.ones((1, 1))
        else:
            ritz, vecs = eigh_tridiagonal(alphas[: j + 1], betas[:j], check_finite=False)
            last = vecs[-1:, :]
        estimate = max(abs(ritz[0]), abs(ritz[-1]))
        if invariant:
            # Invariant Krylov subspace: Ritz values are exact eigenvalues.
            return estimate, True
        resid_lo = beta * abs(last[0, 0])
        resid_hi = beta * abs(last[0, -1])
        if max(resid_lo, resid_hi) <= rel_tol * estimate:
            return estimate, True
        q = w / beta
    return estimate, False


def _power_squared(M, v0, iters, rel_tol):
    x = v0 / np.linalg.norm(v0)
    prev = 0.0
    for _ in range(iters):
        y = M @ (M @ x)
        lam2 = x @ y
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0, True
        x = y / ny
        est = np.sqrt(max(lam2, 0.0))
        if prev > 0 and abs(est - prev) <= rel_tol * est:
            return est, True
        prev = est
    return prev, False


def op_norm(M, cfg: SpectralConfig | None = None) -> float:
    """Spectral norm ``max |eigenvalue|`` of a symmetric real matrix."""
    cfg = cfg or SpectralConfig()
    M = _check_symmetric(M)
    n = M.shape[0]
    if n == 0 or not np.any(M):
        return 0.0

    rng = np.random.default_rng(cfg.seed)
    steps = min(n, cfg.max_iter)
    best = 0.0
    all_converged = True
    for _ in range(cfg.restarts):
        v0 = rng.standard_normal(n)
        est, ok = _lanczos(M, v0, steps, cfg.rel_tol)
        if not ok:
            # Only reachable when max_iter < n.
            est2, ok = _power_squared(M, v0, cfg.max_iter, cfg.rel_tol)
            est = max(est, est2)
        all_converged &= ok
        best = max(best, est)
    if not all_converged:
        raise ConvergenceError(
            f"spectral norm did not converge within {cfg.max_iter} iterations",
            best_estimate=best,
        )
    return float(best)


def numerical_rank(M, tol: float = 1e-8) -> int:
    """Number of singular values above ``tol`` times the largest one."""
    if tol < 0:
        raise ValidationError("tol must be non-negative")
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))

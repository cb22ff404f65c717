"""Preconditioned conjugate gradients with Lanczos eigenvalue estimates."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal


class ConvergenceError(RuntimeError):
    """PCG hit the iteration limit; ``report`` holds the partial history."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


class BreakdownError(ArithmeticError):
    pass


@dataclass
class SolveReport:
    iterations: int
    converged: bool
    history: list = field(default_factory=list)   # ||z_k|| / ||z_0||
    alphas: list = field(default_factory=list)
    betas: list = field(default_factory=list)
    lam_min: float = float("nan")
    lam_max: float = float("nan")
    wall_time: float = 0.0
    pnum: int | None = None
    ppnum: float | None = None

    @property
    def cond(self):
        return self.lam_max / self.lam_min if self.lam_min > 0 else float("inf")


def lanczos_matrix(alphas, betas):
    """Diagonal and off-diagonal of the Lanczos tridiagonal built from CG
    coefficients (``betas[j]`` couples step j and j+1)."""
    a = np.asarray(alphas, dtype=float)
    b = np.asarray(betas, dtype=float)
    k = len(a)
    diag = np.empty(k)
    off = np.empty(max(k - 1, 0))
    for j in range(k):
        diag[j] = 1.0 / a[j] + (b[j - 1] / a[j - 1] if j > 0 else 0.0)
        if j < k - 1:
            off[j] = np.sqrt(b[j]) / a[j]
    return diag, off


def lanczos_estimates(alphas, betas):
    """Extreme Ritz values ``(lam_min, lam_max)``."""
    if len(alphas) == 0:
        return float("nan"), float("nan")
    diag, off = lanczos_matrix(alphas, betas)
    w = eigvalsh_tridiagonal(diag, off) if len(diag) > 1 else diag
    return float(w[0]), float(w[-1])


def pcg(apply_A, apply_M, b, tol=1e-10, maxit=None, x0=None, raise_on_fail=True, callback=None):
    """Solve ``A x = b`` with preconditioner ``M^{-1}``.

    Stops when the preconditioned residual satisfies
    ``||z_k|| / ||z_0|| <= tol``. Returns ``(x, SolveReport)``.
    ``callback(x)`` is called after every iteration.
    """
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    maxit = max(4 * n, 50) if maxit is None else maxit
    t0 = time.perf_counter()
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = b - apply_A(x) if x0 is not None else b.copy()
    z = apply_M(r)
    z0 = np.linalg.norm(z)
    rep = SolveReport(0, True, [1.0])
    if z0 == 0.0:
        rep.wall_time = time.perf_counter() - t0
        return x, rep
    p = z.copy()
    rz = r @ z
    for it in range(1, maxit + 1):
        Ap = apply_A(p)
        pAp = p @ Ap
        if not pAp > 0:
            raise BreakdownError(f"p^T A p = {pAp:.3e} at iteration {it}; operator is not SPD")
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        z = apply_M(r)
        rz_new = r @ z
        rep.alphas.append(alpha)
        rel = np.linalg.norm(z) / z0
        rep.history.append(rel)
        rep.iterations = it
        if callback is not None:
            callback(x.copy())
        if rel <= tol:
            break
        if not rz_new > 0:
            raise BreakdownError(f"r^T M^-1 r = {rz_new:.3e} at iteration {it}; preconditioner is not SPD")
        beta = rz_new / rz
        rep.betas.append(beta)
        p = z + beta * p
        rz = rz_new
    else:
        rep.converged = False
    rep.lam_min, rep.lam_max = lanczos_estimates(rep.alphas, rep.betas)
    rep.wall_time = time.perf_counter() - t0
    if not rep.converged and raise_on_fail:
        raise ConvergenceError(
            f"PCG did not reach tol={tol:g} in {maxit} iterations (last {rep.history[-1]:.3e})", rep)
    return x, rep

"""Dense symmetric kernels shared by the Schur, adaptivity and BDDC layers.

Everything here works on small dense ``numpy`` arrays (edge blocks and
subdomain multiplier blocks), so the LAPACK routines behind ``scipy.linalg``
are used directly.
"""
import numpy as np
import scipy.linalg as sla

DEFLATION_TOL = 1e-10


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a Cholesky factorization breaks down."""


class SPDFactor:
    """Cholesky factor of a symmetric positive definite matrix.

    >>> f = SPDFactor(np.diag([2.0, 4.0]))
    >>> f.solve(np.array([2.0, 4.0]))
    array([1., 1.])
    """

    def __init__(self, A):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {A.shape}")
        self.n = A.shape[0]
        if self.n == 0:
            self._cho = None
            return
        try:
            self._cho = sla.cho_factor(A, lower=True, check_finite=True)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefiniteError(f"matrix is not numerically SPD: {exc}") from exc

    def solve(self, b):
        b = np.asarray(b, dtype=float)
        if self.n == 0:
            return np.zeros_like(b)
        return sla.cho_solve(self._cho, b, check_finite=False)


def spd_solve(A, b):
    """Solve ``A x = b`` for SPD ``A`` (one or many right-hand sides)."""
    return SPDFactor(A).solve(b)


def symmetrize(A):
    return 0.5 * (A + A.T)


def sym_eig(A):
    """Eigenpairs of a symmetric matrix, eigenvalues ascending."""
    A = np.asarray(A, dtype=float)
    w, V = np.linalg.eigh(symmetrize(A))
    return w, V


def pinv(A, tol=DEFLATION_TOL):
    """Moore-Penrose pseudo-inverse of a symmetric PSD matrix.

    Eigenvalues below ``tol * max|eigenvalue|`` are treated as zero.
    """
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return np.zeros_like(A)
    w, V = sym_eig(A)
    wmax = np.abs(w).max()
    if wmax == 0.0:
        return np.zeros_like(A)
    keep = np.abs(w) > tol * wmax
    Vk = V[:, keep]
    return symmetrize((Vk / w[keep]) @ Vk.T)


def sym_gevp(A, B, deflation_tol=DEFLATION_TOL):
    """Generalized eigenproblem ``A v = lam B v`` with ``B`` only PSD.

    ``B`` is diagonalized first; directions whose eigenvalue falls below
    ``deflation_tol * max eig(B)`` are deflated. The deflated block of ``A``
    is eliminated, which leaves an ordinary symmetric problem whose solutions
    satisfy ``A v = lam B v`` exactly and are B-orthonormal.

    Returns
    -------
    lam : (r,) ascending eigenvalues on range(B)
    V : (n, r) B-orthonormal eigenvectors
    N : (n, n - r) orthonormal basis of the deflated (numerical null) space
    """
    A = symmetrize(np.asarray(A, dtype=float))
    B = symmetrize(np.asarray(B, dtype=float))
    n = A.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0)), np.zeros((0, 0))
    sb, U = sym_eig(B)
    smax = np.abs(sb).max()
    if smax == 0.0:
        return np.zeros(0), np.zeros((n, 0)), np.eye(n)
    # ties go to deflation
    keep = sb > deflation_tol * smax
    Ur = U[:, keep] / np.sqrt(sb[keep])
    N = U[:, ~keep]
    C = symmetrize(Ur.T @ A @ Ur)
    X = np.zeros((N.shape[1], Ur.shape[1]))
    if N.shape[1]:
        # eliminate the null-space block so that A v = lam B v holds exactly
        Ann = symmetrize(N.T @ A @ N)
        Anr = N.T @ A @ Ur
        try:
            X = SPDFactor(Ann).solve(Anr)
        except NotPositiveDefiniteError:
            X = pinv(Ann) @ Anr
        C = symmetrize(C - Anr.T @ X)
    lam, Y = sym_eig(C)
    return lam, (Ur - N @ X) @ Y, N

"""Per-interface scalings and the eigenvalue-based primal/dual split.

For interface k between subdomains i < j, the generalized eigenproblem

    (D_i^T S_j D_i + D_j^T S_i D_j) v = lam (Sbar_i : Sbar_j) v

is solved and eigenvectors with ``lam <= theta`` span the dual part of the
new edge basis; the remaining ones (and any deflated direction of the
right-hand side) are primal.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import DEFLATION_TOL, pinv, sym_gevp, symmetrize

COND_LIMIT = 1e12


@dataclass
class ScalingPair:
    interface_id: int
    Di: np.ndarray
    Dj: np.ndarray
    kind: str


@dataclass
class EdgeEigenpairs:
    """Eigenvalues ascending (deflated directions last, as +inf) and the
    matching columns of ``vectors``."""

    values: np.ndarray
    vectors: np.ndarray
    n_deflated: int


@dataclass
class EdgeAdaptivity:
    interface_id: int
    n: int
    eigenvalues: np.ndarray
    T: np.ndarray
    n_delta: int
    scaling: ScalingPair
    Dcheck_i: np.ndarray
    Dcheck_j: np.ndarray
    n_deflated: int = 0

    @property
    def n_primal(self):
        return self.n - self.n_delta

    @property
    def T_delta(self):
        return self.T[:, :self.n_delta]

    @property
    def T_primal(self):
        return self.T[:, self.n_delta:]


def multiplicity_scaling(n, interface_id=0):
    if n < 1:
        raise ValueError("n must be >= 1")
    half = 0.5 * np.eye(n)
    return ScalingPair(interface_id, half, half.copy(), "multiplicity")


def deluxe_scaling(Si, Sj, interface_id=0):
    """``D_i = (S_i + S_j)^{-1} S_i``, ``D_j = (S_i + S_j)^{-1} S_j``."""
    Si, Sj = np.atleast_2d(Si), np.atleast_2d(Sj)
    total = Si + Sj
    try:
        Di = np.linalg.solve(total, Si)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"interface {interface_id}: S_i + S_j is singular") from exc
    Dj = np.eye(Si.shape[0]) - Di
    return ScalingPair(interface_id, Di, Dj, "deluxe")


def parallel_sum(A, B, tol=DEFLATION_TOL):
    """``A : B = B (A + B)^+ A``, symmetrized."""
    A, B = np.atleast_2d(A), np.atleast_2d(B)
    return symmetrize(B @ pinv(A + B, tol) @ A)


def gevp_lhs(Si, Sj, scaling):
    Di, Dj = scaling.Di, scaling.Dj
    return symmetrize(Di.T @ Sj @ Di + Dj.T @ Si @ Dj)


def edge_gevp(Si, Sj, Sbar_i, Sbar_j, scaling, deflation_tol=DEFLATION_TOL):
    """Eigenpairs of the edge pencil; deflated directions come last with +inf."""
    lhs = gevp_lhs(np.atleast_2d(Si), np.atleast_2d(Sj), scaling)
    rhs = parallel_sum(Sbar_i, Sbar_j, deflation_tol)
    lam, V, N = sym_gevp(lhs, rhs, deflation_tol)
    if N.shape[1] == lhs.shape[0] and lhs.shape[0] > 0:
        warnings.warn(f"interface {scaling.interface_id}: parallel sum is numerically zero; "
                      "every direction becomes primal", RuntimeWarning, stacklevel=2)
    values = np.concatenate([lam, np.full(N.shape[1], np.inf)])
    return EdgeEigenpairs(values, np.hstack([V, N]), N.shape[1])


def split_transformation(pairs, theta):
    """Columns with ``lam <= theta`` first (dual), the rest primal.

    Returns ``(T, n_delta)``.
    """
    vals = np.asarray(pairs.values)
    if np.any(np.diff(vals[np.isfinite(vals)]) < 0):
        raise ValueError("eigenvalues must be sorted ascending")
    n_delta = int(np.count_nonzero(vals <= theta))
    return pairs.vectors.copy(), n_delta


def transformed_scaling(T, D):
    """``T^{-1} D T``; rejects a numerically singular ``T``."""
    T = np.atleast_2d(T)
    if T.size == 0:
        return np.zeros_like(T)
    c = np.linalg.cond(T)
    if not np.isfinite(c) or c > COND_LIMIT:
        raise np.linalg.LinAlgError(f"transformation matrix is ill-conditioned (cond = {c:.3g})")
    return np.linalg.solve(T, D @ T)


def adapt_edge(interface_id, Si, Sj, Sbar_i, Sbar_j, kind, theta, force_primal=False):
    """Full per-edge pipeline: scaling, eigenproblem, split, transformed scaling."""
    n = Si.shape[0]
    if kind in ("multiplicity", "m1"):
        scaling = multiplicity_scaling(n, interface_id)
    elif kind in ("deluxe", "m2"):
        scaling = deluxe_scaling(Si, Sj, interface_id)
    else:
        raise ValueError(f"unknown scaling {kind!r}")
    pairs = edge_gevp(Si, Sj, Sbar_i, Sbar_j, scaling)
    T, n_delta = split_transformation(pairs, -np.inf if force_primal else theta)
    return EdgeAdaptivity(
        interface_id, n, pairs.values, T, n_delta, scaling,
        transformed_scaling(T, scaling.Di), transformed_scaling(T, scaling.Dj),
        pairs.n_deflated,
    )


def adapt_all(system, kind, theta, force_primal=False):
    """EdgeAdaptivity for every interface of a SchurSystem."""
    out = []
    for f in system.disc.interfaces:
        ei, ej = system.edge(f.id, f.i), system.edge(f.id, f.j)
        out.append(adapt_edge(f.id, ei.S, ej.S, ei.Sbar, ej.Sbar, kind, theta, force_primal))
    return out


def edge_report_rows(adapt):
    """Rows (k, n_k, n_delta, n_primal, lam_min, lam_max) for the CSV report."""
    rows = []
    for a in adapt:
        finite = a.eigenvalues[np.isfinite(a.eigenvalues)]
        rows.append({
            "k": a.interface_id, "n_k": a.n, "n_delta": a.n_delta, "n_primal": a.n_primal,
            "lam_min": float(finite.min()) if finite.size else float("nan"),
            "lam_max": float(finite.max()) if finite.size else float("nan"),
            "n_deflated": a.n_deflated,
        })
    return rows

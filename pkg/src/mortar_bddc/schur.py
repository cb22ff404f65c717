"""Multiplier-space Schur complements.

All matrices use the positive convention ``S = B A^{-1} B^T``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .linalg import NotPositiveDefiniteError, SPDFactor, symmetrize


def _factorize(A):
    if sp.issparse(A):
        if A.shape[0] == 0:
            return lambda b: np.zeros_like(b, dtype=float)
        lu = spla.splu(sp.csc_matrix(A))
        d = lu.U.diagonal()
        if np.any(~np.isfinite(d)) or np.any(d == 0):
            raise NotPositiveDefiniteError("subdomain matrix is singular")
        return lambda b: lu.solve(np.asarray(b, dtype=float))
    return SPDFactor(A).solve


@dataclass
class SubdomainSchur:
    """Dense ``S^(i) = B_i A_i^{-1} B_i^T`` with its interface block layout."""

    subdomain_id: int
    matrix: np.ndarray
    edges: list
    blocks: dict

    def block(self, k, l=None):
        l = k if l is None else l
        return self.matrix[self.blocks[k], self.blocks[l]]


@dataclass
class EdgeSchur:
    interface_id: int
    side: int
    S: np.ndarray
    Sbar: np.ndarray


def subdomain_schur(A, B, subdomain_id=0, edges=None, blocks=None):
    """``B A^{-1} B^T`` with one factorization of ``A`` and multi-RHS solves."""
    B = sp.csr_matrix(B) if sp.issparse(B) else np.atleast_2d(np.asarray(B, dtype=float))
    solve = _factorize(A if sp.issparse(A) else np.atleast_2d(np.asarray(A, dtype=float)))
    Bt = B.T.toarray() if sp.issparse(B) else B.T
    X = solve(Bt) if Bt.size else np.zeros_like(Bt)
    S = symmetrize(np.asarray(B @ X))
    if edges is None:
        edges, blocks = [0], {0: slice(0, S.shape[0])}
    return SubdomainSchur(subdomain_id, S, list(edges), dict(blocks))


def edge_schur(Si, k):
    """Principal block of interface k and its Schur complement with respect
    to the subdomain's other interfaces."""
    if k not in Si.blocks:
        raise KeyError(f"interface {k} is not on subdomain {Si.subdomain_id}")
    n = Si.matrix.shape[0]
    idx = np.arange(n)[Si.blocks[k]]
    oth = np.setdiff1d(np.arange(n), idx)
    S = Si.matrix[np.ix_(idx, idx)]
    if len(oth) == 0:
        return EdgeSchur(k, Si.subdomain_id, S.copy(), S.copy())
    Soo = Si.matrix[np.ix_(oth, oth)]
    Sok = Si.matrix[np.ix_(oth, idx)]
    try:
        X = SPDFactor(Soo).solve(Sok)
    except NotPositiveDefiniteError as exc:
        raise NotPositiveDefiniteError(
            f"subdomain {Si.subdomain_id}: other-interface block is singular ({exc})"
        ) from exc
    return EdgeSchur(k, Si.subdomain_id, S, symmetrize(S - Sok.T @ X))


class SchurSystem:
    """Global Schur complement of a MortarDiscretization.

    Holds one factorization per subdomain, the dense local ``S^(i)`` and the
    reduced right-hand side ``g``.
    """

    def __init__(self, disc):
        self.disc = disc
        self.solvers = []
        self.local = []
        for i in range(disc.n_sub):
            A = disc.local[i].matrix
            try:
                solve = _factorize(A)
            except (RuntimeError, NotPositiveDefiniteError) as exc:
                raise NotPositiveDefiniteError(f"subdomain {i}: factorization failed ({exc})") from exc
            self.solvers.append(solve)
            Bi = disc.B[i]
            X = solve(Bi.T.toarray()) if Bi.shape[0] else np.zeros((A.shape[0], 0))
            S = symmetrize(np.asarray(Bi @ X))
            self.local.append(SubdomainSchur(i, S, disc.edges_of[i], disc.local_blocks(i)))
        self.g = self.schur_rhs()

    @property
    def n(self):
        return self.disc.n_multipliers

    def schur_rhs(self, loads=None):
        loads = self.disc.loads if loads is None else loads
        g = np.zeros(self.n)
        for i in range(self.disc.n_sub):
            if self.disc.B[i].shape[0]:
                g[self.disc.local_multipliers(i)] += self.disc.B[i] @ self.solvers[i](loads[i])
        return g

    def apply(self, lam):
        """``S lam`` summed over subdomains in a fixed order."""
        lam = np.asarray(lam, dtype=float)
        out = np.zeros_like(lam)
        for i, Si in enumerate(self.local):
            idx = self.disc.local_multipliers(i)
            if len(idx):
                out[idx] += Si.matrix @ lam[idx]
        return out

    def dense(self):
        S = np.zeros((self.n, self.n))
        for i, Si in enumerate(self.local):
            idx = self.disc.local_multipliers(i)
            S[np.ix_(idx, idx)] += Si.matrix
        return S

    def edge(self, k, nu):
        return edge_schur(self.local[nu], k)

    def recover_u(self, lam):
        """Subdomain solutions ``u_i = A_i^{-1}(f_i - B_i^T lam_i)`` on free dofs."""
        out = []
        for i in range(self.disc.n_sub):
            idx = self.disc.local_multipliers(i)
            rhs = self.disc.loads[i] - (self.disc.B[i].T @ lam[idx] if len(idx) else 0.0)
            out.append(self.solvers[i](rhs))
        return out


def apply_global_schur(system, lam):
    return system.apply(lam)


def schur_rhs(system, loads=None):
    return system.schur_rhs(loads)


def dump_matrices(system, directory):
    """Write every ``S^(i)``, ``S_F`` and ``Sbar_F`` as dense row-major text."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for Si in system.local:
        np.savetxt(out / f"S_sub{Si.subdomain_id}.txt", Si.matrix, fmt="%.17g")
        for k in Si.edges:
            e = edge_schur(Si, k)
            np.savetxt(out / f"S_edge{k}_sub{Si.subdomain_id}.txt", e.S, fmt="%.17g")
            np.savetxt(out / f"Sbar_edge{k}_sub{Si.subdomain_id}.txt", e.Sbar, fmt="%.17g")
    return out

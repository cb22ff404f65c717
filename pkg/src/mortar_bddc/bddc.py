"""Adaptive BDDC preconditioner for the multiplier Schur system.

Spaces, in coefficient form:

* hat space: one copy of every interface's multipliers, expressed per edge
  in the transformed basis ``T_k = [T_delta | T_primal]``;
* tilde space: every subdomain owns a copy of the dual coefficients of its
  edges, primal coefficients are shared. It is laid out as the dual blocks
  of subdomains 0..N-1 followed by all primal coefficients (edge order).

The preconditioner is ``M^{-1} = E_D S~^{-1} E_D^T``, applied by block
elimination of the per-subdomain dual blocks and one coarse solve with
``F_PP``. Inputs and outputs of :meth:`BddcOperator.apply` are in the
original multiplier basis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import NotPositiveDefiniteError, SPDFactor, symmetrize


@dataclass
class DofLayout:
    n: np.ndarray          # n_k per edge
    n_delta: np.ndarray
    edges_of: list
    hat_offsets: np.ndarray
    primal_offsets: np.ndarray
    delta_start: np.ndarray          # start of subdomain i's dual block in tilde space
    delta_slices: list               # per subdomain: {k: slice inside its dual block}

    @property
    def n_primal(self):
        return self.n - self.n_delta

    @property
    def dim_hat(self):
        return int(self.hat_offsets[-1])

    @property
    def dim_primal(self):
        return int(self.primal_offsets[-1])

    @property
    def dim_tilde(self):
        return int(self.delta_start[-1]) + self.dim_primal

    @property
    def primal_start(self):
        return int(self.delta_start[-1])

    def hat_delta(self, k):
        a = self.hat_offsets[k]
        return np.arange(a, a + self.n_delta[k])

    def hat_primal(self, k):
        a = self.hat_offsets[k] + self.n_delta[k]
        return np.arange(a, self.hat_offsets[k + 1])

    def tilde_delta(self, i, k):
        s = self.delta_slices[i][k]
        return self.delta_start[i] + np.arange(s.start, s.stop)

    def tilde_primal(self, k):
        a = self.primal_start + self.primal_offsets[k]
        return np.arange(a, a + self.n_primal[k])


def build_layout(n, n_delta, edges_of):
    n = np.asarray(n, dtype=int)
    n_delta = np.asarray(n_delta, dtype=int)
    if np.any(n_delta < 0) or np.any(n_delta > n):
        raise ValueError("need 0 <= n_delta <= n per edge")
    hat = np.concatenate([[0], np.cumsum(n)]).astype(int)
    prim = np.concatenate([[0], np.cumsum(n - n_delta)]).astype(int)
    starts, slices = [0], []
    for edges in edges_of:
        pos, sl = 0, {}
        for k in edges:
            sl[k] = slice(pos, pos + int(n_delta[k]))
            pos += int(n_delta[k])
        slices.append(sl)
        starts.append(starts[-1] + pos)
    return DofLayout(n, n_delta, [list(e) for e in edges_of], hat, prim,
                     np.array(starts, dtype=int), slices)


@dataclass
class _SubdomainBlocks:
    St: np.ndarray          # transformed local Schur
    dl: np.ndarray          # dual positions in the local vector
    pl: np.ndarray          # primal positions in the local vector
    pg: np.ndarray          # global primal indices of pl
    K: SPDFactor
    Kdp: np.ndarray         # St[dl, pl]


class BddcOperator:
    """Partially assembled operator and preconditioner.

    Parameters
    ----------
    system : SchurSystem
    adapt : list of EdgeAdaptivity, indexed by interface id
    """

    def __init__(self, system, adapt):
        disc = system.disc
        self.system = system
        self.adapt = adapt
        self.interfaces = disc.interfaces
        self.layout = build_layout([a.n for a in adapt], [a.n_delta for a in adapt], disc.edges_of)
        L = self.layout
        self.T = [a.T for a in adapt]
        self.subs = []
        F = np.zeros((L.dim_primal, L.dim_primal))
        for i, Si in enumerate(system.local):
            edges = disc.edges_of[i]
            n_loc = Si.matrix.shape[0]
            Ti = np.zeros((n_loc, n_loc))
            dl, pl, pg = [], [], []
            for k in edges:
                s = Si.blocks[k]
                Ti[s, s] = self.T[k]
                nd = L.n_delta[k]
                dl.extend(range(s.start, s.start + nd))
                pl.extend(range(s.start + nd, s.stop))
                pg.extend(L.primal_offsets[k] + np.arange(L.n_primal[k]))
            dl, pl, pg = np.array(dl, dtype=int), np.array(pl, dtype=int), np.array(pg, dtype=int)
            St = symmetrize(Ti.T @ Si.matrix @ Ti)
            try:
                K = SPDFactor(St[np.ix_(dl, dl)])
            except NotPositiveDefiniteError as exc:
                raise NotPositiveDefiniteError(f"subdomain {i}: dual block is singular ({exc})") from exc
            Kdp = St[np.ix_(dl, pl)]
            F[np.ix_(pg, pg)] += St[np.ix_(pl, pl)] - Kdp.T @ K.solve(Kdp)
            self.subs.append(_SubdomainBlocks(St, dl, pl, pg, K, Kdp))
        self.F = symmetrize(F)
        self.F_factor = SPDFactor(self.F) if L.dim_primal else None
        self.Dcheck = {}
        for f, a in zip(self.interfaces, adapt):
            self.Dcheck[(f.id, f.i)] = a.Dcheck_i
            self.Dcheck[(f.id, f.j)] = a.Dcheck_j

    # -- coordinate changes -------------------------------------------------

    def to_hat(self, r):
        """Residual (dual vector) in original basis -> transformed: T^T r."""
        L = self.layout
        out = np.empty(L.dim_hat)
        for k, T in enumerate(self.T):
            s = slice(L.hat_offsets[k], L.hat_offsets[k + 1])
            out[s] = T.T @ r[s]
        return out

    def from_hat(self, w):
        """Coefficients in transformed basis -> original basis: T w."""
        L = self.layout
        out = np.empty(L.dim_hat)
        for k, T in enumerate(self.T):
            s = slice(L.hat_offsets[k], L.hat_offsets[k + 1])
            out[s] = T @ w[s]
        return out

    # -- building blocks ----------------------------------------------------

    def averaging_T(self, r_hat):
        """``E_D^T``: hat -> tilde."""
        L = self.layout
        out = np.zeros(L.dim_tilde)
        for f in self.interfaces:
            k = f.id
            nd = L.n_delta[k]
            rk = r_hat[L.hat_offsets[k]:L.hat_offsets[k + 1]]
            for nu in (f.i, f.j):
                out[L.tilde_delta(nu, k)] = (self.Dcheck[(k, nu)].T @ rk)[:nd]
            out[L.tilde_primal(k)] = rk[nd:]
        return out

    def averaging(self, x):
        """``E_D``: tilde -> hat."""
        L = self.layout
        out = np.zeros(L.dim_hat)
        for f in self.interfaces:
            k = f.id
            nd = L.n_delta[k]
            zk = np.zeros(L.n[k])
            for nu in (f.i, f.j):
                zk += self.Dcheck[(k, nu)][:, :nd] @ x[L.tilde_delta(nu, k)]
            zk[nd:] += x[L.tilde_primal(k)]
            out[L.hat_offsets[k]:L.hat_offsets[k + 1]] = zk
        return out

    def injection(self, w):
        """``I_Gamma``: hat -> tilde (dual coefficients copied to both sides)."""
        L = self.layout
        out = np.zeros(L.dim_tilde)
        for f in self.interfaces:
            k = f.id
            for nu in (f.i, f.j):
                out[L.tilde_delta(nu, k)] = w[L.hat_delta(k)]
            out[L.tilde_primal(k)] = w[L.hat_primal(k)]
        return out

    def _split(self, x):
        L = self.layout
        xd = [x[L.delta_start[i]:L.delta_start[i + 1]] for i in range(len(self.subs))]
        return xd, x[L.primal_start:]

    def apply_tilde_S(self, x):
        """``S~ x`` for x in the tilde space."""
        L = self.layout
        xd, xp = self._split(x)
        out = np.zeros(L.dim_tilde)
        for i, b in enumerate(self.subs):
            loc = np.zeros(b.St.shape[0])
            loc[b.dl] = xd[i]
            loc[b.pl] = xp[b.pg]
            y = b.St @ loc
            out[L.delta_start[i]:L.delta_start[i + 1]] += y[b.dl]
            out[L.primal_start + b.pg] += y[b.pl]
        return out

    def solve_tilde(self, r):
        """``S~^{-1} r`` by dual elimination and a coarse solve."""
        L = self.layout
        rd, rp = self._split(r)
        y = [b.K.solve(rd[i]) for i, b in enumerate(self.subs)]
        rhs = rp.copy()
        for i, b in enumerate(self.subs):
            np.add.at(rhs, b.pg, -(b.Kdp.T @ y[i]))
        xp = self.F_factor.solve(rhs) if self.F_factor is not None else np.zeros(0)
        out = np.empty(L.dim_tilde)
        for i, b in enumerate(self.subs):
            out[L.delta_start[i]:L.delta_start[i + 1]] = y[i] - b.K.solve(b.Kdp @ xp[b.pg])
        out[L.primal_start:] = xp
        return out

    # -- preconditioner -----------------------------------------------------

    def apply_hat(self, r_hat):
        return self.averaging(self.solve_tilde(self.averaging_T(r_hat)))

    def apply(self, r):
        """``z = M^{-1} r`` in the original multiplier basis."""
        r = np.asarray(r, dtype=float)
        if r.shape != (self.layout.dim_hat,):
            raise ValueError(f"expected a vector of length {self.layout.dim_hat}, got {r.shape}")
        return self.from_hat(self.apply_hat(self.to_hat(r)))

    __call__ = apply

    @property
    def pnum(self):
        return self.layout.dim_primal

    @property
    def ppnum(self):
        return self.pnum / self.layout.dim_hat if self.layout.dim_hat else 0.0

    # -- reference implementations ------------------------------------------

    def _R_delta_gamma(self, i, u):
        """``R^(i)_{Delta,Gamma}``: subdomain i's dual coefficients -> hat."""
        L = self.layout
        out = np.zeros(L.dim_hat)
        for k in L.edges_of[i]:
            nd = L.n_delta[k]
            s = L.delta_slices[i][k]
            out[L.hat_offsets[k]:L.hat_offsets[k + 1]] += self.Dcheck[(k, i)][:, :nd] @ u[s]
        return out

    def _R_delta_gamma_T(self, i, g):
        L = self.layout
        out = np.zeros(L.delta_start[i + 1] - L.delta_start[i])
        for k in L.edges_of[i]:
            nd = L.n_delta[k]
            s = L.delta_slices[i][k]
            out[s] = self.Dcheck[(k, i)][:, :nd].T @ g[L.hat_offsets[k]:L.hat_offsets[k + 1]]
        return out

    def _embed_primal(self, up):
        L = self.layout
        out = np.zeros(L.dim_hat)
        for k in range(len(self.T)):
            out[L.hat_primal(k)] = up[L.primal_offsets[k]:L.primal_offsets[k + 1]]
        return out

    def apply_steps_hat(self, g):
        """Four-step form of the preconditioner (hat coordinates)."""
        L = self.layout
        # step 1: independent dual solves
        ua = [b.K.solve(self._R_delta_gamma_T(i, g)) for i, b in enumerate(self.subs)]
        u_delta_a = sum((self._R_delta_gamma(i, ua[i]) for i in range(len(self.subs))), np.zeros(L.dim_hat))
        # step 2: coarse problem F u_P = R_0 g
        R0g = np.concatenate([g[L.hat_primal(k)] for k in range(len(self.T))]) if L.dim_primal else np.zeros(0)
        for i, b in enumerate(self.subs):
            np.add.at(R0g, b.pg, -(b.Kdp.T @ ua[i]))
        up = self.F_factor.solve(R0g) if L.dim_primal else np.zeros(0)
        # step 3: dual corrections driven by the primal solution
        ub = [-b.K.solve(b.Kdp @ up[b.pg]) for b in self.subs]
        u_delta_b = sum((self._R_delta_gamma(i, ub[i]) for i in range(len(self.subs))), np.zeros(L.dim_hat))
        # step 4
        return u_delta_a + self._embed_primal(up) + u_delta_b

    def apply_steps(self, r):
        return self.from_hat(self.apply_steps_hat(self.to_hat(np.asarray(r, dtype=float))))

    # -- dense matrices for oracle checks -----------------------------------

    def dense_operators(self):
        """Explicit ``(I_Gamma, E_D, S~, T)`` with T the block-diagonal basis change."""
        L = self.layout
        Ih = np.eye(L.dim_hat)
        It = np.eye(L.dim_tilde)
        I_G = np.column_stack([self.injection(e) for e in Ih]) if L.dim_hat else np.zeros((L.dim_tilde, 0))
        E_D = np.column_stack([self.averaging(e) for e in It]) if L.dim_tilde else np.zeros((L.dim_hat, 0))
        S_t = np.column_stack([self.apply_tilde_S(e) for e in It]) if L.dim_tilde else np.zeros((0, 0))
        T = np.zeros((L.dim_hat, L.dim_hat))
        for k, Tk in enumerate(self.T):
            s = slice(L.hat_offsets[k], L.hat_offsets[k + 1])
            T[s, s] = Tk
        return I_G, E_D, symmetrize(S_t), T


def build_operator(system, adapt):
    return BddcOperator(system, adapt)


def apply_preconditioner(op, r):
    return op.apply(r)


def dense_preconditioner(op):
    """``M^{-1}`` as a dense matrix (original basis)."""
    n = op.layout.dim_hat
    return symmetrize(np.column_stack([op.apply(e) for e in np.eye(n)]))


def dense_preconditioned_matrix(op, system):
    """``M^{-1} S`` assembled column by column."""
    n = op.layout.dim_hat
    return np.column_stack([op.apply(system.apply(e)) for e in np.eye(n)])


def preconditioned_spectrum(op, system):
    """Eigenvalues of ``M^{-1} S`` via the congruent symmetric form
    ``C^T S C`` with ``M^{-1} = C C^T``."""
    Minv = dense_preconditioner(op)
    C = np.linalg.cholesky(Minv)
    S = system.dense()
    return np.linalg.eigvalsh(symmetrize(C.T @ S @ C))

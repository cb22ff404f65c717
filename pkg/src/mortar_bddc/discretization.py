"""Mortar discretization of the model problem on a subdomain partition."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .assembly import assemble_load, assemble_local
from .coefficients import constant_field
from .geometry import FESpace, detect_interfaces, interfaces_of, triangulate
from .mortar import assemble_coupling, build_multiplier_space


@dataclass
class MortarDiscretization:
    """Everything the Schur and BDDC layers need.

    Attributes
    ----------
    partition, meshes, spaces
        Geometry and per-subdomain P_s spaces.
    interfaces : list of Interface
        Ordered interfaces, ``interfaces[k].id == k``.
    mspaces : list of MultiplierSpace
    couplings : list of MortarCoupling
    local : list of LocalMatrix
        Subdomain matrices over free dofs.
    loads : list of ndarray
    edges_of : list of list of int
        Sorted interface ids per subdomain.
    offsets : ndarray
        Start of each interface's block in the global multiplier vector.
    B : list of csr_matrix
        Per-subdomain signed coupling, rows = multipliers of ``edges_of[i]``
        (concatenated in that order), columns = free dofs.
    """

    partition: object
    degree: int
    eps: float
    meshes: list
    spaces: list
    interfaces: list
    mspaces: list
    couplings: list
    local: list
    loads: list
    edges_of: list
    offsets: np.ndarray
    B: list
    rho: list

    @property
    def n_sub(self):
        return len(self.spaces)

    @property
    def n_multipliers(self):
        return int(self.offsets[-1])

    def edge_dims(self):
        return np.diff(self.offsets)

    def local_multipliers(self, i):
        """Global multiplier indices of subdomain i, in local row order."""
        return np.concatenate(
            [np.arange(self.offsets[k], self.offsets[k + 1]) for k in self.edges_of[i]]
        ) if self.edges_of[i] else np.zeros(0, dtype=int)

    def local_blocks(self, i):
        """Slices of each interface inside subdomain i's local multiplier vector."""
        out, pos = {}, 0
        for k in self.edges_of[i]:
            n = self.offsets[k + 1] - self.offsets[k]
            out[k] = slice(pos, pos + n)
            pos += n
        return out

    def global_B(self):
        """Sparse B over the concatenation of all subdomains' free dofs."""
        blocks = []
        for i in range(self.n_sub):
            P = sp.csr_matrix(
                (np.ones(len(self.local_multipliers(i))),
                 (self.local_multipliers(i), np.arange(len(self.local_multipliers(i))))),
                shape=(self.n_multipliers, len(self.local_multipliers(i))),
            )
            blocks.append(P @ self.B[i])
        return sp.hstack(blocks).tocsr()

    def C_F(self):
        """Maximum number of interfaces of one subdomain."""
        return max((len(e) for e in self.edges_of), default=0)


def discretize(partition, degree=2, rho=None, eps=1.0, f=None):
    """Assemble subdomain matrices, loads and mortar couplings."""
    rho = constant_field(1.0) if rho is None else rho
    meshes = [triangulate(r, m, i) for i, (r, m) in enumerate(zip(partition.subdomains, partition.mesh_counts))]
    spaces = [FESpace(mesh, degree) for mesh in meshes]
    interfaces = detect_interfaces(partition, spaces)
    mspaces = [build_multiplier_space(f_, degree) for f_ in interfaces]
    couplings = [assemble_coupling(f_, ms) for f_, ms in zip(interfaces, mspaces)]
    rho_vals = [rho(mesh) for mesh in meshes]
    local = [assemble_local(sp_, r, eps) for sp_, r in zip(spaces, rho_vals)]
    loads = [assemble_load(sp_, f) for sp_ in spaces]
    edges_of = interfaces_of(interfaces, len(spaces))
    dims = np.array([ms.dim for ms in mspaces], dtype=int)
    offsets = np.concatenate([[0], np.cumsum(dims)]).astype(int)

    B = []
    for i, space in enumerate(spaces):
        to_free = -np.ones(space.n_dofs, dtype=int)
        to_free[local[i].free] = np.arange(len(local[i].free))
        rows, cols, vals = [], [], []
        pos = 0
        for k in edges_of[i]:
            blk = couplings[k].blocks[i]
            c = to_free[couplings[k].dofs[i]]
            keep = c >= 0
            r_idx, c_idx = np.meshgrid(np.arange(blk.shape[0]), c[keep], indexing="ij")
            rows.append((r_idx + pos).ravel())
            cols.append(c_idx.ravel())
            vals.append(blk[:, keep].ravel())
            pos += blk.shape[0]
        if rows:
            Bi = sp.csr_matrix(
                (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                shape=(pos, len(local[i].free)),
            )
        else:
            Bi = sp.csr_matrix((0, len(local[i].free)))
        Bi.eliminate_zeros()
        B.append(Bi)
    return MortarDiscretization(partition, degree, eps, meshes, spaces, interfaces, mspaces,
                                couplings, local, loads, edges_of, offsets, B, rho_vals)

"""Subdomain matrices for  rho grad u . grad v + eps u v  and load vectors.

Integration uses symmetric triangle rules exact for polynomials of degree
2s: the 3-point rule (degree 2) for P1 and the 6-point Dunavant rule
(degree 4) for P2. rho is constant on each element.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

_A, _WA = 0.445948490915965, 0.223381589678011
_B, _WB = 0.091576213509771, 0.109951743655322

# points on the reference triangle (0,0),(1,0),(0,1); weights sum to 1
QUADRATURE = {
    1: (np.array([[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]]), np.full(3, 1 / 3)),
    2: (
        np.array([[_A, _A], [1 - 2 * _A, _A], [_A, 1 - 2 * _A],
                  [_B, _B], [1 - 2 * _B, _B], [_B, 1 - 2 * _B]]),
        np.array([_WA] * 3 + [_WB] * 3),
    ),
}


def reference_basis(degree, pts):
    """Values (nq, nb) and reference gradients (nq, nb, 2) of the nodal basis."""
    x, y = pts[:, 0], pts[:, 1]
    L = np.stack([1 - x - y, x, y], axis=1)
    dL = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    if degree == 1:
        return L, np.broadcast_to(dL, (len(pts), 3, 2)).copy()
    phi = np.empty((len(pts), 6))
    grad = np.empty((len(pts), 6, 2))
    for a in range(3):
        phi[:, a] = L[:, a] * (2 * L[:, a] - 1)
        grad[:, a] = (4 * L[:, a] - 1)[:, None] * dL[a]
    for e, (a, b) in enumerate([(0, 1), (1, 2), (2, 0)]):
        phi[:, 3 + e] = 4 * L[:, a] * L[:, b]
        grad[:, 3 + e] = 4 * (L[:, a, None] * dL[b] + L[:, b, None] * dL[a])
    return phi, grad


def _geometry(space):
    p = space.mesh.nodes[space.mesh.elements]
    J = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)  # (E, 2, 2) columns
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    return J, det


def element_matrices(space, rho, eps):
    s = space.degree
    pts, w = QUADRATURE[s]
    phi, dphi = reference_basis(s, pts)
    J, det = _geometry(space)
    Jinv_T = np.linalg.inv(J).transpose(0, 2, 1)
    g = np.einsum("eij,qbj->eqbi", Jinv_T, dphi)  # physical gradients
    area = 0.5 * np.abs(det)
    stiff = np.einsum("q,eqai,eqbi->eab", w, g, g) * (area * rho)[:, None, None]
    mass = np.einsum("q,qa,qb->ab", w, phi, phi)[None] * area[:, None, None]
    return stiff + eps * mass


@dataclass
class LocalMatrix:
    """Subdomain matrix restricted to the non-Dirichlet dofs.

    ``free`` maps local row/column index to the FESpace dof index.
    """

    subdomain_id: int
    matrix: sp.csr_matrix
    free: np.ndarray


def _scatter(space, Ke):
    E, nb = space.elements.shape
    rows = np.repeat(space.elements, nb, axis=1).ravel()
    cols = np.tile(space.elements, (1, nb)).ravel()
    n = space.n_dofs
    return sp.csr_matrix((Ke.ravel(), (rows, cols)), shape=(n, n))


def assemble_full(space, rho, eps=1.0):
    """Matrix over all dofs, boundary included."""
    rho = np.asarray(rho, dtype=float)
    if np.ndim(rho) == 0:
        rho = np.full(space.mesh.n_elements, float(rho))
    return _scatter(space, element_matrices(space, rho, eps))


def is_floating(space):
    return not space.dirichlet.any()


def assemble_local(space, rho, eps=1.0):
    """Subdomain matrix with Dirichlet dofs eliminated."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    if eps == 0 and is_floating(space):
        raise ValueError(
            f"subdomain {space.mesh.subdomain_id} is floating and eps = 0: the local "
            "problem is singular (regularization is not supported)"
        )
    A = assemble_full(space, rho, eps)
    free = space.free
    return LocalMatrix(space.mesh.subdomain_id, A[free][:, free].tocsc(), free)


def assemble_load(space, f=None):
    """Load vector over free dofs; ``f(x, y)`` vectorized, default f = 1."""
    s = space.degree
    pts, w = QUADRATURE[s]
    phi, _ = reference_basis(s, pts)
    J, det = _geometry(space)
    p0 = space.mesh.nodes[space.mesh.elements[:, 0]]
    xq = p0[:, None, :] + np.einsum("eij,qj->eqi", J, pts)
    if f is None:
        fq = np.ones(xq.shape[:2])
    else:
        fq = np.asarray(f(xq[..., 0], xq[..., 1]), dtype=float) * np.ones(xq.shape[:2])
    be = np.einsum("q,qa,eq->ea", w, phi, fq) * (0.5 * np.abs(det))[:, None]
    b = np.zeros(space.n_dofs)
    np.add.at(b, space.elements.ravel(), be.ravel())
    return b[space.free]

"""Lagrange multiplier spaces on nonmortar edges and the signed coupling
blocks of the mortar constraint.

The multiplier space on a nonmortar mesh with m elements is the continuous
degree-s space whose end elements are lowered to degree s-1: basis function
l lives at interior trace node l+1, and on an end element the functions
attached to its edge-interior nodes are the degree-(s-1) Lagrange basis on
those nodes. Its dimension is s*m - 1 and it contains the constants.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import GEOM_TOL


def lagrange_1d(nodes, x):
    """Lagrange basis on ``nodes`` evaluated at ``x``: shape (len(nodes), len(x))."""
    nodes = np.asarray(nodes, dtype=float)
    x = np.asarray(x, dtype=float)
    out = np.ones((len(nodes), len(x)))
    for a, xa in enumerate(nodes):
        for b, xb in enumerate(nodes):
            if a != b:
                out[a] *= (x - xb) / (xa - xb)
    return out


def _locate(breaks, x):
    e = np.searchsorted(breaks, x, side="right") - 1
    return np.clip(e, 0, len(breaks) - 2)


def _element_nodes(breaks, e, s):
    return breaks[e] + (breaks[e + 1] - breaks[e]) * np.arange(s + 1) / s


def trace_basis(breaks, s, x):
    """Nodal P_s trace basis on a 1D mesh: shape (s*m+1, len(x))."""
    m = len(breaks) - 1
    x = np.asarray(x, dtype=float)
    out = np.zeros((s * m + 1, len(x)))
    el = _locate(breaks, x)
    for e in np.unique(el):
        sel = el == e
        out[s * e:s * e + s + 1, sel] = lagrange_1d(_element_nodes(breaks, e, s), x[sel])
    return out


@dataclass
class MultiplierSpace:
    """Multiplier basis on interface ``interface_id`` (nonmortar mesh ``breaks``)."""

    interface_id: int
    breaks: np.ndarray
    degree: int

    def __post_init__(self):
        if self.n_elements < 2:
            raise ValueError(
                f"interface {self.interface_id}: nonmortar mesh has {self.n_elements} element(s); "
                "the multiplier space needs at least 2"
            )

    @property
    def n_elements(self):
        return len(self.breaks) - 1

    @property
    def dim(self):
        return self.degree * self.n_elements - 1

    def evaluate(self, x):
        """Basis values at ``x``: shape (dim, len(x))."""
        s, m, br = self.degree, self.n_elements, self.breaks
        x = np.asarray(x, dtype=float)
        out = np.zeros((self.dim, len(x)))
        el = _locate(br, x)
        for e in np.unique(el):
            sel = el == e
            nodes = _element_nodes(br, e, s)
            glob = s * e + np.arange(s + 1)  # trace node ids on this element
            if e == 0:
                keep = np.arange(1, s + 1)
            elif e == m - 1:
                keep = np.arange(0, s)
            else:
                keep = np.arange(0, s + 1)
            if e in (0, m - 1):
                vals = lagrange_1d(nodes[keep], x[sel])
            else:
                vals = lagrange_1d(nodes, x[sel])
            rows = glob[keep] - 1
            ok = (rows >= 0) & (rows < self.dim)
            out[np.ix_(rows[ok], np.flatnonzero(sel))] = vals[ok]
        return out


def build_multiplier_space(iface, s):
    side = iface.sides[iface.nonmortar]
    return MultiplierSpace(iface.id, side.breaks, s)


@dataclass
class MortarCoupling:
    """Signed blocks ``blocks[nu]`` (n_k x trace dofs of side nu).

    ``dofs[nu]`` are the FESpace dof indices of the columns (all trace nodes,
    Dirichlet ones included; they are dropped when mapping to free dofs).
    """

    interface_id: int
    blocks: dict
    dofs: dict
    signs: dict


def _gauss(npts):
    return np.polynomial.legendre.leggauss(npts)


def merged_breaks(*meshes):
    pts = np.sort(np.concatenate(meshes))
    keep = np.concatenate([[True], np.diff(pts) > GEOM_TOL])
    return pts[keep]


def assemble_coupling(iface, mspace, s=None):
    """Entries  sigma * int_F mu_l v_d  for both sides of ``iface``.

    Integration runs over the merged breakpoints of the two side meshes with
    Gauss-Legendre rules exact for degree 2s+1.
    """
    s = mspace.degree if s is None else s
    side_i, side_j = iface.sides[iface.i], iface.sides[iface.j]
    for side in (side_i, side_j):
        if abs(side.breaks[0] - iface.lo) > GEOM_TOL or abs(side.breaks[-1] - iface.hi) > GEOM_TOL:
            raise ValueError(f"interface {iface.id}: side mesh of {side.subdomain} does not tile the segment")
    br = merged_breaks(side_i.breaks, side_j.breaks, mspace.breaks)
    gx, gw = _gauss(s + 1)
    a, b = br[:-1, None], br[1:, None]
    x = (0.5 * (a + b) + 0.5 * (b - a) * gx[None]).ravel()
    w = (0.5 * (b - a) * gw[None]).ravel()
    mu = mspace.evaluate(x) * w
    blocks, dofs, signs = {}, {}, {}
    for side in (side_i, side_j):
        nu = side.subdomain
        v = trace_basis(side.breaks, side.degree, x)
        sg = iface.sign(nu)
        blocks[nu] = sg * (mu @ v.T)
        dofs[nu] = side.dofs
        signs[nu] = sg
    return MortarCoupling(iface.id, blocks, dofs, signs)

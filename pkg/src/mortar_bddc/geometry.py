"""Subdomain partitions of the unit square, uniform triangulations, P1/P2
nodal spaces and interface detection.

Coordinates are floats; every geometric comparison uses ``GEOM_TOL``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

GEOM_TOL = 1e-12


class PartitionError(ValueError):
    """Invalid subdomain partition (overlap, gap, bad contact, bad counts)."""


@dataclass(frozen=True)
class Rect:
    x0: float
    y0: float
    w: float
    h: float

    @property
    def x1(self):
        return self.x0 + self.w

    @property
    def y1(self):
        return self.y0 + self.h

    @property
    def area(self):
        return self.w * self.h


def _close(a, b):
    return abs(a - b) <= GEOM_TOL


def _overlap_1d(a0, a1, b0, b1):
    return max(0.0, min(a1, b1) - max(a0, b0))


@dataclass
class SubdomainPartition:
    """Axis-aligned rectangles tiling (0,1)^2 plus per-rectangle mesh counts."""

    subdomains: list[Rect]
    mesh_counts: list[int]

    def __post_init__(self):
        self.subdomains = [r if isinstance(r, Rect) else Rect(*r) for r in self.subdomains]
        self.mesh_counts = [int(m) for m in self.mesh_counts]
        self.validate()

    def __len__(self):
        return len(self.subdomains)

    def validate(self):
        rects = self.subdomains
        if len(rects) == 0:
            raise PartitionError("partition has no subdomains")
        if len(rects) != len(self.mesh_counts):
            raise PartitionError("one mesh count per subdomain is required")
        for i, (r, m) in enumerate(zip(rects, self.mesh_counts)):
            if m < 1:
                raise PartitionError(f"subdomain {i}: mesh count must be >= 1, got {m}")
            if r.w <= GEOM_TOL or r.h <= GEOM_TOL:
                raise PartitionError(f"subdomain {i}: degenerate rectangle {r}")
            if r.x0 < -GEOM_TOL or r.y0 < -GEOM_TOL or r.x1 > 1 + GEOM_TOL or r.y1 > 1 + GEOM_TOL:
                raise PartitionError(f"subdomain {i}: rectangle {r} leaves the unit square")
        for (i, a), (j, b) in itertools.combinations(enumerate(rects), 2):
            ov = _overlap_1d(a.x0, a.x1, b.x0, b.x1) * _overlap_1d(a.y0, a.y1, b.y0, b.y1)
            if ov > GEOM_TOL:
                raise PartitionError(f"subdomains {i} and {j} overlap (area {ov:.3g})")
        total = sum(r.area for r in rects)
        if abs(total - 1.0) > 1e-12:
            raise PartitionError(f"rectangles do not cover the unit square (area sum {total!r})")
        # every contact of positive length must be a full edge of one member
        for i, j in itertools.combinations(range(len(rects)), 2):
            c = _contact(rects[i], rects[j])
            if c is None:
                continue
            orient, coord, lo, hi = c
            if not (_is_full_edge(rects[i], orient, lo, hi) or _is_full_edge(rects[j], orient, lo, hi)):
                raise PartitionError(
                    f"subdomains {i} and {j} meet along [{lo}, {hi}], which is a full edge of neither"
                )


def _is_full_edge(r, orient, lo, hi):
    if orient == "v":
        return _close(lo, r.y0) and _close(hi, r.y1)
    return _close(lo, r.x0) and _close(hi, r.x1)


def _contact(a, b):
    """Shared boundary segment of two rectangles, or None.

    Returns ``(orient, coord, lo, hi)``: ``orient='v'`` for a vertical segment
    ``x = coord, y in [lo, hi]``; ``'h'`` for a horizontal one.
    """
    if _close(a.x1, b.x0) or _close(b.x1, a.x0):
        coord = a.x1 if _close(a.x1, b.x0) else a.x0
        lo, hi = max(a.y0, b.y0), min(a.y1, b.y1)
        if hi - lo > GEOM_TOL:
            return "v", coord, lo, hi
    if _close(a.y1, b.y0) or _close(b.y1, a.y0):
        coord = a.y1 if _close(a.y1, b.y0) else a.y0
        lo, hi = max(a.x0, b.x0), min(a.x1, b.x1)
        if hi - lo > GEOM_TOL:
            return "h", coord, lo, hi
    return None


def build_conforming_partition(k, n, beta):
    """k x k equal squares with checkerboard mesh counts n / beta*n.

    The square at grid position (p, q) (p along x, q along y, subdomain id
    ``q*k + p``) gets ``n`` elements per direction when ``p + q`` is even and
    ``beta*n`` otherwise.
    """
    if k < 1 or n < 1:
        raise PartitionError("k and n must be positive")
    bn = beta * n
    if bn <= 0 or abs(bn - round(bn)) > 1e-9:
        raise PartitionError(f"beta*n = {bn!r} is not a positive integer")
    bn = int(round(bn))
    rects, counts = [], []
    for q in range(k):
        for p in range(k):
            rects.append(Rect(p / k, q / k, 1.0 / k, 1.0 / k))
            counts.append(n if (p + q) % 2 == 0 else bn)
    return SubdomainPartition(rects, counts)


def load_partition(path_or_records, mesh_scale=1):
    """Read a partition description: a JSON array of ``{x0, y0, w, h, m}``.

    ``mesh_scale`` multiplies every mesh count (uniform refinement).
    """
    if isinstance(path_or_records, (str, Path)):
        records = json.loads(Path(path_or_records).read_text())
    else:
        records = path_or_records
    if isinstance(records, dict):
        records = records["subdomains"]
    try:
        rects = [Rect(float(r["x0"]), float(r["y0"]), float(r["w"]), float(r["h"])) for r in records]
        counts = [int(r["m"]) * int(mesh_scale) for r in records]
    except (KeyError, TypeError) as exc:
        raise PartitionError(f"malformed partition record: {exc}") from exc
    return SubdomainPartition(rects, counts)


# ---------------------------------------------------------------------------
# meshes and spaces


@dataclass
class Triangulation:
    """Uniform m x m grid of ``rect`` with every cell split along its
    lower-left to upper-right diagonal.

    Element ``2*(r*m + c)`` is the lower-right triangle of cell (c, r) and
    ``2*(r*m + c) + 1`` the upper-left one; both are counter-clockwise.
    """

    subdomain_id: int
    rect: Rect
    m: int
    nodes: np.ndarray = field(init=False, repr=False)
    elements: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m = self.m
        if m < 1:
            raise ValueError("m must be >= 1")
        ix, iy = np.meshgrid(np.arange(m + 1), np.arange(m + 1))
        self.nodes = np.column_stack([
            self.rect.x0 + self.rect.w * ix.ravel() / m,
            self.rect.y0 + self.rect.h * iy.ravel() / m,
        ])
        self.elements = _grid_triangles(m, stride=1, width=m + 1)

    @property
    def hx(self):
        return self.rect.w / self.m

    @property
    def hy(self):
        return self.rect.h / self.m

    @property
    def h(self):
        return max(self.hx, self.hy)

    @property
    def n_elements(self):
        return 2 * self.m * self.m

    def centroids(self):
        return self.nodes[self.elements].mean(axis=1)

    def areas(self):
        p = self.nodes[self.elements]
        d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def _grid_triangles(m, stride, width):
    """Vertex lattice indices of the 2m^2 triangles on a lattice of ``width``
    points per row where cell corners are ``stride`` apart."""
    c, r = np.meshgrid(np.arange(m), np.arange(m))
    c, r = c.ravel(), r.ravel()
    v00 = (r * stride) * width + c * stride
    v10 = v00 + stride
    v01 = v00 + stride * width
    v11 = v01 + stride
    tri = np.empty((2 * m * m, 3), dtype=np.int64)
    tri[0::2] = np.column_stack([v00, v10, v11])
    tri[1::2] = np.column_stack([v00, v11, v01])
    return tri


def triangulate(rect, m, subdomain_id=0):
    return Triangulation(subdomain_id, rect, m)


@dataclass
class FESpace:
    """Continuous P_s nodal space (s = 1 or 2) on a Triangulation.

    Dofs sit on the ``(s*m+1)^2`` lattice of the subdomain, numbered row by
    row. ``dirichlet`` marks dofs on the outer boundary of the unit square.
    Element connectivity lists the three vertices first, then (for P2) the
    midpoints of edges 01, 12, 20.
    """

    mesh: Triangulation
    degree: int
    coords: np.ndarray = field(init=False, repr=False)
    elements: np.ndarray = field(init=False, repr=False)
    dirichlet: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        s = self.degree
        if s not in (1, 2):
            raise ValueError(f"degree must be 1 or 2, got {s}")
        m, rect = self.mesh.m, self.mesh.rect
        L = s * m + 1
        ix, iy = np.meshgrid(np.arange(L), np.arange(L))
        self.coords = np.column_stack([
            rect.x0 + rect.w * ix.ravel() / (s * m),
            rect.y0 + rect.h * iy.ravel() / (s * m),
        ])
        verts = _grid_triangles(m, stride=s, width=L)
        if s == 1:
            self.elements = verts
        else:
            mids = np.column_stack([
                (verts[:, 0] + verts[:, 1]) // 2,
                (verts[:, 1] + verts[:, 2]) // 2,
                (verts[:, 2] + verts[:, 0]) // 2,
            ])
            self.elements = np.hstack([verts, mids])
        x, y = self.coords[:, 0], self.coords[:, 1]
        self.dirichlet = (
            (np.abs(x) <= GEOM_TOL) | (np.abs(x - 1) <= GEOM_TOL)
            | (np.abs(y) <= GEOM_TOL) | (np.abs(y - 1) <= GEOM_TOL)
        )

    @property
    def n_dofs(self):
        return self.coords.shape[0]

    @property
    def lattice_size(self):
        return self.degree * self.mesh.m + 1

    @property
    def free(self):
        return np.flatnonzero(~self.dirichlet)

    def side_dofs(self, side):
        """Dof indices along one side of the rectangle, in increasing
        coordinate order. ``side`` is one of 'left', 'right', 'bottom', 'top'."""
        L = self.lattice_size
        a = np.arange(L)
        if side == "bottom":
            return a
        if side == "top":
            return (L - 1) * L + a
        if side == "left":
            return a * L
        if side == "right":
            return a * L + (L - 1)
        raise ValueError(side)


# ---------------------------------------------------------------------------
# interfaces


@dataclass
class SideMesh:
    """Restriction of one subdomain's boundary mesh to an interface segment.

    ``breaks`` are the 1D vertex positions (along the segment direction)
    covering [lo, hi]; ``dofs`` are the subdomain dof indices of the trace
    nodes in order (``degree * (len(breaks)-1) + 1`` of them).
    """

    subdomain: int
    breaks: np.ndarray
    dofs: np.ndarray
    degree: int

    @property
    def n_elements(self):
        return len(self.breaks) - 1

    @property
    def h(self):
        return float(np.max(np.diff(self.breaks)))


@dataclass
class Interface:
    """Shared segment of subdomains ``i < j``.

    ``orient`` is 'v' (segment on x = coord) or 'h' (y = coord); the segment
    runs over [lo, hi] in the other coordinate.
    """

    id: int
    i: int
    j: int
    orient: str
    coord: float
    lo: float
    hi: float
    sides: dict = field(default_factory=dict, repr=False)
    nonmortar: int = -1

    @property
    def pair(self):
        return (self.i, self.j)

    @property
    def length(self):
        return self.hi - self.lo

    def other(self, nu):
        return self.j if nu == self.i else self.i

    def sign(self, nu):
        """Sign of subdomain ``nu``'s coupling block: +1 on the smaller id."""
        return 1.0 if nu < self.other(nu) else -1.0


def _side_name(rect, orient, coord):
    if orient == "v":
        return "left" if _close(coord, rect.x0) else "right"
    return "bottom" if _close(coord, rect.y0) else "top"


def _side_mesh(space, sub_id, orient, coord, lo, hi):
    rect, m, s = space.mesh.rect, space.mesh.m, space.degree
    dofs = space.side_dofs(_side_name(rect, orient, coord))
    start, length = (rect.y0, rect.h) if orient == "v" else (rect.x0, rect.w)
    verts = start + length * np.arange(m + 1) / m
    inside = np.flatnonzero((verts >= lo - GEOM_TOL) & (verts <= hi + GEOM_TOL))
    if len(inside) < 2 or not _close(verts[inside[0]], lo) or not _close(verts[inside[-1]], hi):
        raise PartitionError(
            f"mesh of subdomain {sub_id} does not have vertices at the interface ends {lo}, {hi}"
        )
    a, b = inside[0], inside[-1]
    breaks = verts[a:b + 1].copy()
    breaks[0], breaks[-1] = lo, hi
    return SideMesh(sub_id, breaks, dofs[s * a:s * b + 1], s)


def select_nonmortar(iface):
    """Side hosting the multipliers: the coarser side mesh; ties go to the
    smaller subdomain id."""
    hi_, hj = iface.sides[iface.i].h, iface.sides[iface.j].h
    if abs(hi_ - hj) <= 1e-12 * max(hi_, hj):
        return min(iface.i, iface.j)
    return iface.i if hi_ > hj else iface.j


def detect_interfaces(partition, spaces=None):
    """All shared segments of positive length, ordered by
    ``(min id, max id, segment origin)``.

    When ``spaces`` (one FESpace per subdomain) is given, each interface
    also gets its two side meshes and its nonmortar side.
    """
    rects = partition.subdomains
    found = []
    for i, j in itertools.combinations(range(len(rects)), 2):
        c = _contact(rects[i], rects[j])
        if c is not None:
            orient, coord, lo, hi = c
            origin = (coord, lo) if orient == "v" else (lo, coord)
            found.append((i, j, origin, orient, coord, lo, hi))
    found.sort(key=lambda t: (t[0], t[1], t[2]))
    out = []
    for k, (i, j, _, orient, coord, lo, hi) in enumerate(found):
        iface = Interface(k, i, j, orient, coord, lo, hi)
        if spaces is not None:
            for nu in (i, j):
                iface.sides[nu] = _side_mesh(spaces[nu], nu, orient, coord, lo, hi)
            iface.nonmortar = select_nonmortar(iface)
        out.append(iface)
    return out


def interfaces_of(interfaces, n_sub):
    """Per-subdomain sorted list of interface ids."""
    out = [[] for _ in range(n_sub)]
    for f in interfaces:
        out[f.i].append(f.id)
        out[f.j].append(f.id)
    return out

"""Build a partition, look at its interfaces and check the mortar coupling.

Run:  python3 demos/01_partition_and_mesh.py
"""
import numpy as np

from mortar_bddc import build_conforming_partition, discretize, load_partition
from mortar_bddc.harness import data_path

# A 3x3 checkerboard: neighbouring squares carry 12 and 6 elements per side,
# so every interface is non-matching.
part = build_conforming_partition(3, 12, 0.5)
disc = discretize(part, degree=2)
print(f"{len(part)} subdomains, {len(disc.interfaces)} interfaces, {disc.n_multipliers} multipliers")
for f in disc.interfaces[:4]:
    hs = {nu: f.sides[nu].h for nu in (f.i, f.j)}
    print(f"  interface {f.id}: subdomains {f.i}-{f.j}, mesh widths {hs}, multipliers live on {f.nonmortar}")

# The coupling annihilates the trace of any global quadratic: the mortar
# condition sees no jump when both sides interpolate the same polynomial.
poly = lambda x, y: 1 - x + 2 * x * y + y * y
worst = 0.0
for f, c in zip(disc.interfaces, disc.couplings):
    jump = sum(c.blocks[nu] @ poly(*disc.spaces[nu].coords[c.dofs[nu]].T) for nu in (f.i, f.j))
    worst = max(worst, np.abs(jump).max())
print(f"largest mortar jump of a quadratic: {worst:.1e}")

# An unstructured tiling read from the bundled JSON description.
fig = load_partition(data_path("fig5.json"))
print(f"irregular tiling: {len(fig)} subdomains, mesh counts {sorted(set(fig.mesh_counts))}")

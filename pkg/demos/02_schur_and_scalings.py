"""Multiplier Schur complements and the two interface scalings.

Run:  python3 demos/02_schur_and_scalings.py
"""
import numpy as np

from mortar_bddc import SchurSystem, build_conforming_partition, discretize, random_field
from mortar_bddc.adaptivity import deluxe_scaling, multiplicity_scaling

disc = discretize(build_conforming_partition(3, 8, 1.5), degree=2, rho=random_field(0))
system = SchurSystem(disc)
S = system.dense()
print(f"global Schur complement: {S.shape}, smallest eigenvalue {np.linalg.eigvalsh(S)[0]:.3e}")

f = disc.interfaces[0]
Si, Sj = system.edge(f.id, f.i).S, system.edge(f.id, f.j).S
for name, pair in (("multiplicity", multiplicity_scaling(Si.shape[0])), ("deluxe", deluxe_scaling(Si, Sj))):
    # both scalings split the identity between the two sides
    print(f"{name:>12}: |Di + Dj - I| = {np.abs(pair.Di + pair.Dj - np.eye(Si.shape[0])).max():.1e}")

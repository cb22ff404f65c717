"""Adaptive coarse space selection and a preconditioned CG solve.

Run:  python3 demos/03_adaptive_bddc.py
"""
from mortar_bddc import (BddcOperator, SchurSystem, adapt_all, build_conforming_partition, discretize, pcg,
                         preconditioned_spectrum, random_field, theta_rule)

n, beta = 12, 1.5
disc = discretize(build_conforming_partition(3, n, beta), degree=2, rho=random_field(0))
system = SchurSystem(disc)
theta = theta_rule(n, beta)
print(f"threshold {theta:.4f}; {disc.n_multipliers} multipliers")

for kind in ("multiplicity", "deluxe"):
    adapt = adapt_all(system, kind, theta)
    op = BddcOperator(system, adapt)
    lam, rep = pcg(system.apply, op.apply, system.g)
    w = preconditioned_spectrum(op, system)
    print(f"{kind:>12}: {op.pnum:3d} primal, {rep.iterations:2d} iterations, "
          f"Lanczos [{rep.lam_min:.4f}, {rep.lam_max:.4f}], dense [{w[0]:.4f}, {w[-1]:.4f}]")

# Recover the displacement on each subdomain from the multipliers.
u = system.recover_u(lam)
print(f"max |u| over subdomains: {max(abs(ui).max() for ui in u):.4e}")

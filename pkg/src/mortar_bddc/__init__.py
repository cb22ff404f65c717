"""Mortar finite elements on non-matching rectangular partitions with an
adaptive BDDC preconditioner for the Lagrange-multiplier Schur system.

Typical use::

    from mortar_bddc import (build_conforming_partition, discretize, SchurSystem,
                             adapt_all, BddcOperator, pcg, theta_rule)

    disc = discretize(build_conforming_partition(3, 12, 0.5), degree=2)
    system = SchurSystem(disc)
    adapt = adapt_all(system, "deluxe", theta_rule(12, 0.5))
    op = BddcOperator(system, adapt)
    lam, report = pcg(system.apply, op.apply, system.g)
"""
from .adaptivity import adapt_all, adapt_edge, deluxe_scaling, multiplicity_scaling, parallel_sum
from .bddc import BddcOperator, build_layout, dense_preconditioned_matrix, preconditioned_spectrum
from .coefficients import channel_field, constant_field, field_from_descriptor, random_field
from .discretization import MortarDiscretization, discretize
from .geometry import (PartitionError, Rect, SubdomainPartition, build_conforming_partition,
                       detect_interfaces, load_partition, triangulate)
from .harness import ExperimentConfig, StageError, load_config, run_experiment, run_oracle, theta_rule
from .krylov import ConvergenceError, SolveReport, lanczos_estimates, pcg
from .schur import SchurSystem

__all__ = [
    "adapt_all", "adapt_edge", "deluxe_scaling", "multiplicity_scaling", "parallel_sum",
    "BddcOperator", "build_layout", "dense_preconditioned_matrix", "preconditioned_spectrum",
    "channel_field", "constant_field", "field_from_descriptor", "random_field",
    "MortarDiscretization", "discretize",
    "PartitionError", "Rect", "SubdomainPartition", "build_conforming_partition",
    "detect_interfaces", "load_partition", "triangulate",
    "ExperimentConfig", "StageError", "load_config", "run_experiment", "run_oracle", "theta_rule",
    "ConvergenceError", "SolveReport", "lanczos_estimates", "pcg",
    "SchurSystem",
]

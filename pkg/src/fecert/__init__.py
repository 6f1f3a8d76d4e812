"""Monotonicity certificates for P1 finite element discretizations of
-div(kappa(x, u) grad u) + g(x, u) = f with homogeneous Dirichlet data."""

from .certify import (Certificate, ScalingError, ScalingParams, build_D_eps, build_D_prime,
                      check_l_condition, check_strict_dominance, check_z_condition,
                      comparison_experiment, compute_J, fiedler_ptak_certify, monotone_oracle)
from .fem import (assemble_linearized, assemble_load, assemble_residual, local_grad_dot,
                  local_mass, nodal_differences)
from .mesh import Mesh, MeshError, analyze, boundary_distance, gen_structured, load_mesh, write_mesh
from .problem import DataBounds, ProblemSpec, SourceField, validate_bounds
from .solver import ConvergenceError, SolveOptions, solve_picard

__version__ = "0.1.0"

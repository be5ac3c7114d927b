"""Radial Nehari-manifold solver for a quasilinear Schroedinger equation.

The quasilinear problem is rewritten through the dual change of variables
u = f(v) and solved for radial ground states, least-energy sign-changing
solutions and k-node solutions on a truncated ball.
"""

from .dual_transform import DualTransform, IdentityTransform, f_forward, f_inverse_closed_form, f_prime, f_second
from .energy import (
    EnergyModel,
    euler_lagrange_residual,
    functional_I,
    nehari_psi,
    nehari_residuals,
    project_nehari,
    project_sign_changing,
    theta_test,
)
from .errors import *  # noqa: F401,F403
from .model import HypothesisReport, Nonlinearity, Potential, validate_hypotheses
from .radial_mesh import RadialField, RadialGrid, build_grid, dirichlet_eig_first, grad_sq, integrate, lp_norm
from .reports import NodalPartition, SolveReport
from .solvers import (
    SolverOptions,
    solve_annulus_ground,
    solve_k_node,
    solve_least_energy_sign_changing,
    vanishing_seed,
)
from .verification import (
    PropertyReport,
    compare_energies,
    count_nodes,
    run_model_suite,
    run_transform_suite,
)

__version__ = "0.1.0"

"""Shallow networks with rectified-sigmoid activations for initial-value ODEs.

Networks are built in closed form from solver data (PIDD initialization) or
fitted without gradients, one output weight at a time (neuron-by-neuron
training), and compared against an embedded Runge-Kutta reference solution.
"""

__version__ = "0.1.0"

from .activation import ActivationKind, activate, activate_prime
from .shallow_net import ShallowNet, StructuredGrid, eval_naive, eval_fast, eval_deriv, prefix_sums
from .problems import OdeSystem, SlingshotParams, make_problem
from .reference import GridSolution, integrate_points, integrate_to_grid, rk4_fixed
from .pidd import InitRecipe, kappa, pidd_init, pidd_init_resigma, pidd_init_sigmoid
from .nbn import WindowPlan, PiecewiseModel, nbn_train, nbn_train_window
from .metrics import relative_l2, abs_error_series

__all__ = [
    "ActivationKind", "activate", "activate_prime",
    "ShallowNet", "StructuredGrid", "eval_naive", "eval_fast", "eval_deriv", "prefix_sums",
    "OdeSystem", "SlingshotParams", "make_problem",
    "GridSolution", "integrate_points", "integrate_to_grid", "rk4_fixed",
    "InitRecipe", "kappa", "pidd_init", "pidd_init_resigma", "pidd_init_sigmoid",
    "WindowPlan", "PiecewiseModel", "nbn_train", "nbn_train_window",
    "relative_l2", "abs_error_series",
]

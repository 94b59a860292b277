"""Accelerated first-order schemes, their second-order ODE limit, and the
tools to compare the two: objectives, proximal maps, iterative schemes, an
ODE integrator with Bessel closed forms, energy and rate analysis, and a
catalog of seeded test problems."""

from .analysis import Check, EnergySeries, energy_continuous, energy_discrete
from .objectives import CompositeObjective, SmoothObjective, quadratic
from .ode import ContinuousTrace, OdeParams, closed_form_trace, integrate, integrate_composite_lasso
from .problems import ProblemInstance, cached_instance, generate, list_problems, reference_solve
from .prox import ProxSpec
from .schemes import DivergenceError, IterateTrace, SchemeParams, nesterov_run, run_scheme

__version__ = "0.1.0"

__all__ = [
    "Check",
    "CompositeObjective",
    "ContinuousTrace",
    "DivergenceError",
    "EnergySeries",
    "IterateTrace",
    "OdeParams",
    "ProblemInstance",
    "ProxSpec",
    "SchemeParams",
    "SmoothObjective",
    "cached_instance",
    "closed_form_trace",
    "energy_continuous",
    "energy_discrete",
    "generate",
    "integrate",
    "integrate_composite_lasso",
    "list_problems",
    "nesterov_run",
    "quadratic",
    "reference_solve",
    "run_scheme",
]

"""Differentiable initial-value-problem solvers."""
from .dopri5 import OdeFunc, solve_dopri5
from .euler import solve_euler
from .odeint import odeint
from .solver_schemas import DOPRI5_DEFAULT, EULER_DEFAULT, SolveConfig

__all__ = [
    "OdeFunc", "SolveConfig", "EULER_DEFAULT", "DOPRI5_DEFAULT",
    "solve_euler", "solve_dopri5", "odeint",
]

"""Free-final-time 6-DoF powered descent guidance by successive convexification."""
from .conic import ConicProgram, ConicSolution, NonNeg, SecondOrder, Zero, solve_conic
from .discretize import DiscreteDynamics, ReferenceTrajectory, discretize_all
from .dynamics import RocketDynamics, State
from .scenario import Scenario, ScenarioError, default_scenario, fixture_names, load_fixture, load_scenario
from .scvx import ConvergedSolution, IterationRecord, ScvxError, ScvxOptions, scvx_solve
from .validation import ValidationReport, audit

__version__ = "0.1.0"

__all__ = [
    "ConicProgram", "ConicSolution", "ConvergedSolution", "DiscreteDynamics", "IterationRecord",
    "NonNeg", "ReferenceTrajectory", "RocketDynamics", "Scenario", "ScenarioError", "ScvxError",
    "ScvxOptions", "SecondOrder", "State", "ValidationReport", "Zero", "audit", "default_scenario",
    "discretize_all", "fixture_names", "load_fixture", "load_scenario", "scvx_solve", "solve_conic",
]

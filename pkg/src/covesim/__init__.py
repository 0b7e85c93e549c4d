"""Python testbench framework: 4-state logic, an event kernel, constrained random and coverage."""

from covesim.coverage import CoverageDb, load_model
from covesim.crv import ConstraintSet, RandomVar, Rng, randomize
from covesim.errors import CovesimError
from covesim.logic import LogicScalar, LogicVector
from covesim.sim import Clock, Edge, FallingEdge, RisingEdge, Simulator, Timer

__version__ = "0.1.0"

__all__ = [
    "Clock",
    "ConstraintSet",
    "CoverageDb",
    "CovesimError",
    "Edge",
    "FallingEdge",
    "LogicScalar",
    "LogicVector",
    "RandomVar",
    "RisingEdge",
    "Rng",
    "Simulator",
    "Timer",
    "__version__",
    "load_model",
    "randomize",
]

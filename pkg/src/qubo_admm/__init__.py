"""Slack-free ADMM for inequality-constrained binary optimization."""

from .admm import AdmmParams, AdmmResult, Postprocess, Status, build_step_qubo, solve
from .problem import ConstrainedProblem, LinearConstraint, eq, le, slack_encode
from .qubo import QuboMatrix, energy
from .samplers import BruteForceSampler, SaParams, SampleSet, SimulatedAnnealingSampler

__all__ = [
    "AdmmParams",
    "AdmmResult",
    "BruteForceSampler",
    "ConstrainedProblem",
    "LinearConstraint",
    "Postprocess",
    "QuboMatrix",
    "SaParams",
    "SampleSet",
    "SimulatedAnnealingSampler",
    "Status",
    "build_step_qubo",
    "energy",
    "eq",
    "le",
    "slack_encode",
    "solve",
]

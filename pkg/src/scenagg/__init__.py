"""Scenario aggregation for power-system planning, plus a planning benchmark.

Daily multichannel profiles are held in a weighted :class:`ScenarioSet`,
reduced by clustering or selection, and judged by the cost of a two-stage
transmission expansion problem solved with an in-house branch-and-bound.
"""
from .core import Partition, ReducedSet, Scenario, ScenarioSet, make_scenario_set
from .distance import DistanceSpec, distance, pairwise
from .network import Network
from .preprocess import NormalizationSpec, normalize

__all__ = [
    "DistanceSpec", "Network", "NormalizationSpec", "Partition", "ReducedSet", "Scenario",
    "ScenarioSet", "distance", "make_scenario_set", "normalize", "pairwise",
]
__version__ = "0.1.0"

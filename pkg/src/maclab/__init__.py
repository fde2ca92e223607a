"""Coding and capacity tools for the two-user multiple access channel."""

from .capacity import McEstimate, NoiseModel, capacity_region, mi_conditional, mi_marginal, mi_random_phase
from .constellation import Constellation, ValidationError, is_uniquely_decodable, make_constellation, rotate, sum_alphabet
from .designs import OrthogonalDesign, make_rod, make_sod
from .rotation import optimal_rotation

__all__ = [
    "Constellation",
    "McEstimate",
    "NoiseModel",
    "OrthogonalDesign",
    "ValidationError",
    "capacity_region",
    "is_uniquely_decodable",
    "make_constellation",
    "make_rod",
    "make_sod",
    "mi_conditional",
    "mi_marginal",
    "mi_random_phase",
    "optimal_rotation",
    "rotate",
    "sum_alphabet",
]

"""Non-disjoint center selection: half-open centers, splitting, bipartition and rounding."""

from .halfopen import (HalfOpenResult, Radii, ShiftEvent, check_half_open, clean_solution,
                       compute_radii, half_open)
from .pipeline import find_centers
from .split import (Bipartition, CenterSplit, break_cycles_bipartition, check_split,
                    integralize_centers, replacement_cost, split_centers, z_connectivity_gaps)

__all__ = [
    "Bipartition", "CenterSplit", "HalfOpenResult", "Radii", "ShiftEvent",
    "break_cycles_bipartition", "check_half_open", "check_split", "clean_solution",
    "compute_radii", "find_centers", "half_open", "integralize_centers",
    "replacement_cost", "split_centers", "z_connectivity_gaps",
]

from .search import (
    EmptySpace,
    NonFiniteModel,
    OptResult,
    SearchSpace,
    coordinate_refine,
    optimize_slicing,
    sweet_spot_curve,
    write_curve,
)

__all__ = [
    "EmptySpace",
    "NonFiniteModel",
    "OptResult",
    "SearchSpace",
    "coordinate_refine",
    "optimize_slicing",
    "sweet_spot_curve",
    "write_curve",
]

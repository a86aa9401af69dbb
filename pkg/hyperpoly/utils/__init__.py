"""
工具函数包
"""
from .concurrency import ordered_map
from .linalg import helmert_basis, numerical_rank, project_psd
from .seeding import derive_rngs, make_rng
from .validation import as_point, bitmask_to_subset, subset_to_bitmask

__all__ = [
    "ordered_map",
    "helmert_basis",
    "numerical_rank",
    "project_psd",
    "derive_rngs",
    "make_rng",
    "as_point",
    "bitmask_to_subset",
    "subset_to_bitmask",
]

"""
验证相关工具函数
"""
from typing import Iterable, Tuple

import numpy as np

from hyperpoly.exceptions import OracleInputError


def as_point(point, shape: Tuple[int, ...], allow_complex: bool = False) -> np.ndarray:
    """把输入转换为给定形状的有限数组"""
    dtype = complex if allow_complex else float
    try:
        arr = np.asarray(point, dtype=dtype)
    except (TypeError, ValueError) as e:
        raise OracleInputError(f"Point is not numeric: {e}")
    if arr.shape != shape:
        raise OracleInputError(
            f"Point must have shape {shape}, got {arr.shape}",
            expected=list(shape), got=list(arr.shape),
        )
    if not np.all(np.isfinite(arr)):
        raise OracleInputError("Point has non-finite entries")
    return arr


def subset_to_bitmask(subset: Iterable[int]) -> int:
    mask = 0
    for i in subset:
        mask |= 1 << i
    return mask


def bitmask_to_subset(mask: int, n: int) -> Tuple[int, ...]:
    return tuple(i for i in range(n) if mask >> i & 1)

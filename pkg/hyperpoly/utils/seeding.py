"""
随机数工具
每次试验从根种子派生独立的生成器
"""
from typing import List

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def derive_rngs(seed: int, count: int) -> List[np.random.Generator]:
    """从根种子派生count个独立生成器"""
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(child) for child in children]

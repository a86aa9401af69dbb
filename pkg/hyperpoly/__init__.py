"""
hyperpoly: 双曲多项式的Newton多面体判定
"""
__version__ = "1.0.0"

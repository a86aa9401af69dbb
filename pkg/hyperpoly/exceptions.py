"""
异常模块
每个异常携带命令行退出码
"""
from typing import Any, Dict, Optional


EXIT_OK = 0
EXIT_FINDING = 1
EXIT_INPUT = 2


class HyperpolyError(Exception):
    """基础异常"""
    exit_code: int = EXIT_FINDING

    def __init__(self, detail: str, **context: Any):
        super().__init__(detail)
        self.detail = detail
        self.context: Dict[str, Any] = context

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": type(self).__name__,
            "detail": self.detail,
            "exit_code": self.exit_code,
            "context": self.context,
        }


class InstanceError(HyperpolyError):
    """实例描述错误（JSON格式、维度、半正定性、负元素）"""
    exit_code = EXIT_INPUT


class OracleInputError(HyperpolyError):
    """求值点错误（长度或非有限值）"""
    exit_code = EXIT_INPUT


class BudgetExceededError(HyperpolyError):
    """规模超出保护上限"""
    exit_code = EXIT_INPUT

    def __init__(self, operation: str, n: int, limit: int):
        super().__init__(
            f"{operation} is limited to n <= {limit}, got n = {n}",
            operation=operation, n=n, limit=limit,
        )


class InvalidInstanceError(HyperpolyError):
    """多项式在正卦限上不为正"""


class DegenerateDirectionError(HyperpolyError):
    """方向退化: 限制多项式首项系数为零"""


class NotInConeError(HyperpolyError):
    """向量不在闭双曲锥内"""


class NumericalBreakdownError(HyperpolyError):
    """数值崩溃"""


class ZeroDirectionError(HyperpolyError):
    """某变量不出现在任何单项式中"""

    def __init__(self, index: int, detail: Optional[str] = None):
        super().__init__(
            detail or f"variable {index} does not occur in any monomial",
            index=index,
        )
        self.index = index


class UnboundedObjectiveError(HyperpolyError):
    """log q(e^y) 在超平面上无下界（容量为0）"""

"""Exception hierarchy.

``ModelError`` covers invalid model input (CLI exit code 3),
``BudgetExceeded`` covers enumeration/sampling that outgrew its limit
(exit code 4).
"""


class PolymerLabError(Exception):
    pass


class ModelError(PolymerLabError, ValueError):
    pass


class ZeroStep(ModelError):
    pass


class NotSymmetric(ModelError):
    pass


class MixedDimension(ModelError):
    pass


class NonzeroBase(ModelError):
    pass


class NotSuperadditive(ModelError):
    def __init__(self, a: int, b: int, message: str | None = None):
        self.witness = (a, b)
        super().__init__(message or f"phi({a + b}) < phi({a}) + phi({b})")


class CapExceeded(PolymerLabError):
    pass


class BudgetExceeded(PolymerLabError):
    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class DegenerateModel(PolymerLabError):
    pass


class SNotBelowOne(PolymerLabError):
    pass


class NotABridge(PolymerLabError, ValueError):
    pass


class NotAZigzag(PolymerLabError, ValueError):
    pass


class NotDiamond(PolymerLabError, ValueError):
    pass


class EmptyTruncation(PolymerLabError):
    pass

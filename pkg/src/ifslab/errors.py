"""Exception types shared across the package."""


class InvalidInput(ValueError):
    """Bad argument: wrong point kind, symbol out of range, non-positive tolerance."""


class BudgetExceeded(RuntimeError):
    """A computation would exceed its configured size budget."""

    def __init__(self, message, budget):
        super().__init__(message)
        self.budget = budget


class OrbitEscape(ArithmeticError):
    """A planar orbit left the escape radius; ``index`` is the first offending step."""

    def __init__(self, index, point, bound):
        super().__init__(f"orbit escaped |x| > {bound:g} at step {index}")
        self.index = index
        self.point = point
        self.bound = bound

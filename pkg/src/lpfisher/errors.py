class GridMismatchError(ValueError):
    """Fields defined on different grids were combined."""


class PositivityError(ValueError):
    """A density that must be positive has a nonpositive node."""


class TangencyError(ValueError):
    """A velocity is not tangent to the sphere / probability simplex."""


class SolverError(RuntimeError):
    """An iterative solver failed; ``info`` carries the last diagnostic state."""

    def __init__(self, message, **info):
        super().__init__(message)
        self.info = info

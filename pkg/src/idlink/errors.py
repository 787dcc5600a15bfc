"""Exception types shared across the package."""


class DataFormatError(ValueError):
    """An input file or record violates the documented format."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap before converging.

    Carries the last iterate so callers can inspect how far it got.
    """

    def __init__(self, message, last_scores=None):
        super().__init__(message)
        self.last_scores = last_scores

class InconsistencyError(ValueError):
    """Observations or messages admit no consistent explanation."""


class NumericalCollapseError(ArithmeticError):
    """A belief message vanished entirely before normalisation."""

    def __init__(self, msg, iteration=None):
        super().__init__(msg)
        self.iteration = iteration

"""Exception types raised by the package."""


class DataError(ValueError):
    """Malformed or inconsistent input data (bad cell, ragged vector, schema mismatch)."""


class DegenerateKernelError(ArithmeticError):
    """A kernel carries no variation under the posterior (e.g. a constant column)."""

    def __init__(self, variable, value=None):
        self.variable = variable
        self.value = value
        msg = f"degenerate kernel for variable {variable!r}"
        if value is not None:
            msg += f": self-HSIC {value:.3g} below tolerance"
        super().__init__(msg)

"""Exception types shared across the package."""


class InvalidSpec(ValueError):
    """An input (JSON spec, measure, grid size, ...) was rejected.

    Raised for malformed or out-of-contract user inputs; the CLI maps this
    to exit code 2.
    """


class NumericalFailure(RuntimeError):
    """A computation could not be completed at the requested accuracy.

    Covers refused fits and overflow that survives renormalization; the CLI
    maps this to exit code 3.
    """

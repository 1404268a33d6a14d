"""Exceptions and warnings raised by the solvers."""


class SingularSystem(ArithmeticError):
    """The regularized normal equations are singular at some frequency."""


class NonConvergence(RuntimeWarning):
    """An iterative solver hit its iteration limit before meeting its tolerances."""

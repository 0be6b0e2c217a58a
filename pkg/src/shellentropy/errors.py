"""Exception hierarchy.

Every error carries an ``exit_code`` so the command-line front end can map
failures onto its documented status codes without a lookup table.
"""


class ShellEntropyError(Exception):
    exit_code = 2


class InvalidArgumentError(ShellEntropyError, ValueError):
    exit_code = 1


class NumericDomainError(ShellEntropyError, ArithmeticError):
    exit_code = 3


class NumericalFailure(ShellEntropyError, RuntimeError):
    exit_code = 3


class LevelNotFoundError(ShellEntropyError, LookupError):
    """No bound level exists with the requested quantum numbers."""

    exit_code = 3


class ClosureError(ShellEntropyError):
    """Particle number does not close a shell in strict filling mode."""

    def __init__(self, N, closures):
        self.N = N
        below = [c for c in closures if c < N]
        above = [c for c in closures if c > N]
        self.nearest = (below[-1] if below else None, above[0] if above else None)
        lo, hi = self.nearest
        super().__init__(
            f"N={N} is not a shell closure; nearest closures are {lo} and {hi}"
        )


class DomainCoverageError(NumericalFailure):
    """Momentum grid does not reach far enough to capture the orbital tail."""


class InvalidDensityError(ShellEntropyError, ValueError):
    pass


class DensityParseError(ShellEntropyError, ValueError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)


class DataIntegrityError(ShellEntropyError, ValueError):
    pass


class InsufficientDataError(ShellEntropyError, ValueError):
    pass


class DegenerateDesignError(InsufficientDataError):
    pass


class UndefinedAnalogyError(ShellEntropyError, ValueError):
    pass

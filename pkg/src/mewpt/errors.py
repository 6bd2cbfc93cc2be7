"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InputError(ValueError):
    """Malformed or insufficient input data (files, sample lists, schemas)."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{': '.join(where)}: {message}"
        super().__init__(message)


class ConfigError(ValueError):
    """A PMU configuration violates one of its invariants."""


class FitError(RuntimeError):
    """Impedance fit did not converge; ``best`` holds the best-so-far result."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class OracleError(RuntimeError):
    """Transient simulation did not reach a periodic steady state."""

    def __init__(self, message, instance=None):
        super().__init__(message)
        self.instance = instance


class EnergyBalanceError(RuntimeError):
    """Simulation energy bookkeeping failed to close."""

    def __init__(self, message, clock=None, residual=None):
        super().__init__(message)
        self.clock = clock
        self.residual = residual


class MetricUnavailableError(ValueError):
    """A requested metric window contains no usable trace rows."""

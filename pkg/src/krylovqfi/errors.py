"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Bad run configuration (unknown key, invalid model name, out-of-range value)."""


class ResourceRefusalError(RuntimeError):
    """A requested computation would exceed the configured memory budget.

    Raised before any large allocation happens, with the estimated and
    permitted byte counts in the message.
    """


class InvariantGateError(RuntimeError):
    """A cheap internal consistency check failed during a pipeline run."""


class TailNotResolvedError(RuntimeError):
    """The wavefunction tail has too few usable sites for an exponential fit."""

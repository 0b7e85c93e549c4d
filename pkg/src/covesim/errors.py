"""Exception hierarchy shared by every covesim subsystem."""


class CovesimError(Exception):
    """Base class for all errors raised by covesim."""


class UnknownNameError(CovesimError, NameError):
    """A signal, coverage label or test name that was never defined."""


# logic values

class WidthError(CovesimError, ValueError):
    pass


class RangeError(CovesimError, ValueError):
    pass


class NonCleanError(CovesimError, ValueError):
    """An X or Z bit where a 2-state value is required."""


class LiteralError(CovesimError, ValueError):
    pass


class ResolutionError(CovesimError, ValueError):
    pass


# kernel

class KernelClosedError(CovesimError, RuntimeError):
    pass


class OscillationError(CovesimError, RuntimeError):
    """Delta iterations at one time step did not reach a fixed point."""


# designs

class ConversionError(CovesimError, ValueError):
    pass


# randomization

class UnsatisfiableError(CovesimError):
    """``unsat`` is True for a proven-empty solution space, False when solutions
    exist but were not hit, None when the space was too large to enumerate."""

    def __init__(self, message, attempts, unsat=None):
        super().__init__(message)
        self.attempts = attempts
        self.unsat = unsat


class WeightError(CovesimError, ValueError):
    pass


# coverage

class BinExplosionError(CovesimError, MemoryError):
    """A bin set larger than the configured cap was requested."""


class CoverageDefinitionError(CovesimError, ValueError):
    pass


# testbench

class RegistryError(CovesimError):
    pass


class TestFailure(CovesimError, AssertionError):
    """A check inside a running test did not hold."""

    __test__ = False


class BfmStateError(CovesimError, RuntimeError):
    pass


class ConfigError(CovesimError, ValueError):
    pass

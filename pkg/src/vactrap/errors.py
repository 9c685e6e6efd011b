"""Exception types shared across the package."""


class VacTrapError(Exception):
    """Base class for all vactrap errors."""


class ConfigError(VacTrapError):
    """Bad configuration file, key, value, or unit."""


class DegenerateDenominator(VacTrapError):
    """A detuning denominator |delta +/- g| fell below the degeneracy epsilon."""


class DegenerateInput(VacTrapError):
    """Inputs make the requested quantity undefined (e.g. zero total decay)."""


class Unbounded(VacTrapError):
    """The optimization objective grows without bound (gamma = 0)."""


class InvalidGrid(VacTrapError):
    """Grid constructor arguments violate the grid contract."""


class StepTooLarge(VacTrapError):
    """Time step violates the propagation stability/accuracy bound."""


class NoConvergence(VacTrapError):
    """Iteration budget exhausted before reaching the convergence tolerance."""


class Timeout(VacTrapError):
    """Requested event did not occur within the simulated horizon."""


class EmptyChannel(VacTrapError):
    """A reset operator was applied to a channel with (near) zero norm."""


class InfeasibleTargetWarning(UserWarning):
    """Optimizer result violates a soft constraint; the result is still usable."""

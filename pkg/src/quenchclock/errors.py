"""Exception types shared across the package.

All domain failures derive from :class:`QuenchClockError` so callers can
distinguish physics/numerics problems from programming errors.  The scan
driver maps these onto row flags instead of crashing.
"""


class QuenchClockError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(QuenchClockError):
    """Invalid or inconsistent run configuration."""


class GaplessMode(QuenchClockError):
    """A requested mode sits at (or numerically below) zero energy."""


class OutOfBand(QuenchClockError):
    """An energy argument lies outside the single-particle band."""


class VanHoveSingularity(QuenchClockError):
    """The group velocity vanishes at a requested energy; the density of
    states diverges there."""


class NoResonance(QuenchClockError):
    """No momentum satisfies the resonance condition for the requested
    qubit frequency."""


class DegenerateRoot(QuenchClockError):
    """A resonance root sits at a band edge where the rate integrand
    diverges."""


class ConditionUndefined(QuenchClockError):
    """The printed sign condition cannot be evaluated (complex or zero
    denominator)."""


class ZeroRates(QuenchClockError):
    """Both qubit transition rates vanish; the steady state is undefined."""


class ZeroDownRate(QuenchClockError):
    """The downward ladder rate vanishes; the entropy per tick diverges."""


class PassiveState(QuenchClockError):
    """The stationary state cannot drive the clock (no population
    inversion at the probe frequency)."""


class BadBroadening(QuenchClockError):
    """Broadening width outside the usable range for the discrete sums."""


class TooLarge(QuenchClockError):
    """Problem size exceeds what the dense solver is meant for."""


class UnstableStep(QuenchClockError):
    """Integrator step too large for the fastest rate in the generator."""


class NotReachable(QuenchClockError):
    """The emitting level cannot be reached from the reset level."""

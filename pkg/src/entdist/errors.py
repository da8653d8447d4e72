"""Exception types raised by the simulator."""


class SimulationError(Exception):
    """Base class for every error raised while evolving or measuring a state."""


class ParameterError(SimulationError, ValueError):
    """A parameter object violates its constraints (norm, range, count)."""


class MalformedElementError(SimulationError, ValueError):
    """An optical element was wired inconsistently or produced an invalid label."""


class DimensionError(SimulationError, ValueError):
    """Two states with different photon or probe counts were combined."""


class VacuumMeasurementError(SimulationError):
    """Measurement attempted on a state with no terms."""


class ProbeEntangledError(SimulationError):
    """Probe labels differ across terms, so they cannot be dropped yet."""


class RoutingError(SimulationError):
    """A photon sits in a spatial mode the element does not expect."""


class UpconvertedError(SimulationError):
    """A frequency-selective element met a photon already at the common frequency."""


class ImproperErasureError(SimulationError):
    """Frequency erasure made terms interfere and changed the norm."""


class MeasurementOrderError(SimulationError):
    """A probe was read out before its cross-Kerr interaction took place."""


class IncompleteMeasurementError(SimulationError):
    """An outcome was requested from a probe label that was never measured."""

class SimulationError(Exception):
    """Base class for every error raised by the simulator."""


class InvalidParameterError(SimulationError, ValueError):
    """A precondition on an input parameter was violated."""


class DimensionMismatchError(InvalidParameterError):
    """Two operands live on Hilbert spaces of different dimension."""


class ConfigurationError(SimulationError):
    """The simulation configuration cannot represent the requested dynamics."""


class CutoffSaturationError(SimulationError):
    """The truncated cavity reached its top Fock level during a run."""

    def __init__(self, top_population: float, limit: float):
        self.top_population = top_population
        self.limit = limit
        super().__init__(
            f"photon cutoff saturated: top Fock population {top_population:.3e} >= {limit:.1e}"
        )


class ProtocolFailureError(SimulationError):
    """The zipper output is missing one of its GHZ branches."""

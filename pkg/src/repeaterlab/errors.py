"""Exception types shared across the simulator."""


class ConfigurationError(ValueError):
    """Invalid topology, hardware, or sweep configuration."""


class ProtocolFault(RuntimeError):
    """Protocol-logic violation (double delivery, unreserved slot, reuse of a
    consumed pair).  Indicates a bug, not a stochastic failure."""


class ResourceError(RuntimeError):
    """No free memory slot (or other exhausted resource) at session start."""


class SimulationFault(RuntimeError):
    """Unrecoverable fault raised from an event handler; carries the
    simulation time at which the run aborted."""

    def __init__(self, message, sim_time):
        super().__init__(f"{message} (at t={sim_time} ps)")
        self.sim_time = sim_time

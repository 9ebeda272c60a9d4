"""Deterministic discrete-event simulator of linear quantum repeater chains.

Routers hold qubit memories; adjacent routers are linked through Bell-state
measurement (BSM) nodes that herald entanglement generation and perform
entanglement swaps.  The simulator reproduces scalability experiments:
end-to-end entanglement counts and fidelity versus node count, node
separation and total distance.
"""

from .engine import BACKEND
from .errors import (
    ConfigurationError,
    ProtocolFault,
    ResourceError,
    SimulationFault,
)
from .hardware import (
    BsmSpec,
    ClassicalChannelSpec,
    HardwareProfile,
    MemorySpec,
    QuantumChannelSpec,
)
from .kernel import PS_PER_S, Timeline, seconds_to_ps
from .network import (
    EntanglementRequest,
    NetworkManager,
    SwapNode,
    TopologySpec,
    build_chain,
    plan_swap_order,
)
from .protocols import generation_attempt_probability
from .werner import decay, fidelity_of, swap_compose, werner_of

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BsmSpec",
    "ClassicalChannelSpec",
    "ConfigurationError",
    "EntanglementRequest",
    "HardwareProfile",
    "MemorySpec",
    "NetworkManager",
    "PS_PER_S",
    "ProtocolFault",
    "QuantumChannelSpec",
    "ResourceError",
    "SimulationFault",
    "SwapNode",
    "Timeline",
    "TopologySpec",
    "build_chain",
    "decay",
    "fidelity_of",
    "generation_attempt_probability",
    "plan_swap_order",
    "seconds_to_ps",
    "swap_compose",
    "werner_of",
    "__version__",
]

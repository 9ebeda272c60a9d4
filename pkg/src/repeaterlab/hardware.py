"""Physical-layer models: memories, fiber channels and BSM detectors.

Specs are immutable descriptions validated on construction; the runtime
state they parameterize lives in the simulation core.
"""

from dataclasses import dataclass, field
from typing import Optional

from .engine import Memory, bsm_draw  # noqa: F401
from .errors import ConfigurationError
from .kernel import PS_PER_S, seconds_to_ps


@dataclass(frozen=True)
class MemorySpec:
    """Trapped-ion memory bank of one router."""

    slots: int = 50
    tau_coh_s: float = 1.0
    f_init: float = 1.0
    emit_frequency_hz: float = 1e6

    def __post_init__(self):
        if self.slots < 1:
            raise ConfigurationError(f"slots must be >= 1, got {self.slots}")
        if self.tau_coh_s <= 0:
            raise ConfigurationError(f"tau_coh_s must be > 0, got {self.tau_coh_s}")
        if not 0.25 < self.f_init <= 1.0:
            raise ConfigurationError(f"f_init must be in (0.25, 1], got {self.f_init}")
        if self.emit_frequency_hz <= 0:
            raise ConfigurationError(
                f"emit_frequency_hz must be > 0, got {self.emit_frequency_hz}")

    @property
    def tau_coh_ps(self) -> int:
        return seconds_to_ps(self.tau_coh_s)

    @property
    def emit_period_ps(self) -> int:
        return max(1, round(PS_PER_S / self.emit_frequency_hz))


@dataclass(frozen=True)
class QuantumChannelSpec:
    """One fiber segment carrying photons."""

    length_km: float
    attenuation_db_per_km: float = 0.2
    light_speed_km_per_s: float = 2.0e5

    def __post_init__(self):
        if self.length_km < 0:
            raise ConfigurationError(f"length_km must be >= 0, got {self.length_km}")
        if self.attenuation_db_per_km < 0:
            raise ConfigurationError(
                f"attenuation_db_per_km must be >= 0, got {self.attenuation_db_per_km}")
        if self.light_speed_km_per_s <= 0:
            raise ConfigurationError(
                f"light_speed_km_per_s must be > 0, got {self.light_speed_km_per_s}")


@dataclass(frozen=True)
class ClassicalChannelSpec:
    """Reliable, in-order control channel co-located with a fiber segment."""

    delay_ps: int

    def __post_init__(self):
        if self.delay_ps <= 0:
            raise ConfigurationError(f"delay_ps must be > 0, got {self.delay_ps}")


@dataclass(frozen=True)
class BsmSpec:
    """Bell-state measurement station."""

    intrinsic_success: float = 0.5
    detector_efficiency: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.intrinsic_success <= 1.0:
            raise ConfigurationError(
                f"intrinsic_success must be in (0, 1], got {self.intrinsic_success}")
        if not 0.0 < self.detector_efficiency <= 1.0:
            raise ConfigurationError(
                f"detector_efficiency must be in (0, 1], got {self.detector_efficiency}")

    @property
    def success_probability(self) -> float:
        return self.intrinsic_success * self.detector_efficiency**2


@dataclass(frozen=True)
class HardwareProfile:
    """Bundle of hardware parameters applied uniformly along a chain."""

    name: str
    memory: MemorySpec
    attenuation_db_per_km: float = 0.2
    light_speed_km_per_s: float = 2.0e5
    classical_delay_s: Optional[float] = None  # None: derive from distance
    bsm: BsmSpec = field(default_factory=BsmSpec)
    bsm_placement_fraction: float = 0.5

    def __post_init__(self):
        if self.attenuation_db_per_km < 0:
            raise ConfigurationError(
                f"attenuation_db_per_km must be >= 0, got {self.attenuation_db_per_km}")
        if self.light_speed_km_per_s <= 0:
            raise ConfigurationError(
                f"light_speed_km_per_s must be > 0, got {self.light_speed_km_per_s}")
        if self.classical_delay_s is not None and self.classical_delay_s <= 0:
            raise ConfigurationError(
                f"classical_delay_s must be > 0, got {self.classical_delay_s}")
        if not 0.0 < self.bsm_placement_fraction < 1.0:
            raise ConfigurationError(
                f"bsm_placement_fraction must be in (0, 1), got {self.bsm_placement_fraction}")


def photon_survival(chan: QuantumChannelSpec) -> float:
    """Probability that a photon survives the fiber segment."""
    return 10.0 ** (-chan.attenuation_db_per_km * chan.length_km / 10.0)


def propagation_delay(chan: QuantumChannelSpec) -> int:
    """Photon flight time over the segment, in ps."""
    return round(chan.length_km / chan.light_speed_km_per_s * PS_PER_S)


@dataclass(frozen=True)
class PhotonRecord:
    """Photon emitted from a memory slot, still entangled with the qubit."""

    source_router: int
    source_slot: int
    emitted_at: int


def try_emit(memory: Memory, router: int, slot: int, now: int) -> PhotonRecord:
    """Emit a photon from a reserved slot; emission itself always succeeds
    (loss is applied at channel traversal).  Faults on an unreserved slot."""
    t = memory.emit(slot, now)
    return PhotonRecord(source_router=router, source_slot=slot, emitted_at=t)


def bsm_outcome(photon_a_present: bool, photon_b_present: bool, spec: BsmSpec, rng):
    """Coincidence-window measurement: Bell index (1 or 3) on success, None
    on failure.  Needs both photons and a detector success draw."""
    bell = bsm_draw(rng, photon_a_present, photon_b_present, spec.success_probability)
    return None if bell < 0 else bell

"""Analytic model of entangled-pair quality.

A pair is tracked as a single Werner parameter w in [0, 1]: a perfect Bell
state mixed with white noise.  Fidelity maps as F = (1 + 3w)/4, so w = 1 is
a perfect pair and w = 0 the maximally mixed floor at F = 0.25.  Decoherence
is exponential decay of w toward that floor; entanglement swapping composes
two pairs as the product of their Werner parameters.
"""

import math
from dataclasses import dataclass

from .engine import Pair as WernerPair  # noqa: F401  (runtime pair record)
from .errors import ProtocolFault


def fidelity_of(w: float) -> float:
    """Fidelity of a Werner pair with parameter w."""
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"Werner parameter out of range: {w}")
    return (1.0 + 3.0 * w) / 4.0


def werner_of(fidelity: float) -> float:
    """Inverse of fidelity_of; valid for fidelity in [0.25, 1]."""
    if not 0.25 <= fidelity <= 1.0:
        raise ValueError(f"fidelity out of range: {fidelity}")
    return (4.0 * fidelity - 1.0) / 3.0


def decay(w: float, elapsed: int, tau_coh: int) -> float:
    """Werner parameter after `elapsed` ps in a memory with coherence time
    `tau_coh` ps.  Multiplicative over time splits."""
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"Werner parameter out of range: {w}")
    if elapsed < 0:
        raise ValueError(f"elapsed must be >= 0, got {elapsed}")
    if tau_coh <= 0:
        raise ValueError(f"tau_coh must be > 0, got {tau_coh}")
    return w * math.exp(-elapsed / tau_coh)


def swap_compose(w1: float, w2: float) -> float:
    """Werner parameter of the pair produced by swapping two pairs."""
    for w in (w1, w2):
        if not 0.0 <= w <= 1.0:
            raise ValueError(f"Werner parameter out of range: {w}")
    return w1 * w2


@dataclass
class CorrectionFrame:
    """Pending Pauli corrections at a pair endpoint, set from the Bell index
    heralded by a BSM and cleared exactly once."""

    pending_x: bool = False
    pending_z: bool = False

    @classmethod
    def from_bell_index(cls, bell: int) -> "CorrectionFrame":
        if bell not in (0, 1, 2, 3):
            raise ValueError(f"bell index out of range: {bell}")
        # bit 0: phase flip (Z), bit 1: bit flip (X)
        return cls(pending_x=bool(bell & 2), pending_z=bool(bell & 1))


def apply_correction(frame: CorrectionFrame) -> CorrectionFrame:
    """Clear the pending corrections.  Applying to an already-cleared frame
    signals a double delivery and is a protocol fault."""
    if not (frame.pending_x or frame.pending_z):
        raise ProtocolFault("correction applied to an already-cleared frame")
    frame.pending_x = False
    frame.pending_z = False
    return frame

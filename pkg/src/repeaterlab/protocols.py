"""Entanglement generation and swapping as standalone state machines.

The chain simulator drives these protocols through its own event handlers;
this module exposes the same logic as self-contained sessions for single
links and single swap points, with explicit states and a classical-message
log.  Useful on its own and as the reference surface for the oracle math:
one generation retry is a composite Bernoulli trial with probability

    p = intrinsic_success * eta^2 * survival(arm_a) * survival(arm_b)

and a session of R retries succeeds with probability 1 - (1 - p)^R.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional

from .engine import Pair, bsm_draw
from .errors import ConfigurationError, ProtocolFault
from .hardware import BsmSpec, MemorySpec, QuantumChannelSpec, photon_survival, propagation_delay
from .werner import CorrectionFrame, apply_correction, swap_compose

GEN_STATES = ("Idle", "Emitting", "AwaitingBsm", "AwaitingCorrection", "Done", "Failed")
SWAP_STATES = ("Ready", "Measured", "Corrected", "Done", "Failed")


@dataclass(frozen=True)
class ControlMessage:
    """One classical control message, as logged by a session."""

    kind: str  # "EmitNow" | "BsmResult(...)" | "CorrectionAck" | "SwapResult(...)"
    session_id: str
    sent_at: int


def generation_attempt_probability(chan_a: QuantumChannelSpec,
                                   chan_b: QuantumChannelSpec,
                                   bsm: BsmSpec) -> float:
    """Success probability of a single composite generation attempt."""
    return bsm.success_probability * photon_survival(chan_a) * photon_survival(chan_b)


@dataclass
class GenerationSession:
    """One elementary-link generation session between adjacent routers.

    Runs up to `max_attempts` composite retries; each retry emits from both
    routers, waits for photon flight to the BSM node and for the heralding
    message back.  Timing mirrors the chain simulator exactly: retries are
    spaced by max(emit periods, link round trip).
    """

    session_id: str
    router_a: int
    router_b: int
    bsm_node: int
    chan_a: QuantumChannelSpec
    chan_b: QuantumChannelSpec
    bsm: BsmSpec
    memory_a: MemorySpec
    memory_b: MemorySpec
    max_attempts: int = 10
    state: str = "Idle"
    attempt: int = 0
    slot_a: Optional[int] = None
    slot_b: Optional[int] = None
    messages: List[ControlMessage] = field(default_factory=list)

    def __post_init__(self):
        if self.max_attempts < 1:
            raise ConfigurationError(
                f"max_attempts must be >= 1, got {self.max_attempts}")

    def _log(self, kind: str, t: int):
        self.messages.append(ControlMessage(kind, self.session_id, t))


def run_generation(session: GenerationSession, rng, *, start: int = 0,
                   pair_id: int = 0) -> Optional[Pair]:
    """Drive a generation session to Done or Failed.

    Returns the WernerPair on success, None on failure.  The pair's Werner
    parameter already includes the decay accumulated over the heralding
    round trip.
    """
    if session.state != "Idle":
        raise ProtocolFault(f"session {session.session_id} already started")
    surv_a = photon_survival(session.chan_a)
    surv_b = photon_survival(session.chan_b)
    flight = max(propagation_delay(session.chan_a), propagation_delay(session.chan_b))
    herald = max(1, flight)
    retry_period = max(session.memory_a.emit_period_ps,
                       session.memory_b.emit_period_ps, flight + herald)
    f_init = min(session.memory_a.f_init, session.memory_b.f_init)
    w_init = (4.0 * f_init - 1.0) / 3.0
    tau = min(session.memory_a.tau_coh_ps, session.memory_b.tau_coh_ps)
    session.slot_a = 0
    session.slot_b = 0
    emit_t = start
    while session.attempt < session.max_attempts:
        session.attempt += 1
        session.state = "Emitting"
        session._log("EmitNow", emit_t)
        session.state = "AwaitingBsm"
        t_bsm = emit_t + flight
        present_a = rng.random() < surv_a
        present_b = rng.random() < surv_b
        bell = bsm_draw(rng, present_a, present_b, session.bsm.success_probability)
        t_done = t_bsm + herald
        if bell >= 0:
            session._log(f"BsmResult({bell})", t_bsm)
            session.state = "AwaitingCorrection"
            frame = CorrectionFrame.from_bell_index(bell)
            apply_correction(frame)
            session._log("CorrectionAck", t_done)
            session.state = "Done"
            session.slot_a = None
            session.slot_b = None
            w = w_init * math.exp(-(t_done - emit_t) / tau)
            return Pair(pair_id, session.router_a, 0, session.router_b, 0,
                        w, t_done, tau)
        session._log("BsmResult(failure)", t_bsm)
        emit_t += retry_period
    session.state = "Failed"
    session.slot_a = None
    session.slot_b = None
    return None


@dataclass
class SwapSession:
    """One entanglement swap at a shared router, heralded by a BSM node."""

    session_id: str
    left: Pair
    right: Pair
    bsm_node: int
    bsm: BsmSpec
    state: str = "Ready"
    messages: List[ControlMessage] = field(default_factory=list)

    def __post_init__(self):
        shared = {self.left.router_a, self.left.router_b} & {
            self.right.router_a, self.right.router_b}
        if len(shared) != 1:
            raise ConfigurationError(
                "swap operands must share exactly one router endpoint")

    def _log(self, kind: str, t: int):
        self.messages.append(ControlMessage(kind, self.session_id, t))


def run_swap(session: SwapSession, rng, *, now: int, pair_id: int = 0) -> Optional[Pair]:
    """Execute the swap at time `now`.

    On success both operands are consumed and the returned pair spans the
    outer endpoints with w = w_left * w_right after waiting decay.  On
    failure both operands are destroyed and None is returned.
    """
    if session.state != "Ready":
        raise ProtocolFault(f"swap session {session.session_id} already executed")
    left, right = session.left, session.right
    shared = ({left.router_a, left.router_b} & {right.router_a, right.router_b}).pop()
    outer_a = left.router_a if left.router_a != shared else left.router_b
    outer_b = right.router_b if right.router_b != shared else right.router_a
    bell = bsm_draw(rng, True, True, session.bsm.success_probability)
    if bell < 0:
        session._log("SwapResult(failure)", now)
        left.alive = False
        right.alive = False
        session.state = "Failed"
        return None
    session.state = "Measured"
    session._log(f"SwapResult({bell})", now)
    w = swap_compose(left.read(now), right.read(now))
    left.alive = False
    right.alive = False
    frame = CorrectionFrame.from_bell_index(bell)
    apply_correction(frame)
    session._log("CorrectionAck", now)
    session.state = "Corrected"
    merged = Pair(pair_id, outer_a, 0, outer_b, 0, w, now,
                  min(left.tau_ps, right.tau_ps))
    session.state = "Done"
    return merged

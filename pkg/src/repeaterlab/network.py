"""Chain topology construction, swap-order planning and the network manager.

A chain of N routers is joined by N-1 BSM nodes, one per hop, each placed at
a configurable fraction of its hop.  End-to-end requests between the first
and last router are served by generating pairs on all elementary links and
merging them with entanglement swaps according to a deterministic plan:

* even router counts have a central elementary link; the plan builds the two
  equal halves flanking it and joins them through that link, so the final
  merges are symmetric in link count and distance;
* odd router counts have no central link.  Successive requests alternate
  between two deliberately different plans: a "left" class that merges
  sequentially from the left end, and a "right" class with a single
  off-center split.  The two classes trade off waiting decay differently
  and therefore perform differently.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

from .engine import ChainParams, ChainRuntime, Timeline
from .errors import ConfigurationError
from .hardware import (
    BsmSpec,
    HardwareProfile,
    MemorySpec,
    QuantumChannelSpec,
    photon_survival,
    propagation_delay,
)
from .kernel import PS_PER_S, seconds_to_ps


# ---------------------------------------------------------------------------
# topology


@dataclass(frozen=True)
class TopologySpec:
    """Declarative description of a linear repeater chain.

    `hop_distances_km[i]` is the router-to-router distance of hop i; the
    hop's BSM node sits at `bsm_fractions[i]` of that distance from the left
    router.  Lists are per-hop / per-router to allow heterogeneous chains.
    """

    hop_distances_km: Tuple[float, ...]
    memories: Tuple[MemorySpec, ...]
    bsms: Tuple[BsmSpec, ...]
    attenuation_db_per_km: float = 0.2
    light_speed_km_per_s: float = 2.0e5
    classical_delay_s: Optional[float] = None
    bsm_fractions: Tuple[float, ...] = ()

    def __post_init__(self):
        n = len(self.memories)
        if n < 2:
            raise ConfigurationError(f"router_count must be >= 2, got {n}")
        if len(self.hop_distances_km) != n - 1:
            raise ConfigurationError(
                f"expected {n - 1} hop distances for {n} routers, "
                f"got {len(self.hop_distances_km)}")
        if len(self.bsms) != n - 1:
            raise ConfigurationError(
                f"expected {n - 1} BSM specs, got {len(self.bsms)}")
        for d in self.hop_distances_km:
            if d <= 0:
                raise ConfigurationError(f"hop distance must be > 0, got {d}")
        if not self.bsm_fractions:
            object.__setattr__(self, "bsm_fractions", tuple(0.5 for _ in self.bsms))
        if len(self.bsm_fractions) != n - 1:
            raise ConfigurationError(
                f"expected {n - 1} bsm fractions, got {len(self.bsm_fractions)}")
        for f in self.bsm_fractions:
            if not 0.0 < f < 1.0:
                raise ConfigurationError(f"bsm fraction must be in (0, 1), got {f}")

    @property
    def router_count(self) -> int:
        return len(self.memories)

    @property
    def bsm_count(self) -> int:
        return len(self.bsms)

    @property
    def total_distance_km(self) -> float:
        return sum(self.hop_distances_km)

    @classmethod
    def homogeneous(cls, router_count: int, *, profile: HardwareProfile,
                    total_km: Optional[float] = None,
                    hop_km: Optional[float] = None) -> "TopologySpec":
        """Uniform chain from a hardware profile, sized either by total
        span or by per-hop distance."""
        if router_count < 2:
            raise ConfigurationError(f"router_count must be >= 2, got {router_count}")
        if (total_km is None) == (hop_km is None):
            raise ConfigurationError("specify exactly one of total_km, hop_km")
        hops = router_count - 1
        if hop_km is None:
            if total_km <= 0:
                raise ConfigurationError(f"total_km must be > 0, got {total_km}")
            hop_km = total_km / hops
        elif hop_km <= 0:
            raise ConfigurationError(f"hop_km must be > 0, got {hop_km}")
        return cls(
            hop_distances_km=tuple(hop_km for _ in range(hops)),
            memories=tuple(profile.memory for _ in range(router_count)),
            bsms=tuple(profile.bsm for _ in range(hops)),
            attenuation_db_per_km=profile.attenuation_db_per_km,
            light_speed_km_per_s=profile.light_speed_km_per_s,
            classical_delay_s=profile.classical_delay_s,
            bsm_fractions=tuple(profile.bsm_placement_fraction for _ in range(hops)),
        )


def build_chain(spec: TopologySpec) -> ChainParams:
    """Precompute the flat numeric chain description the simulator runs on."""
    n = spec.router_count
    surv_l, surv_r, qd_l, qd_r, cd_l, cd_r = [], [], [], [], [], []
    gen_p, swap_p, w_init = [], [], []
    for i, hop in enumerate(spec.hop_distances_km):
        frac = spec.bsm_fractions[i]
        arms = (hop * frac, hop * (1.0 - frac))
        chans = [QuantumChannelSpec(length_km=a,
                                    attenuation_db_per_km=spec.attenuation_db_per_km,
                                    light_speed_km_per_s=spec.light_speed_km_per_s)
                 for a in arms]
        surv_l.append(photon_survival(chans[0]))
        surv_r.append(photon_survival(chans[1]))
        qd_l.append(propagation_delay(chans[0]))
        qd_r.append(propagation_delay(chans[1]))
        if spec.classical_delay_s is not None:
            fixed = seconds_to_ps(spec.classical_delay_s)
            cd_l.append(fixed)
            cd_r.append(fixed)
        else:
            cd_l.append(max(1, propagation_delay(chans[0])))
            cd_r.append(max(1, propagation_delay(chans[1])))
        gen_p.append(spec.bsms[i].success_probability)
        swap_p.append(spec.bsms[i].success_probability)
        f_init = min(spec.memories[i].f_init, spec.memories[i + 1].f_init)
        w_init.append((4.0 * f_init - 1.0) / 3.0)
    return ChainParams(
        n_routers=n,
        surv_l=surv_l, surv_r=surv_r,
        qd_l=qd_l, qd_r=qd_r, cd_l=cd_l, cd_r=cd_r,
        gen_p=gen_p, swap_p=swap_p, w_init=w_init,
        emit_period=[m.emit_period_ps for m in spec.memories],
        slots=[m.slots for m in spec.memories],
        tau_ps=[m.tau_coh_ps for m in spec.memories],
        hop_km=sum(spec.hop_distances_km) / len(spec.hop_distances_km),
        total_km=spec.total_distance_km,
    )


# ---------------------------------------------------------------------------
# swap-order planning


@dataclass(frozen=True)
class SwapNode:
    """Internal node of a swap plan: merge the `left` and `right` segments
    at their shared router, heralded by the adjacent `bsm_label` node.
    Children are SwapNodes or elementary link indices (leaves)."""

    left: Union["SwapNode", int]
    right: Union["SwapNode", int]
    shared_router: int
    bsm_label: int


Plan = Union[SwapNode, int]


def _merge(left: Plan, right: Plan, shared_router: int) -> SwapNode:
    return SwapNode(left=left, right=right, shared_router=shared_router,
                    bsm_label=shared_router - 1)


def _balanced(lo: int, hi: int) -> Plan:
    if lo == hi:
        return lo
    mid = (lo + hi) // 2
    return _merge(_balanced(lo, mid), _balanced(mid + 1, hi), mid + 1)


def plan_swap_order(router_count: int, request_index: int = 0,
                    root_bias: str = "alternate") -> Tuple[Plan, str]:
    """Swap plan for one end-to-end request; returns (plan, subclass).

    Even router counts always use the symmetric central-link plan
    (subclass "").  Odd counts alternate between the "left" and "right"
    plan classes by request index, unless pinned via `root_bias`.
    """
    if router_count < 2:
        raise ConfigurationError(f"router_count must be >= 2, got {router_count}")
    links = router_count - 1
    if links == 1:
        return 0, ""
    if router_count % 2 == 0:
        # odd link count: equal halves flank the central link
        center = links // 2
        left_side = _merge(_balanced(0, center - 1), center, center)
        return _merge(left_side, _balanced(center + 1, links - 1), center + 1), ""
    if root_bias == "alternate":
        subclass = "left" if request_index % 2 == 0 else "right"
    elif root_bias in ("left", "right"):
        subclass = root_bias
    else:
        raise ConfigurationError(f"unknown root_bias: {root_bias!r}")
    if links == 2:
        return _merge(0, 1, 1), subclass
    if subclass == "left":
        # root at the leftmost interior router: the first link's pair idles
        # while the whole remainder completes, maximizing waiting decay
        return _merge(0, _balanced(1, links - 1), 1), "left"
    cut = links // 2 + 1
    return _merge(_balanced(0, cut - 1), _balanced(cut, links - 1), cut), "right"


def plan_leaves(plan: Plan):
    """Elementary link indices under a plan, left to right."""
    if isinstance(plan, int):
        return [plan]
    return plan_leaves(plan.left) + plan_leaves(plan.right)


def plan_internal_nodes(plan: Plan):
    if isinstance(plan, int):
        return []
    return plan_internal_nodes(plan.left) + [plan] + plan_internal_nodes(plan.right)


# ---------------------------------------------------------------------------
# network manager


@dataclass(frozen=True)
class EntanglementRequest:
    """End-to-end entanglement request between the chain's end routers."""

    src: int
    dst: int
    deadline_ps: int
    f_threshold: float = 0.5

    def __post_init__(self):
        if self.src == self.dst:
            raise ConfigurationError("src and dst must differ")
        if self.deadline_ps <= 0:
            raise ConfigurationError(f"deadline_ps must be > 0, got {self.deadline_ps}")
        if not 0.0 <= self.f_threshold <= 1.0:
            raise ConfigurationError(
                f"f_threshold must be in [0, 1], got {self.f_threshold}")


@dataclass(frozen=True)
class AttemptRecord:
    outcome: str  # "success" | "failure"
    reason: str  # "" | "deadline" | "generation" | "low_fidelity" | "horizon"
    fidelity: Optional[float]
    t_start_ps: int
    t_end_ps: int
    subclass: str  # "" | "left" | "right"

    @property
    def duration_ps(self) -> int:
        return self.t_end_ps - self.t_start_ps


@dataclass
class RunResult:
    records: list
    counters: dict
    timeline_stats: dict
    final_time_ps: int

    @property
    def e_count(self) -> int:
        return sum(1 for r in self.records if r.outcome == "success")


class NetworkManager:
    """Owns one chain (topology, timeline, runtime state) and serves serial
    end-to-end requests on it."""

    def __init__(self, topology: TopologySpec, *, seed: int, t_sim_s: float,
                 retry_budget: int = 10, f_threshold: float = 0.5,
                 attempt_deadline_s: Optional[float] = None,
                 root_bias: str = "alternate", trace=None):
        self.topology = topology
        self.params = build_chain(topology)
        self.timeline = Timeline(seconds_to_ps(t_sim_s))
        if attempt_deadline_s is None:
            raise ConfigurationError("attempt_deadline_s is required")
        n = topology.router_count

        def plan_fn(index, _n=n, _bias=root_bias):
            return plan_swap_order(_n, index, _bias)

        self.runtime = ChainRuntime(
            self.params, plan_fn, self.timeline, seed,
            retry_budget=retry_budget, f_threshold=f_threshold,
            attempt_deadline=seconds_to_ps(attempt_deadline_s), trace=trace)
        self._next_index = 0

    def handle_request(self, request: Optional[EntanglementRequest] = None) -> AttemptRecord:
        """Serve one end-to-end request to completion; the network must be
        idle.  Requests are only supported between the end routers."""
        if request is not None and {request.src, request.dst} != {0, self.topology.router_count - 1}:
            raise ConfigurationError(
                "requests are only supported between the chain's end routers")
        raw = self.runtime.run_attempts(1, start_index=self._next_index)
        self._next_index += 1
        return AttemptRecord(*raw[0])

    def run_attempts(self, n_attempts: int) -> RunResult:
        """Serve `n_attempts` serial requests and collect run statistics."""
        raw = self.runtime.run_attempts(n_attempts, start_index=self._next_index)
        self._next_index += n_attempts
        return RunResult(
            records=[AttemptRecord(*r) for r in raw],
            counters=self.runtime.counters(),
            timeline_stats=self.timeline.stats(),
            final_time_ps=self.timeline.now,
        )

"""Batch experiment harness: sweeps, aggregation and trend statistics.

Hardware profiles are calibrated, not measured: each one is tuned so that a
specific failure mechanism dominates and the corresponding scaling regime
appears.  `swap-limited` has near-lossless fiber but short coherence, so
swap cascades and waiting decay govern the results; `loss-limited` has
lossy fiber and long coherence, so per-link photon loss governs them;
`idealized` sits in between with high initial fidelity and slow decay.
"""

import hashlib
import math
import statistics
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import ConfigurationError
from .hardware import BsmSpec, HardwareProfile, MemorySpec
from .network import NetworkManager, TopologySpec

SWEEP_KINDS = (
    "HomogeneousScaling",
    "FixedDistanceNodeSweep",
    "CrossDistance",
    "MinRepeaterSearch",
    "FixedNodesDistanceSweep",
)

MAX_ROUTERS = 19  # 17 intermediate nodes plus the two ends

PROFILES: Dict[str, HardwareProfile] = {
    "idealized": HardwareProfile(
        name="idealized",
        memory=MemorySpec(slots=50, tau_coh_s=5.0, f_init=0.99, emit_frequency_hz=1e6),
        attenuation_db_per_km=0.002,
        bsm=BsmSpec(intrinsic_success=0.5, detector_efficiency=1.0),
    ),
    "swap-limited": HardwareProfile(
        name="swap-limited",
        memory=MemorySpec(slots=50, tau_coh_s=0.05, f_init=1.0, emit_frequency_hz=1e6),
        attenuation_db_per_km=0.0005,
        bsm=BsmSpec(intrinsic_success=0.5, detector_efficiency=1.0),
    ),
    "loss-limited": HardwareProfile(
        name="loss-limited",
        memory=MemorySpec(slots=50, tau_coh_s=50.0, f_init=1.0, emit_frequency_hz=1e6),
        attenuation_db_per_km=0.003,
        bsm=BsmSpec(intrinsic_success=0.5, detector_efficiency=1.0),
    ),
}


def resolve_profile(profile, profiles: Optional[Dict[str, HardwareProfile]] = None) -> HardwareProfile:
    if isinstance(profile, HardwareProfile):
        return profile
    table = PROFILES if profiles is None else profiles
    try:
        return table[profile]
    except KeyError:
        raise ConfigurationError(f"unknown hardware profile: {profile!r}") from None


def config_seed(base_seed: int, *fields) -> int:
    """Stable per-configuration seed, independent of sweep order."""
    tag = "\x1f".join(repr(f) for f in fields).encode()
    digest = hashlib.blake2b(tag, digest_size=8).digest()
    return (base_seed ^ int.from_bytes(digest, "big")) & (2**63 - 1)


@dataclass(frozen=True)
class SweepSpec:
    """One batch experiment over chain configurations."""

    kind: str
    profile: str = "idealized"
    base_seed: int = 1
    attempts: int = 20
    router_counts: Tuple[int, ...] = ()
    total_distance_km: Optional[float] = None
    distances_km: Tuple[float, ...] = ()
    hop_km: Optional[float] = None
    t_sim_s: float = 20.0
    attempt_deadline_s: Optional[float] = None
    retry_budget: int = 10
    f_threshold: float = 0.5

    def __post_init__(self):
        if self.kind not in SWEEP_KINDS:
            raise ConfigurationError(f"unknown sweep kind: {self.kind!r}")
        if self.attempts < 1:
            raise ConfigurationError(f"attempts must be >= 1, got {self.attempts}")
        if self.retry_budget < 1:
            raise ConfigurationError(
                f"retry_budget must be >= 1, got {self.retry_budget}")
        if self.t_sim_s <= 0:
            raise ConfigurationError(f"t_sim_s must be > 0, got {self.t_sim_s}")
        for n in self.router_counts:
            if not 2 <= n <= MAX_ROUTERS:
                raise ConfigurationError(
                    f"router counts must be in [2, {MAX_ROUTERS}], got {n}")
        for d in self.distances_km:
            if d <= 0:
                raise ConfigurationError(f"distances must be > 0, got {d}")
        if self.kind == "HomogeneousScaling":
            if self.hop_km is None or not self.router_counts:
                raise ConfigurationError(
                    "HomogeneousScaling needs hop_km and router_counts")
        elif self.kind == "FixedDistanceNodeSweep":
            if self.total_distance_km is None or not self.router_counts:
                raise ConfigurationError(
                    "FixedDistanceNodeSweep needs total_distance_km and router_counts")
        elif self.kind == "CrossDistance":
            if not self.distances_km or not self.router_counts:
                raise ConfigurationError(
                    "CrossDistance needs distances_km and router_counts")
        elif self.kind == "FixedNodesDistanceSweep":
            if len(self.router_counts) != 1 or not self.distances_km:
                raise ConfigurationError(
                    "FixedNodesDistanceSweep needs one router count and distances_km")
        elif self.kind == "MinRepeaterSearch":
            if not self.distances_km:
                raise ConfigurationError("MinRepeaterSearch needs distances_km")

    @property
    def deadline_s(self) -> float:
        if self.attempt_deadline_s is not None:
            return self.attempt_deadline_s
        return self.t_sim_s / self.attempts


@dataclass(frozen=True)
class ExperimentResult:
    """Aggregated outcome of one chain configuration."""

    sweep_kind: str
    total_distance_km: float
    router_count: int
    attempts: int
    e_count: int
    failures: int
    mean_f_e2e: Optional[float]
    parity: str  # "even" | "odd"
    odd_subclass: str  # "" | "left" | "right"
    seed: int
    records: tuple = ()
    counters: dict = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def bsm_count(self) -> int:
        return self.router_count - 1

    @property
    def hop_km(self) -> float:
        return self.total_distance_km / self.bsm_count

    @property
    def mean_duration_ps(self) -> float:
        if not self.records:
            return 0.0
        return sum(r.duration_ps for r in self.records) / len(self.records)


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    r_squared: float


def fit_linear(points: Sequence[Tuple[float, float]]) -> RegressionFit:
    """Ordinary least squares fit of y on x."""
    if len(points) < 2:
        raise ConfigurationError("fit_linear needs at least 2 points")
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    if len(set(xs)) < 2:
        raise ConfigurationError("fit_linear needs at least 2 distinct x values")
    slope, intercept = statistics.linear_regression(xs, ys)
    ss_tot = sum((y - statistics.fmean(ys)) ** 2 for y in ys)
    if ss_tot == 0.0:
        return RegressionFit(slope, intercept, 1.0)
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in points)
    r2 = max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return RegressionFit(slope, intercept, r2)


def run_config(*, kind: str, profile: HardwareProfile, router_count: int,
               total_km: float, attempts: int, seed: int, t_sim_s: float,
               attempt_deadline_s: float, retry_budget: int, f_threshold: float,
               root_bias: str = "alternate", trace=None) -> ExperimentResult:
    """Run one chain configuration for `attempts` end-to-end requests."""
    parity = "even" if router_count % 2 == 0 else "odd"
    subclass = root_bias if parity == "odd" and root_bias in ("left", "right") else ""
    try:
        topo = TopologySpec.homogeneous(router_count, profile=profile, total_km=total_km)
        mgr = NetworkManager(topo, seed=seed, t_sim_s=t_sim_s,
                             retry_budget=retry_budget, f_threshold=f_threshold,
                             attempt_deadline_s=attempt_deadline_s,
                             root_bias=root_bias, trace=trace)
        run = mgr.run_attempts(attempts)
    except Exception as exc:  # a faulty configuration must not kill the sweep
        return ExperimentResult(
            sweep_kind=kind, total_distance_km=total_km, router_count=router_count,
            attempts=attempts, e_count=0, failures=attempts, mean_f_e2e=None,
            parity=parity, odd_subclass=subclass, seed=seed,
            error=f"{type(exc).__name__}: {exc}")
    fidelities = [r.fidelity for r in run.records if r.outcome == "success"]
    return ExperimentResult(
        sweep_kind=kind, total_distance_km=total_km, router_count=router_count,
        attempts=attempts, e_count=len(fidelities),
        failures=attempts - len(fidelities),
        mean_f_e2e=statistics.fmean(fidelities) if fidelities else None,
        parity=parity, odd_subclass=subclass, seed=seed,
        records=tuple(run.records), counters=dict(run.counters))


def _configs(spec: SweepSpec) -> List[Tuple[float, int]]:
    if spec.kind == "HomogeneousScaling":
        return [(spec.hop_km * (n - 1), n) for n in spec.router_counts]
    if spec.kind == "FixedDistanceNodeSweep":
        return [(spec.total_distance_km, n) for n in spec.router_counts]
    if spec.kind == "CrossDistance":
        return [(d, n) for d in spec.distances_km for n in spec.router_counts]
    if spec.kind == "FixedNodesDistanceSweep":
        n = spec.router_counts[0]
        return [(d, n) for d in spec.distances_km]
    raise ConfigurationError(f"{spec.kind} has no direct configuration grid")


def run_sweep(spec: SweepSpec, *, profiles=None, trace=None) -> List[ExperimentResult]:
    """Run every configuration of the sweep.

    Each configuration gets a seed derived from the base seed and the
    configuration itself, so results do not depend on sweep order.  Odd
    router counts produce two rows, one per swap-plan subclass, each pinned
    to its class for all attempts.
    """
    profile = resolve_profile(spec.profile, profiles)
    if spec.kind == "MinRepeaterSearch":
        return _run_min_repeater_sweep(spec, profile)
    results = []
    for total_km, n in _configs(spec):
        biases = ("left", "right") if n % 2 else ("alternate",)
        for bias in biases:
            seed = config_seed(spec.base_seed, spec.kind, profile.name,
                               total_km, n, bias)
            results.append(run_config(
                kind=spec.kind, profile=profile, router_count=n,
                total_km=total_km, attempts=spec.attempts, seed=seed,
                t_sim_s=spec.t_sim_s, attempt_deadline_s=spec.deadline_s,
                retry_budget=spec.retry_budget, f_threshold=spec.f_threshold,
                root_bias=bias, trace=trace))
    results.sort(key=lambda r: (r.total_distance_km, r.router_count, r.odd_subclass))
    return results


def min_repeaters(distance_km: float, profile, *, attempts: int = 20,
                  base_seed: int = 1, m_max: int = 60, t_sim_s: float = 40.0,
                  retry_budget: int = 10, f_threshold: float = 0.5,
                  profiles=None) -> Optional[int]:
    """Smallest intermediate-router count that yields any entanglement.

    Searches m = 0, 1, ... upward with a fixed per-m seed; returns None when
    no count up to m_max achieves a single success out of `attempts`.
    """
    if distance_km <= 0:
        raise ConfigurationError(f"distance_km must be > 0, got {distance_km}")
    prof = resolve_profile(profile, profiles)
    for m in range(m_max + 1):
        n = m + 2
        seed = config_seed(base_seed, "MinRepeaterSearch", prof.name, distance_km, n)
        res = run_config(
            kind="MinRepeaterSearch", profile=prof, router_count=n,
            total_km=distance_km, attempts=attempts, seed=seed,
            t_sim_s=t_sim_s, attempt_deadline_s=t_sim_s / attempts,
            retry_budget=retry_budget, f_threshold=f_threshold)
        if res.e_count >= 1:
            return m
    return None


def _run_min_repeater_sweep(spec: SweepSpec, profile: HardwareProfile) -> List[ExperimentResult]:
    results = []
    for d in spec.distances_km:
        m = min_repeaters(d, profile, attempts=spec.attempts,
                          base_seed=spec.base_seed, t_sim_s=spec.t_sim_s,
                          retry_budget=spec.retry_budget,
                          f_threshold=spec.f_threshold)
        if m is None:
            results.append(ExperimentResult(
                sweep_kind=spec.kind, total_distance_km=d, router_count=2,
                attempts=spec.attempts, e_count=0, failures=spec.attempts,
                mean_f_e2e=None, parity="even", odd_subclass="",
                seed=config_seed(spec.base_seed, spec.kind, profile.name, d, 2),
                error="no repeater count up to the search limit succeeded"))
            continue
        n = m + 2
        seed = config_seed(spec.base_seed, "MinRepeaterSearch", profile.name, d, n)
        results.append(run_config(
            kind=spec.kind, profile=profile, router_count=n, total_km=d,
            attempts=spec.attempts, seed=seed, t_sim_s=spec.t_sim_s,
            attempt_deadline_s=spec.t_sim_s / spec.attempts,
            retry_budget=spec.retry_budget, f_threshold=spec.f_threshold))
    results.sort(key=lambda r: (r.total_distance_km, r.router_count))
    return results


def summarize_trend(results: Sequence[ExperimentResult]) -> dict:
    """Per-parity trend summary of a node-count sweep.

    Partitions rows into even, odd-left and odd-right classes and reports
    the mean E_count and fitted slope of E_count versus router count for
    each non-empty class, plus the overall slope sign.
    """
    classes = {"even": [], "odd-left": [], "odd-right": []}
    for r in results:
        if r.parity == "even":
            classes["even"].append(r)
        else:
            classes[f"odd-{r.odd_subclass or 'left'}"].append(r)
    summary = {}
    all_points = [(r.router_count, r.e_count) for r in results]
    for name, rows in classes.items():
        if not rows:
            continue
        entry = {"mean_e_count": statistics.fmean(r.e_count for r in rows),
                 "count": len(rows)}
        points = [(r.router_count, r.e_count) for r in rows]
        if len({x for x, _ in points}) >= 2:
            entry["slope"] = fit_linear(points).slope
        summary[name] = entry
    if "even" in summary and ("odd-left" in summary or "odd-right" in summary):
        odd_rows = classes["odd-left"] + classes["odd-right"]
        summary["odd_mean"] = statistics.fmean(r.e_count for r in odd_rows)
        summary["even_mean"] = summary["even"]["mean_e_count"]
    if len({x for x, _ in all_points}) >= 2:
        slope = fit_linear(all_points).slope
        summary["slope_sign"] = 0 if slope == 0 else int(math.copysign(1, slope))
    return summary


def fidelity_staircase(profile, distances_km: Sequence[float], *,
                       f_threshold: float = 0.75, base_seed: int = 1,
                       attempts: int = 20, t_sim_s: float = 20.0,
                       retry_budget: int = 10, start_routers: int = 2,
                       profiles=None) -> List[ExperimentResult]:
    """Distance sweep with router count auto-stepped at threshold crossings.

    Walks the distance grid left to right holding the router count; when a
    configuration's successes die out (mean fidelity pushed under the
    threshold), routers are added until entanglement recovers or the router
    limit is hit.  Each recovery begins a new sawtooth cycle whose first
    point is the cycle's fidelity peak.
    """
    prof = resolve_profile(profile, profiles)
    n = start_routers
    out = []
    for d in sorted(distances_km):
        while True:
            seed = config_seed(base_seed, "Staircase", prof.name, d, n)
            res = run_config(
                kind="FixedNodesDistanceSweep", profile=prof, router_count=n,
                total_km=d, attempts=attempts, seed=seed, t_sim_s=t_sim_s,
                attempt_deadline_s=t_sim_s / attempts,
                retry_budget=retry_budget, f_threshold=f_threshold)
            if res.e_count >= 1 or n >= MAX_ROUTERS:
                out.append(res)
                break
            n += 1
    return out

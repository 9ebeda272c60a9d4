"""JSON experiment configuration: profiles, sweeps and global settings.

One config file fully determines an experiment together with one seed.
Validation is strict: unknown keys are rejected and every error names the
offending key, so a typo never silently falls back to a default.  All
dimensioned keys carry their unit as a suffix (``_km``, ``_s``,
``_db_per_km``).
"""

import json
from dataclasses import dataclass, field
from typing import Dict, Optional

from .errors import ConfigurationError
from .experiments import PROFILES, SweepSpec
from .hardware import BsmSpec, HardwareProfile, MemorySpec

_GLOBAL_KEYS = {
    "base_seed": int,
    "t_sim_s": (int, float),
    "output_dir": str,
    "f_threshold": (int, float),
    "retry_budget": int,
    "attempts": int,
}

_MEMORY_KEYS = {
    "slots": int,
    "tau_coh_s": (int, float),
    "f_init": (int, float),
    "emit_frequency_hz": (int, float),
}

_BSM_KEYS = {
    "intrinsic_success": (int, float),
    "detector_efficiency": (int, float),
}

_PROFILE_KEYS = {
    "memory": dict,
    "bsm": dict,
    "attenuation_db_per_km": (int, float),
    "light_speed_km_per_s": (int, float),
    "classical_delay_s": (int, float, type(None)),
    "bsm_placement_fraction": (int, float),
}

_SWEEP_KEYS = {
    "kind": str,
    "profile": str,
    "base_seed": int,
    "attempts": int,
    "router_counts": list,
    "total_distance_km": (int, float),
    "distances_km": list,
    "hop_km": (int, float),
    "t_sim_s": (int, float),
    "attempt_deadline_s": (int, float),
    "retry_budget": int,
    "f_threshold": (int, float),
}


@dataclass(frozen=True)
class GlobalConfig:
    base_seed: int = 1
    t_sim_s: float = 20.0
    output_dir: str = "results"
    f_threshold: float = 0.5
    retry_budget: int = 10
    attempts: int = 20


@dataclass(frozen=True)
class ConfigFile:
    """Fully validated configuration: profiles, sweeps, globals."""

    profiles: Dict[str, HardwareProfile] = field(default_factory=dict)
    sweeps: Dict[str, SweepSpec] = field(default_factory=dict)
    globals_: GlobalConfig = field(default_factory=GlobalConfig)

    def sweep(self, name: str) -> SweepSpec:
        try:
            return self.sweeps[name]
        except KeyError:
            known = ", ".join(sorted(self.sweeps)) or "(none)"
            raise ConfigurationError(
                f"unknown sweep {name!r}; config defines: {known}") from None


def _check_keys(obj: dict, allowed: dict, where: str):
    if not isinstance(obj, dict):
        raise ConfigurationError(f"{where} must be an object, got {type(obj).__name__}")
    for key, value in obj.items():
        if key not in allowed:
            raise ConfigurationError(f"unknown key {key!r} in {where}")
        if not isinstance(value, allowed[key]) or isinstance(value, bool):
            raise ConfigurationError(
                f"{where}.{key} has wrong type {type(value).__name__}")


def _build_profile(name: str, obj: dict) -> HardwareProfile:
    where = f"profiles.{name}"
    _check_keys(obj, _PROFILE_KEYS, where)
    mem_obj = obj.get("memory", {})
    _check_keys(mem_obj, _MEMORY_KEYS, f"{where}.memory")
    bsm_obj = obj.get("bsm", {})
    _check_keys(bsm_obj, _BSM_KEYS, f"{where}.bsm")
    try:
        memory = MemorySpec(**mem_obj)
        bsm = BsmSpec(**bsm_obj)
        kwargs = {k: v for k, v in obj.items() if k not in ("memory", "bsm")}
        return HardwareProfile(name=name, memory=memory, bsm=bsm, **kwargs)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{where}: {exc}") from None


def _build_sweep(name: str, obj: dict, glob: GlobalConfig,
                 profiles: Dict[str, HardwareProfile]) -> SweepSpec:
    where = f"sweeps.{name}"
    _check_keys(obj, _SWEEP_KEYS, where)
    if "kind" not in obj:
        raise ConfigurationError(f"{where}.kind is required")
    kwargs = dict(obj)
    for key in ("router_counts", "distances_km"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    kwargs.setdefault("base_seed", glob.base_seed)
    kwargs.setdefault("attempts", glob.attempts)
    kwargs.setdefault("t_sim_s", glob.t_sim_s)
    kwargs.setdefault("retry_budget", glob.retry_budget)
    kwargs.setdefault("f_threshold", glob.f_threshold)
    kwargs.setdefault("profile", "idealized")
    if kwargs["profile"] not in profiles:
        raise ConfigurationError(
            f"{where}.profile: unknown profile {kwargs['profile']!r}")
    try:
        return SweepSpec(**kwargs)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{where}: {exc}") from None


def parse_config(data: dict) -> ConfigFile:
    """Validate an already-parsed JSON object into a ConfigFile.

    Shipped profiles are always available; a config profile with the same
    name overrides the shipped one.
    """
    if not isinstance(data, dict):
        raise ConfigurationError("config root must be a JSON object")
    for key in data:
        if key not in ("global", "profiles", "sweeps"):
            raise ConfigurationError(f"unknown top-level key {key!r}")
    glob_obj = data.get("global", {})
    _check_keys(glob_obj, _GLOBAL_KEYS, "global")
    try:
        glob = GlobalConfig(**glob_obj)
    except TypeError as exc:
        raise ConfigurationError(f"global: {exc}") from None
    if glob.t_sim_s <= 0:
        raise ConfigurationError("global.t_sim_s must be > 0")
    if glob.retry_budget < 1:
        raise ConfigurationError("global.retry_budget must be >= 1")
    if glob.attempts < 1:
        raise ConfigurationError("global.attempts must be >= 1")
    if not 0.0 <= glob.f_threshold <= 1.0:
        raise ConfigurationError("global.f_threshold must be in [0, 1]")
    profiles = dict(PROFILES)
    prof_section = data.get("profiles", {})
    if not isinstance(prof_section, dict):
        raise ConfigurationError("profiles must be an object")
    for name, obj in prof_section.items():
        profiles[name] = _build_profile(name, obj)
    sweeps = {}
    sweep_section = data.get("sweeps", {})
    if not isinstance(sweep_section, dict):
        raise ConfigurationError("sweeps must be an object")
    for name, obj in sweep_section.items():
        sweeps[name] = _build_sweep(name, obj, glob, profiles)
    return ConfigFile(profiles=profiles, sweeps=sweeps, globals_=glob)


def load_config(path: str) -> ConfigFile:
    """Load and validate a JSON config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config parse error in {path}: {exc}") from None
    return parse_config(data)


def dump_config(cfg: ConfigFile) -> dict:
    """Semantic inverse of parse_config, for round-trip checks."""
    out = {
        "global": {
            "base_seed": cfg.globals_.base_seed,
            "t_sim_s": cfg.globals_.t_sim_s,
            "output_dir": cfg.globals_.output_dir,
            "f_threshold": cfg.globals_.f_threshold,
            "retry_budget": cfg.globals_.retry_budget,
            "attempts": cfg.globals_.attempts,
        },
        "profiles": {},
        "sweeps": {},
    }
    for name, p in cfg.profiles.items():
        out["profiles"][name] = {
            "memory": {
                "slots": p.memory.slots,
                "tau_coh_s": p.memory.tau_coh_s,
                "f_init": p.memory.f_init,
                "emit_frequency_hz": p.memory.emit_frequency_hz,
            },
            "bsm": {
                "intrinsic_success": p.bsm.intrinsic_success,
                "detector_efficiency": p.bsm.detector_efficiency,
            },
            "attenuation_db_per_km": p.attenuation_db_per_km,
            "light_speed_km_per_s": p.light_speed_km_per_s,
            "classical_delay_s": p.classical_delay_s,
            "bsm_placement_fraction": p.bsm_placement_fraction,
        }
    for name, s in cfg.sweeps.items():
        entry = {
            "kind": s.kind,
            "profile": s.profile,
            "base_seed": s.base_seed,
            "attempts": s.attempts,
            "t_sim_s": s.t_sim_s,
            "retry_budget": s.retry_budget,
            "f_threshold": s.f_threshold,
        }
        if s.router_counts:
            entry["router_counts"] = list(s.router_counts)
        if s.distances_km:
            entry["distances_km"] = list(s.distances_km)
        if s.total_distance_km is not None:
            entry["total_distance_km"] = s.total_distance_km
        if s.hop_km is not None:
            entry["hop_km"] = s.hop_km
        if s.attempt_deadline_s is not None:
            entry["attempt_deadline_s"] = s.attempt_deadline_s
        out["sweeps"][name] = entry
    return out

"""Flat key = value run configuration.

The parameter space is small, so the format is a plain text file of
``key = value`` lines ('#' starts a comment).  Unknown keys are rejected.
``emit_config(parse_config(text))`` is the canonical form: fixed key order,
drive and thermal occupation resolved to their physical keys
(``omega_drive``, ``n_th``), full-precision floats.

Convenience inputs accepted on parse and canonicalized away:
  drive_ratio    effective dark-mode drive in units of g_nl -> omega_drive
  temperature_k  bath temperature in kelvin -> n_th
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace

from .model import (
    PhysicalParams,
    bose_einstein_occupation,
    derive,
)


class ConfigError(ValueError):
    """Malformed configuration text, unknown key, or inconsistent values."""


def _parse_float(v: str) -> float:
    try:
        return float(v)
    except ValueError as e:
        raise ConfigError(f"expected a number, got {v!r}") from e


def _parse_int(v: str) -> int:
    try:
        return int(v)
    except ValueError as e:
        raise ConfigError(f"expected an integer, got {v!r}") from e


def _parse_bool(v: str) -> bool:
    low = v.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {v!r}")


def _parse_float_list(v: str) -> tuple[float, ...]:
    items = [s.strip() for s in v.split(",") if s.strip()]
    if not items:
        raise ConfigError(f"expected a comma-separated list, got {v!r}")
    return tuple(_parse_float(s) for s in items)


@dataclass(frozen=True)
class RunConfig:
    # physical parameters, linear kHz
    g13: float = 1.0
    n_centers: int = 40000
    omega_d: float = 20.0
    g24_tilde: float = 200.0
    epsilon: float = 200.0
    delta: float = 40000.0
    gamma4: float = 10000.0
    omega_m: float = 800000.0
    quality_factor: float = 1e6
    omega_drive: float | None = None   # resolved in parse; None means drive_ratio default
    n_th: float = 0.1
    cutoff: int = 20
    # run controls
    t_max: float = 20.0                # units of 1/g_nl
    samples: int = 400
    out_dir: str = "results"
    seed: int = 0                      # reserved; runs are deterministic
    # sweep lists
    n_th_sweep: tuple[float, ...] = (0.1, 0.3, 0.5)
    drive_sweep: tuple[float, ...] = (0.125, 0.2, 0.5)   # omega_tilde / g_nl
    # adiabatic conversion protocol
    sweep_velocity: float = 0.2        # units of g13_tilde
    sweep_t_end: float = 25.0          # units of 1/g13_tilde
    sweep_phonon_decay: bool = False
    dwell_ms: float = 0.0

    def physical(self) -> PhysicalParams:
        return PhysicalParams(
            g13=self.g13,
            n_centers=self.n_centers,
            omega_d=self.omega_d,
            g24_tilde=self.g24_tilde,
            epsilon=self.epsilon,
            delta=self.delta,
            gamma4=self.gamma4,
            omega_m=self.omega_m,
            quality_factor=self.quality_factor,
            omega_drive=self.omega_drive,
            n_th=self.n_th,
            cutoff=self.cutoff,
        )


_FLOAT_KEYS = ("g13", "omega_d", "g24_tilde", "epsilon", "delta", "gamma4",
               "omega_m", "quality_factor", "omega_drive", "n_th", "t_max",
               "sweep_velocity", "sweep_t_end", "dwell_ms")
_INT_KEYS = ("n_centers", "cutoff", "samples", "seed")
_LIST_KEYS = ("n_th_sweep", "drive_sweep")
_BOOL_KEYS = ("sweep_phonon_decay",)
_STR_KEYS = ("out_dir",)
_ALIAS_KEYS = ("drive_ratio", "temperature_k")

CANONICAL_ORDER = (
    "g13", "n_centers", "omega_d", "g24_tilde", "epsilon", "delta", "gamma4",
    "omega_m", "quality_factor", "omega_drive", "n_th", "cutoff",
    "t_max", "samples", "out_dir", "seed",
    "n_th_sweep", "drive_sweep",
    "sweep_velocity", "sweep_t_end", "sweep_phonon_decay", "dwell_ms",
)

DEFAULT_DRIVE_RATIO = 0.2


def parse_pairs(lines) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.rstrip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def _resolve(pairs: dict[str, str]) -> RunConfig:
    known = set(_FLOAT_KEYS) | set(_INT_KEYS) | set(_LIST_KEYS) | set(_BOOL_KEYS) \
        | set(_STR_KEYS) | set(_ALIAS_KEYS)
    unknown = sorted(set(pairs) - known)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    if "drive_ratio" in pairs and "omega_drive" in pairs:
        raise ConfigError("give either drive_ratio or omega_drive, not both")
    if "temperature_k" in pairs and "n_th" in pairs:
        raise ConfigError("give either temperature_k or n_th, not both")

    kwargs = {}
    for key, raw in pairs.items():
        if key in _ALIAS_KEYS:
            continue
        if key in _FLOAT_KEYS:
            kwargs[key] = _parse_float(raw)
        elif key in _INT_KEYS:
            kwargs[key] = _parse_int(raw)
        elif key in _LIST_KEYS:
            kwargs[key] = _parse_float_list(raw)
        elif key in _BOOL_KEYS:
            kwargs[key] = _parse_bool(raw)
        else:
            kwargs[key] = raw
    cfg = RunConfig(**kwargs)

    # resolve thermal occupation before the drive (both need valid physics)
    if "temperature_k" in pairs:
        temp = _parse_float(pairs["temperature_k"])
        probe = replace(cfg, omega_drive=1.0)  # placeholder drive for validation
        d = derive(probe.physical())
        cfg = replace(cfg, n_th=d.phonon_fraction * bose_einstein_occupation(cfg.omega_m, temp))

    if cfg.omega_drive is None:
        ratio = _parse_float(pairs["drive_ratio"]) if "drive_ratio" in pairs else DEFAULT_DRIVE_RATIO
        probe = replace(cfg, omega_drive=1.0)
        d = derive(probe.physical())
        cfg = replace(cfg, omega_drive=ratio * d.g_nl * d.bright_coupling / d.g13_tilde)

    try:
        cfg.physical()
    except ValueError as e:
        raise ConfigError(str(e)) from e
    if cfg.t_max <= 0 or cfg.samples < 1:
        raise ConfigError("t_max must be > 0 and samples >= 1")
    if cfg.sweep_velocity <= 0 or cfg.sweep_t_end <= 0:
        raise ConfigError("sweep_velocity and sweep_t_end must be > 0")
    if cfg.dwell_ms < 0:
        raise ConfigError("dwell_ms must be >= 0")
    if not all(x >= 0 for x in cfg.n_th_sweep):
        raise ConfigError("n_th_sweep values must be >= 0")
    if not all(x > 0 for x in cfg.drive_sweep):
        raise ConfigError("drive_sweep values must be > 0")
    return cfg


def parse_config(text: str) -> RunConfig:
    return _resolve(parse_pairs(text.splitlines()))


def apply_overrides(cfg: RunConfig, sets: list[str]) -> RunConfig:
    """Re-resolve the config with --set key=value pairs layered on top."""
    pairs = {}
    for f in fields(RunConfig):
        v = getattr(cfg, f.name)
        pairs[f.name] = _format_value(v)
    for item in sets:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        # an alias or a re-set physical key replaces its resolved counterpart
        if key == "drive_ratio":
            pairs.pop("omega_drive", None)
        if key == "temperature_k":
            pairs.pop("n_th", None)
        pairs[key] = value
    return _resolve(pairs)


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ", ".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_config(cfg: RunConfig) -> str:
    lines = [f"{key} = {_format_value(getattr(cfg, key))}" for key in CANONICAL_ORDER]
    return "\n".join(lines) + "\n"


def config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(emit_config(cfg).encode("utf-8")).hexdigest()[:16]

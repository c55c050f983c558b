"""Run configuration: one flat-key JSON object shared by all suites.

Every key is typed and documented here; unknown keys are rejected so a typo
cannot silently fall back to a default. Suites read the subset of keys they
care about and validate it before doing any work. The config hash covers the
semantic keys only (output paths and worker count never change results).
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from ..torus import TorusSpec, resolve_gamma

__all__ = [
    "EXPERIMENTS",
    "ConfigError",
    "ExperimentConfig",
    "config_from_dict",
    "config_hash",
    "config_to_dict",
    "load_config",
    "seeds_of",
    "torus_of",
]

EXPERIMENTS = (
    "count-verify",
    "converge",
    "evolve",
    "picard",
    "prob-verify",
    "strichartz-scan",
    "tloc-scan",
    "cs-check",
    "divisor-scan",
)


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat bag of typed knobs; each suite consumes its own subset.

    Sentinels: 0 / 0.0 / () mean "suite default" for keys whose meaningful
    values are positive or non-empty. seed range is half-open, [seed_start,
    seed_end).
    """

    experiment: str
    gamma: str = "sqrt2"
    seed_start: int = 0
    seed_end: int = 5
    workers: int = 1
    out: str | None = None
    golden_dir: str | None = None
    golden_rtol: float = 1e-7

    # counting sweeps: a part runs iff its scale list is non-empty
    scales: tuple[int, ...] = ()  # generic N list (converge, linf, strichartz)
    scales_fix12: tuple[int, ...] = ()  # N3 grid: count n3 with (n1, n2) fixed
    scales_fix13: tuple[int, ...] = ()  # N1 grid: count n2 with (n1, n3) fixed
    scales_fix1: tuple[int, ...] = ()  # N1 grid: count (n2, n3) pairs, n1 fixed
    scales_exact: tuple[int, ...] = ()  # N1 grid: fast methods vs oracle
    cells_per_scale: int = 20
    cells_per_combo: int = 3
    exact_cells: int = 2
    scale_floor: int = 4
    mu_values: tuple[float, ...] = ()  # explicit level grid; () = derived
    window_widths: tuple[float, ...] = (1.0,)
    method: str = "auto"  # auto | oracle | strip | annulus
    wick: bool = True
    slope_tol: float = 1.15
    stability_factor: float = 2.0

    # divisor scan
    max_m: int = 1000000
    spot_checks: int = 100
    spot_max_m: int = 10000
    exponent_limit: float = 0.6

    # probability suite
    parts: tuple[str, ...] = ()  # () = every part the suite defines
    trials: int = 100000
    lambda_grid: tuple[float, ...] = (0.5, 1.0, 1.5, 2.0)
    chaos_scale: int = 8
    bound_constant: float = 4.0
    linf_seeds: int = 200
    linf_slope_limit: float = 0.45
    oversample: int = 0  # 0 = per-suite default

    # evolution
    n: int = 32
    dt: float = 1e-4
    t_final: float = 1.0
    scheme: str = "ifrk4"
    store_stride: int = 0  # 0 = automatic
    emit_modes: bool = False
    mass_tol: float = 0.0  # 0 = no conservation verdict
    energy_tol: float = 0.0

    # local-in-time analysis
    delta: float = 0.01
    delta_list: tuple[float, ...] = ()
    s: float = 0.1
    b: float = 0.51
    s_prime: float = 0.05
    samples: int = 1025
    t_half: float = 0.0  # 0 = per-suite default
    max_iter: int = 12
    residual_tol: float = 1e-8
    contraction_window: int = 3
    min_pass_fraction: float = 0.8
    dt_self_check: bool = False
    dt_check_tol: float = 0.05

    # scans
    kind: str = "free_random"
    variant: str = "xsb"
    samples_per_delta: int = 32
    pad_factor: float = 8.0
    slope_min: float | None = None
    slope_max: float | None = None
    include_flat: bool = True

    # matrix inequality check
    instances: int = 10000
    max_dim: int = 32

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}"
            )
        try:
            resolve_gamma(self.gamma)
        except Exception as exc:
            raise ConfigError(f"bad gamma {self.gamma!r}: {exc}") from exc
        if self.seed_end <= self.seed_start:
            raise ConfigError(
                f"empty seed range [{self.seed_start}, {self.seed_end})"
            )
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")


_COERCERS = {
    "str": lambda v: v if isinstance(v, str) else _bad("a string", v),
    "bool": lambda v: v if isinstance(v, bool) else _bad("a bool", v),
    "int": lambda v: v
    if isinstance(v, int) and not isinstance(v, bool)
    else _bad("an integer", v),
    "float": lambda v: float(v)
    if isinstance(v, (int, float)) and not isinstance(v, bool)
    else _bad("a number", v),
    "str | None": lambda v: v if v is None or isinstance(v, str) else _bad("a string or null", v),
    "float | None": lambda v: None
    if v is None
    else (float(v) if isinstance(v, (int, float)) and not isinstance(v, bool) else _bad("a number or null", v)),
    "tuple[int, ...]": lambda v: tuple(_COERCERS["int"](x) for x in _seq(v)),
    "tuple[float, ...]": lambda v: tuple(_COERCERS["float"](x) for x in _seq(v)),
    "tuple[str, ...]": lambda v: tuple(_COERCERS["str"](x) for x in _seq(v)),
}


def _bad(expected: str, value):
    raise ConfigError(f"expected {expected}, got {value!r}")


def _seq(v):
    if not isinstance(v, (list, tuple)):
        _bad("a list", v)
    return v


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build a config from a parsed JSON object, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object of flat keys")
    known = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    if "experiment" not in data:
        raise ConfigError("config is missing the 'experiment' key")
    kwargs = {}
    for key, value in data.items():
        try:
            kwargs[key] = _COERCERS[known[key]](value)
        except ConfigError as exc:
            raise ConfigError(f"config key {key!r}: {exc}") from None
    return ExperimentConfig(**kwargs)


def load_config(path: str | Path) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    return config_from_dict(data)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    out = dataclasses.asdict(cfg)
    for key, value in out.items():
        if isinstance(value, tuple):
            out[key] = list(value)
    return out


# Plumbing keys: they steer where results go and how fast they arrive, never
# what the records contain, so they stay out of the identity hash.
_NON_SEMANTIC = ("out", "golden_dir", "workers")


def config_hash(cfg: ExperimentConfig) -> str:
    data = config_to_dict(cfg)
    for key in _NON_SEMANTIC:
        data.pop(key, None)
    blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def seeds_of(cfg: ExperimentConfig) -> list[int]:
    return list(range(cfg.seed_start, cfg.seed_end))


def torus_of(cfg: ExperimentConfig) -> TorusSpec:
    return TorusSpec(resolve_gamma(cfg.gamma))

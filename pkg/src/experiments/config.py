"""
Experiment configuration.

Files are flat KEY=value text, one key per line, # for comments. Keys are
case-insensitive; unknown keys are errors.
"""
import hashlib
import logging
import os
from dataclasses import dataclass, fields, replace, asdict
from pathlib import Path
from typing import Optional

import numpy as np
from dotenv import dotenv_values, load_dotenv

from src.errors import ConfigError
from src.projection.engine import QUADRATURE_KINDS

logger = logging.getLogger(__name__)

# Keys that do not change any computed number
_UNHASHED = {"output_dir"}

# p2 = 1/2 + i delta keeps both legs of the unit-base triangle at most 1
MAX_TRIANGLE_HEIGHT = 3 ** 0.5 / 2


def _parse_bool(raw: str) -> bool:
    value = raw.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_floats(raw: str) -> tuple:
    return tuple(float(x) for x in raw.split(",") if x.strip())


_PARSERS = {"int": int, "float": float, "str": str, "bool": _parse_bool, "tuple": _parse_floats}


@dataclass(frozen=True)
class ExperimentConfig:
    preset: str = "gasket"
    n_max: int = 10
    generation_cap: int = 14
    theta_samples: int = 256
    quadrature: str = "midpoint"
    merge_eps: float = 1e-12
    bad_set_exponent: int = 3
    beta: float = 3.0

    # Fourier side
    m: int = 4
    alpha: float = 0.5
    epsilon_star: float = 1e-3
    strip_h: float = 2.4
    residual_tol: float = 1e-10
    continuation_tol: float = 1e-8
    riesz_slack: float = 1e-12
    plancherel_tol: float = 0.02
    plancherel_x_scale: float = 400.0

    # zero-trace
    trace_t0: float = 0.3
    trace_t1: float = 0.7
    trace_rect: tuple = (0.01, 40.0, -1.0, 1.0)

    # Tiling and unnamed constants
    tiling_delta: float = 0.1
    stability_c: float = 0.05
    domination_c: float = 1.0
    g_floor_c: float = 0.5
    window_c: float = 0.5
    ssv_c: float = 1.0
    bootstrap_c: float = 1.0

    # Audit sizes
    riesz_audit_samples: int = 1_000_000
    cetsq_trials: int = 1000
    cetsq_max_k: int = 200
    stability_grid: int = 100
    tiling_m_max: int = 8
    tiling_t_samples: int = 64
    tiling_zero_samples: int = 20
    stacking_n_min: int = 6
    stacking_n_max: int = 8
    degenerate_deltas: tuple = (0.1, 0.2, 0.4, 0.8)
    degenerate_n_max: int = 6

    seed: int = 20240601
    output_dir: str = "results"

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name in ("merge_eps", "residual_tol", "continuation_tol", "riesz_slack", "plancherel_tol",
                     "epsilon_star", "strip_h", "tiling_delta", "stability_c", "domination_c",
                     "g_floor_c", "window_c", "ssv_c", "bootstrap_c", "plancherel_x_scale", "alpha"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)!r}")
        for name in ("theta_samples", "generation_cap", "m", "riesz_audit_samples", "cetsq_trials",
                     "cetsq_max_k", "stability_grid", "tiling_m_max", "tiling_t_samples",
                     "tiling_zero_samples", "stacking_n_min", "bad_set_exponent"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1, got {getattr(self, name)!r}")
        if self.n_max < 0 or self.degenerate_n_max < 0:
            raise ConfigError("generation counts must be nonnegative")
        if self.quadrature not in QUADRATURE_KINDS:
            raise ConfigError(f"quadrature must be one of {QUADRATURE_KINDS}, got {self.quadrature!r}")
        if self.quadrature == "simpson" and self.theta_samples % 2:
            raise ConfigError("simpson quadrature needs an even theta_samples")
        if self.stacking_n_max < self.stacking_n_min:
            raise ConfigError("stacking_n_max is below stacking_n_min")
        if not self.degenerate_deltas or any(not 0 < d <= MAX_TRIANGLE_HEIGHT for d in self.degenerate_deltas):
            raise ConfigError("degenerate_deltas must be a nonempty list in (0, sqrt(3)/2]")
        if not (0 < self.trace_t0 < 1 and 0 < self.trace_t1 < 1):
            raise ConfigError("trace_t0 and trace_t1 must lie in (0, 1)")
        if len(self.trace_rect) != 4 or not (self.trace_rect[0] < self.trace_rect[1] and self.trace_rect[2] < self.trace_rect[3]):
            raise ConfigError("trace_rect must be re_lo,re_hi,im_lo,im_hi with lo < hi")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    # -- loading -----------------------------------------------------------

    @classmethod
    def field_types(cls) -> dict:
        return {f.name: type(f.default).__name__ for f in fields(cls)}

    @classmethod
    def from_mapping(cls, values: dict, base: Optional["ExperimentConfig"] = None) -> "ExperimentConfig":
        types = cls.field_types()
        parsed = {}
        for raw_key, raw in values.items():
            key = raw_key.strip().lower()
            if key not in types:
                raise ConfigError(f"unknown config key {raw_key!r}")
            if raw is None:
                raise ConfigError(f"config key {raw_key!r} has no value")
            try:
                parsed[key] = _PARSERS[types[key]](raw) if isinstance(raw, str) else raw
            except ValueError as e:
                raise ConfigError(f"bad value for {key}: {e}") from e
        return replace(base or cls(), **parsed)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file {path} not found")
        cfg = cls.from_mapping(dotenv_values(path))
        logger.info("loaded config %s from %s", cfg.config_hash, path)
        return cfg

    # -- identity ----------------------------------------------------------

    def canonical(self) -> str:
        lines = []
        for key, value in sorted(asdict(self).items()):
            if key in _UNHASHED:
                continue
            if isinstance(value, tuple):
                value = ",".join(repr(float(v)) for v in value)
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{key}={value}")
        return "\n".join(lines)

    @property
    def config_hash(self) -> str:
        return hashlib.md5(self.canonical().encode()).hexdigest()[:16]

    def rng(self, counter: int) -> np.random.Generator:
        """Independent substream `counter` of the configured seed."""
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(counter,)))

    @property
    def ell(self) -> int:
        """Medium-frequency block length ceil(alpha m)."""
        return int(np.ceil(self.alpha * self.m))


@dataclass(frozen=True)
class RunSettings:
    config: ExperimentConfig
    jobs: int
    log_level: str


def resolve_settings(
    config_path: Optional[str] = None,
    out: Optional[str] = None,
    seed: Optional[int] = None,
    jobs: Optional[int] = None,
    log_level: Optional[str] = None,
    overrides: Optional[dict] = None,
) -> RunSettings:
    """
    Build the run settings.

    Defaults come first, then the config file, then FAVARD_* environment variables,
    then explicit arguments.

    Args:
        config_path: KEY=value config file, or None for the defaults
        out: Output directory
        seed: 64-bit seed for randomized audits
        jobs: Worker processes
        log_level: Logging level name
        overrides: Further config keys from the command line (None values are skipped)

    Returns:
        RunSettings with the resolved config, job count and log level
    """
    load_dotenv()
    cfg = ExperimentConfig.from_file(config_path) if config_path else ExperimentConfig()

    updates = {}
    env_out = os.getenv("FAVARD_OUT")
    env_seed = os.getenv("FAVARD_SEED")
    if env_out:
        updates["output_dir"] = env_out
    if env_seed:
        updates["seed"] = env_seed
    if out is not None:
        updates["output_dir"] = out
    if seed is not None:
        updates["seed"] = seed
    updates.update({k: v for k, v in (overrides or {}).items() if v is not None})
    if updates:
        cfg = ExperimentConfig.from_mapping(updates, base=cfg)

    if jobs is None:
        raw_jobs = os.getenv("FAVARD_JOBS")
        try:
            jobs = int(raw_jobs) if raw_jobs else (os.cpu_count() or 1)
        except ValueError as e:
            raise ConfigError(f"FAVARD_JOBS must be an integer, got {raw_jobs!r}") from e
    if jobs < 1:
        raise ConfigError("jobs must be at least 1")

    level = (log_level or os.getenv("FAVARD_LOG_LEVEL") or "WARNING").upper()
    return RunSettings(cfg, jobs, level)

"""Configuration management for sbfctl."""
import logging
import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional

from errors import ConfigError, SbfError
from utils import parse_norm_exponent

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("coeffs", "centers", "quadrature", "frames", "interpolate", "quasi-interp",
               "stability", "bernstein", "rates", "inverse", "besov", "certify")
KERNEL_PARAMS = ("beta", "s", "d", "k", "t0", "sigma", "delta", "w", "continuation")


@dataclass
class RunConfig:
    """Fully-resolved settings of one run."""
    subcommand: str = "coeffs"
    family: str = "green"
    kernel_params: Dict[str, Any] = field(default_factory=dict)
    dim_n: int = 2
    centers_file: Optional[str] = None
    generator: Optional[str] = None
    count: int = 64
    levels: int = 3
    degree: int = 12
    degrees: List[int] = field(default_factory=lambda: [8, 16, 32, 64])
    sequence_degrees: List[int] = field(default_factory=lambda: [8, 16, 32, 64, 128, 256])
    J: int = 3
    p: float = 2.0
    gamma: float = 0.0
    beta: Optional[float] = None
    seed: int = 0
    output_dir: str = "sbf_output"
    target: str = "green_bump"
    theta0: float = 0.5 * math.pi
    target_s: Optional[float] = None
    mask_k: Optional[int] = None
    grid_factor: float = 4.0
    cell_resolution: Optional[int] = None
    anchor: str = "voronoi"
    feasibility_threshold: float = 0.25
    strict: bool = False
    envelope: Optional[str] = None
    smoothing_c: Optional[float] = None
    search_budget: int = 2000
    draws: int = 64
    l_max: Optional[int] = None
    rho_cap: float = 2.5
    oversample: float = 2.0
    exactness: str = "relaxed"
    nus: Optional[List[float]] = None
    synthetic: Optional[List[float]] = None
    tau: float = 2.0
    r_grid: List[float] = field(default_factory=lambda: [0.5, 1.0, 2.0, 3.0])
    families: List[str] = field(default_factory=lambda: ["gaussian", "multiquadric"])
    max_m: int = 8
    workers: int = 1


FIELD_NAMES = tuple(f.name for f in fields(RunConfig))


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _number_list(value) -> bool:
    return isinstance(value, list) and all(_is_number(v) for v in value)


class ConfigManager:
    """Loads, validates and resolves run configuration.

    Values come from an optional TOML file (flat keys, with kernel parameters
    under a ``[kernel]`` table) and are then overridden key by key.
    """

    def __init__(self, path: Optional[str] = None):
        """Initialize config manager.

        Args:
            path: TOML config file (optional)

        Raises:
            ConfigError: If the file is missing, unreadable or holds bad keys
        """
        self.config = RunConfig()
        self.path = path
        if path is not None:
            self.load(path)

    def load(self, path: str):
        """Apply every key of a TOML file."""
        file = Path(path)
        if not file.is_file():
            raise ConfigError("config not found", path=str(path))
        try:
            with open(file, "rb") as f:
                data = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"config is not valid TOML: {e}", path=str(path))
        kernel = data.pop("kernel", {})
        if not isinstance(kernel, dict):
            raise ConfigError("[kernel] must be a table")
        if "family" in kernel:
            data.setdefault("family", kernel.pop("family"))
        self.update(data)
        for key, value in kernel.items():
            self.set_kernel_param(key, value)
        logger.info(f"Loaded config from {path}")

    def update(self, values: Dict[str, Any]):
        """Set several keys; None values are skipped."""
        for key, value in values.items():
            if value is not None:
                self.set(key, value)

    def get(self, key: str) -> Any:
        """Get a specific config value.

        Args:
            key: Configuration key

        Returns:
            Configuration value
        """
        if key not in FIELD_NAMES:
            raise ConfigError(f"Unknown configuration key: {key}")
        return getattr(self.config, key)

    def set(self, key: str, value: Any):
        """Set a configuration value.

        Args:
            key: Configuration key
            value: Configuration value

        Raises:
            ConfigError: On an unknown key or a value of the wrong kind
        """
        key = key.replace("-", "_")
        if key == "kernel_params":
            if not isinstance(value, dict):
                raise ConfigError("kernel_params must be a table")
            for name, v in value.items():
                self.set_kernel_param(name, v)
            return
        value = self._validate(key, value)
        setattr(self.config, key, value)
        logger.debug(f"Set {key} = {value}")

    def set_kernel_param(self, name: str, value: Any):
        if name not in KERNEL_PARAMS:
            raise ConfigError(f"Unknown kernel parameter: {name}",
                              choices=",".join(KERNEL_PARAMS))
        if name == "continuation":
            if value not in ("positive", "raw"):
                raise ConfigError("continuation must be 'positive' or 'raw'")
        elif not _is_number(value):
            raise ConfigError(f"kernel parameter {name} must be a number")
        self.config.kernel_params[name] = value

    def _validate(self, key: str, value: Any) -> Any:
        if key == "subcommand":
            if value not in SUBCOMMANDS:
                raise ConfigError(f"unknown subcommand '{value}'")
        elif key in ("family", "target", "output_dir", "anchor"):
            if not isinstance(value, str) or not value:
                raise ConfigError(f"{key} must be a non-empty string")
        elif key in ("centers_file", "generator", "envelope"):
            if not isinstance(value, str):
                raise ConfigError(f"{key} must be a string")
        elif key in ("dim_n", "count", "workers", "search_budget", "draws"):
            if not _is_int(value) or value < 1:
                raise ConfigError(f"{key} must be a positive integer")
        elif key in ("levels", "degree", "J", "seed", "max_m", "cell_resolution", "l_max"):
            if not _is_int(value) or value < 0:
                raise ConfigError(f"{key} must be a non-negative integer")
        elif key == "mask_k":
            if not _is_int(value) or value < 3:
                raise ConfigError("mask_k must be an integer >= 3")
        elif key == "p":
            try:
                return parse_norm_exponent(value)
            except SbfError as e:
                raise ConfigError(e.message)
        elif key == "gamma":
            if not _is_number(value) or value < 0:
                raise ConfigError(f"{key} must be a non-negative number")
            return float(value)
        elif key in ("beta", "target_s", "theta0", "grid_factor", "feasibility_threshold",
                     "smoothing_c", "rho_cap", "oversample"):
            if not _is_number(value) or not value > 0:
                raise ConfigError(f"{key} must be a positive number")
            return float(value)
        elif key == "tau":
            if isinstance(value, str) and value.lower() == "inf":
                return math.inf
            if not _is_number(value) or not value > 0:
                raise ConfigError("tau must be a positive number or 'inf'")
            return float(value)
        elif key == "strict":
            if not isinstance(value, bool):
                raise ConfigError("strict must be a boolean")
        elif key == "exactness":
            if value not in ("relaxed", "frame"):
                raise ConfigError("exactness must be 'relaxed' or 'frame'")
        elif key in ("degrees", "sequence_degrees"):
            if not isinstance(value, list) or not value or \
                    not all(_is_int(v) and v >= 1 for v in value):
                raise ConfigError(f"{key} must be a list of positive integers")
        elif key in ("r_grid", "nus"):
            if not _number_list(value) or not value:
                raise ConfigError(f"{key} must be a non-empty list of numbers")
            return [float(v) for v in value]
        elif key == "synthetic":
            if not _number_list(value) or len(value) != 2:
                raise ConfigError("synthetic takes two numbers: mu and t")
            return [float(v) for v in value]
        elif key == "families":
            if not isinstance(value, list) or not value or \
                    not all(isinstance(v, str) for v in value):
                raise ConfigError("families must be a list of names")
        else:
            raise ConfigError(f"Unknown configuration key: {key}")
        return value

    def kernel_params(self) -> Dict[str, Any]:
        """Kernel parameters, with the Green order defaulting to beta."""
        params = dict(self.config.kernel_params)
        if self.config.family == "green" and "beta" not in params and self.config.beta:
            params["beta"] = self.config.beta
        if self.config.l_max is not None:
            params["l_max"] = self.config.l_max
        return params

    def resolved(self) -> Dict[str, Any]:
        """Every setting, defaults included; feeding it back reproduces the run."""
        data = asdict(self.config)
        data["kernel_params"] = dict(sorted(data["kernel_params"].items()))
        return data

    def format_config(self) -> str:
        """Format configuration for display."""
        lines = []
        for key, value in sorted(self.resolved().items()):
            lines.append(f"  {key}: {value}")
        return "\n".join(lines)

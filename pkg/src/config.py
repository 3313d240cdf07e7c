"""
Run Configuration
Parsing and validation of key=value run files, case defaults and environment settings
"""
import logging
import math
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Dict, List, Optional, Union

from dotenv import dotenv_values

from .cases import CaseSpec, get_case
from .core import PhysParams
from .exceptions import ConfigError
from .reconstruction import MAX_DEGREE

logger = logging.getLogger(__name__)

_TRUE = {'1', 'true', 'yes', 'on'}
_FALSE = {'0', 'false', 'no', 'off'}


@dataclass(frozen=True)
class RunConfig:
    """
    Everything needed to run one simulation

    Optional physical and detector parameters default to the case values.
    mood defaults to on for degrees >= 1.
    """

    case: str
    nx: Optional[int] = None
    ny: Optional[int] = None
    degree: int = 0
    wb: bool = True
    mood: Optional[bool] = None
    cfl: float = 0.5
    t_end: Optional[float] = None
    g: Optional[float] = None
    manning_k: Optional[float] = None
    cutoff_c: Optional[float] = None
    char_len_x: Optional[float] = None
    char_len_y: Optional[float] = None
    theta_exp: Optional[float] = None
    out_dir: Optional[str] = None
    snap_every: Optional[float] = None
    vtk: bool = False
    log_every: int = 100

    def __post_init__(self):
        get_case(self.case)
        if not 0 <= self.degree <= MAX_DEGREE:
            raise ConfigError(f"degree must be in [0, {MAX_DEGREE}], got {self.degree}")
        if self.mood and self.degree == 0:
            raise ConfigError("mood requires degree >= 1")
        for name in ('nx', 'ny'):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ConfigError(f"{name} must be >= 1, got {value}")
        if not 0 < self.cfl <= 1:
            raise ConfigError(f"cfl must be in (0, 1], got {self.cfl}")
        for name in ('t_end', 'g', 'char_len_x', 'char_len_y', 'snap_every'):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ConfigError(f"{name} must be positive, got {value}")
        if self.manning_k is not None and self.manning_k < 0:
            raise ConfigError(f"manning_k must be >= 0, got {self.manning_k}")
        if self.cutoff_c is not None and not self.cutoff_c > 0:
            raise ConfigError(f"cutoff_c must be positive, got {self.cutoff_c}")
        if self.theta_exp is not None and self.theta_exp < self.degree + 1:
            raise ConfigError(f"theta_exp must be >= degree + 1 = {self.degree + 1}, got {self.theta_exp}")
        if self.log_every < 1:
            raise ConfigError(f"log_every must be >= 1, got {self.log_every}")

    @property
    def spec(self) -> CaseSpec:
        return get_case(self.case)

    @property
    def use_mood(self) -> bool:
        return self.degree >= 1 if self.mood is None else self.mood

    @property
    def mesh(self) -> tuple:
        spec = self.spec
        return self.nx or spec.nx, self.ny or spec.ny

    @property
    def final_time(self) -> float:
        return self.t_end if self.t_end is not None else self.spec.t_end

    @property
    def cutoff(self) -> float:
        return self.cutoff_c if self.cutoff_c is not None else self.spec.cutoff

    def phys_params(self) -> PhysParams:
        spec = self.spec
        return PhysParams(
            g=self.g if self.g is not None else spec.g,
            k_manning=self.manning_k if self.manning_k is not None else spec.k_manning
        )

    def char_lengths(self) -> tuple:
        """Characteristic lengths, defaulting to the case values then the domain extents"""
        x0, x1, y0, y1 = self.spec.box
        lx, ly = self.spec.char_len or (x1 - x0, y1 - y0)
        return (
            self.char_len_x if self.char_len_x is not None else lx,
            self.char_len_y if self.char_len_y is not None else ly,
        )

    def exponent(self) -> float:
        return float(self.theta_exp if self.theta_exp is not None else self.degree + 1)

    def to_lines(self) -> List[str]:
        """key=value lines with every default resolved"""
        nx, ny = self.mesh
        params = self.phys_params()
        lx, ly = self.char_lengths()
        values = {
            'case': self.case,
            'nx': nx,
            'ny': ny,
            'degree': self.degree,
            'wb': self.wb,
            'mood': self.use_mood,
            'cfl': self.cfl,
            't_end': self.final_time,
            'g': params.g,
            'manning_k': params.k_manning,
            'cutoff_c': self.cutoff,
            'char_len_x': lx,
            'char_len_y': ly,
            'theta_exp': self.exponent(),
            'out_dir': self.out_dir,
            'snap_every': self.snap_every,
            'vtk': self.vtk,
            'log_every': self.log_every,
        }
        return [f"{key}={_format(value)}" for key, value in values.items() if value is not None]


def _format(value) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float) and math.isinf(value):
        return 'inf'
    return str(value)


def _parse_bool(key: str, text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ConfigError(f"{key}: expected a boolean, got '{text}'")


def _parse_value(key: str, text: str, annotation: str):
    try:
        if 'bool' in annotation:
            return _parse_bool(key, text)
        if 'int' in annotation:
            return int(text)
        if 'float' in annotation:
            return float(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse '{text}'") from None
    return text


_FIELD_TYPES = {f.name: str(f.type) for f in fields(RunConfig)}


def parse_config(values: Dict[str, Optional[str]]) -> RunConfig:
    """
    Build a RunConfig from raw key=value pairs

    Args:
        values: Mapping of keys to unparsed strings

    Returns:
        Validated RunConfig

    Raises:
        ConfigError: On unknown keys, missing case or unparsable values
    """
    unknown = sorted(set(values) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    if not values.get('case'):
        raise ConfigError("configuration must name a case")

    kwargs = {}
    for key, text in values.items():
        if text is None or text.strip() == '':
            continue
        kwargs[key] = _parse_value(key, text.strip(), _FIELD_TYPES[key])
    return RunConfig(**kwargs)


def load_config(path: Union[str, Path]) -> RunConfig:
    """Read a key=value run file"""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"configuration file not found: {path}")
    config = parse_config(dotenv_values(path))
    logger.info(f"Loaded configuration for case {config.case} from {path}")
    return config


def default_config(case: str, degree: int = 0) -> RunConfig:
    return RunConfig(case=case, degree=degree)


def thread_cap() -> int:
    """Worker count from SWELL_THREADS, 1 when unset"""
    raw = os.getenv('SWELL_THREADS', '1')
    try:
        threads = int(raw)
    except ValueError:
        raise ConfigError(f"SWELL_THREADS must be an integer, got '{raw}'") from None
    return max(1, threads)


def log_level() -> str:
    return os.getenv('SWELL_LOG_LEVEL', 'INFO').upper()

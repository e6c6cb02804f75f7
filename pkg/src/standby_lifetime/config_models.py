"""Run configuration read by every CLI command

JSON is the canonical format; YAML is accepted for hand-written files.
Unknown keys are rejected at every level.
"""

import hashlib
import json
import logging
import os
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from standby_lifetime.dist import DistributionSpec, TransformBackend, WorkingTimeModel
from standby_lifetime.errors import ConfigParseError, ConfigValidationError, DomainError, StandbyLifetimeError
from standby_lifetime.invert import InversionMethod, InversionSettings, InversionTarget
from standby_lifetime.model import SystemConfig
from standby_lifetime.sim import Engine

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "STANDBY_LIFETIME_OUTPUT_DIR"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"
    SVG = "svg"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)


class SystemSection(_Section):
    """n identical elements, repair rate mu and the working-time law"""

    n: int = Field(description="number of elements")
    mu: float = Field(gt=0, allow_inf_nan=False, description="repair rate")
    distribution: DistributionSpec
    backend: Optional[TransformBackend] = None

    @field_validator("n")
    @classmethod
    def _check_n(cls, n):
        if n < 2:
            raise ValueError(f"n ≥ 2 required, got n={n}")
        return n

    @model_validator(mode="after")
    def _check_backend(self):
        if self.backend is TransformBackend.CLOSED_FORM and not self.distribution.closed_form_lst:
            raise ValueError(f"{self.distribution.family} has no closed-form transform; use the quadrature backend")
        return self


class InversionSection(_Section):
    method: InversionMethod = InversionMethod.EULER
    terms: Optional[int] = Field(default=None, ge=5)
    target: InversionTarget = InversionTarget.CDF
    t_grid: Optional[List[float]] = None
    strict: bool = True

    @field_validator("t_grid")
    @classmethod
    def _check_grid(cls, grid):
        if grid is not None:
            if not grid or grid[0] <= 0 or any(b <= a for a, b in zip(grid, grid[1:])):
                raise ValueError("t_grid must be positive and strictly increasing")
        return grid

    @model_validator(mode="after")
    def _check_terms(self):
        try:
            self.settings()
        except ValidationError as e:
            raise ValueError(e.errors()[0]["msg"]) from e
        return self

    def settings(self) -> InversionSettings:
        return InversionSettings(method=self.method, terms=self.terms, target=self.target, strict=self.strict)


class LstSection(_Section):
    """Transform arguments evaluated by the lst command, as [re, im] pairs"""

    s_points: List[Tuple[float, float]] = Field(default_factory=lambda: [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])

    @field_validator("s_points")
    @classmethod
    def _check_points(cls, points):
        if not points:
            raise ValueError("at least one transform argument is required")
        for re, im in points:
            if re < 0:
                raise ValueError(f"transform arguments need Re(s) >= 0, got {re}")
        return points

    def arguments(self) -> List[complex]:
        return [complex(re, im) for re, im in self.s_points]


class SweepSection(_Section):
    mu_list: List[float] = Field(default_factory=lambda: [5.0, 10.0, 20.0, 40.0])
    s_grid: List[float] = Field(default_factory=lambda: [0.25, 1.0, 4.0], description="in units of 1/b")

    @field_validator("mu_list")
    @classmethod
    def _check_mu_list(cls, mu_list):
        if len(mu_list) < 2:
            raise ValueError("at least two repair rates are required")
        if mu_list[0] <= 0 or any(b <= a for a, b in zip(mu_list, mu_list[1:])):
            raise ValueError("repair rates must be positive and strictly ascending")
        return mu_list

    @field_validator("s_grid")
    @classmethod
    def _check_s_grid(cls, s_grid):
        if not s_grid or any(s <= 0 for s in s_grid):
            raise ValueError("s_grid must hold positive values")
        return s_grid


class OutputSection(_Section):
    directory: Path = Path("results")
    formats: List[OutputFormat] = Field(default_factory=lambda: [OutputFormat.CSV, OutputFormat.JSON])

    @field_validator("formats")
    @classmethod
    def _dedupe(cls, formats):
        if not formats:
            raise ValueError("at least one output format is required")
        return sorted(set(formats), key=lambda f: list(OutputFormat).index(f))


class RunConfig(_Section):
    """Everything a command needs; echoed with its defaults into every report"""

    system: SystemSection
    j0: int = Field(default=1, ge=0)
    seed: int = Field(default=0, ge=0)
    samples: int = Field(default=10_000, ge=1)
    engine: Engine = Engine.EMBEDDED_CHAIN
    workers: int = Field(default=1, ge=1)
    inversion: InversionSection = Field(default_factory=InversionSection)
    lst: LstSection = Field(default_factory=LstSection)
    sweep: SweepSection = Field(default_factory=SweepSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="after")
    def _check_state(self):
        if self.j0 > self.system.n - 1:
            raise ValueError(f"j0 must lie in [0, n-1] = [0, {self.system.n - 1}], got {self.j0}")
        return self

    def working_time(self) -> WorkingTimeModel:
        return WorkingTimeModel(self.system.distribution, self.system.backend)

    def system_config(self) -> SystemConfig:
        return SystemConfig(n=self.system.n, mu=self.system.mu, working_time=self.working_time())

    def echo(self) -> dict:
        """Effective settings of the computation; where reports go is not part of it"""
        return self.model_dump(mode="json", exclude={"output"})

    def canonical_json(self) -> str:
        return json.dumps(self.echo(), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form, output section excluded"""
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


def _dotted(loc) -> str:
    return ".".join(str(part) for part in loc) or "<root>"


def _convert(error: ValidationError) -> StandbyLifetimeError:
    errors = error.errors()
    unknown = [_dotted(e["loc"]) for e in errors if e["type"] == "extra_forbidden"]
    if unknown:
        return ConfigParseError(f"unknown configuration keys: {', '.join(unknown)}", keys=unknown)
    messages = [f"{_dotted(e['loc'])}: {e['msg']}" for e in errors]
    return ConfigValidationError("; ".join(messages), errors=messages)


def validate_config(data) -> RunConfig:
    """Validate an already decoded mapping"""
    if not isinstance(data, dict):
        raise ConfigParseError(f"configuration must be an object, got {type(data).__name__}")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise _convert(e) from e
    except DomainError as e:
        raise ConfigValidationError(e.message, **e.details) from e


def parse_config(text: str, fmt: str = "json") -> RunConfig:
    """Parse and validate a configuration document.

    Raises:
        ConfigParseError: malformed text, a non-object document, or unknown keys.
        ConfigValidationError: a value breaks a constraint; the message names the field.
    """
    try:
        if fmt == "json":
            data = json.loads(text)
        elif fmt == "yaml":
            data = yaml.safe_load(text)
        else:
            raise ConfigParseError(f"unsupported configuration format: {fmt}")
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigParseError(f"malformed {fmt} configuration: {e}") from e
    return validate_config(data)


def load_config(path: Path) -> RunConfig:
    """Read a configuration file; ``.yaml``/``.yml`` are YAML, anything else JSON"""
    path = Path(path)
    fmt = "yaml" if path.suffix.lower() in (".yaml", ".yml") else "json"
    text = path.read_text(encoding="utf-8")
    logger.info(f"Loaded {fmt} configuration from {path}")
    return parse_config(text, fmt)


def apply_overrides(
    config: RunConfig,
    seed: Optional[int] = None,
    samples: Optional[int] = None,
    out: Optional[Path] = None,
    formats: Optional[List[str]] = None,
) -> RunConfig:
    """Apply command-line overrides and the output-directory environment variable.

    Precedence for the output directory is flag, then environment, then file.
    The result is validated again.
    """
    data = config.model_dump(mode="json")
    if seed is not None:
        data["seed"] = seed
    if samples is not None:
        data["samples"] = samples
    if out is not None:
        data["output"]["directory"] = str(out)
    elif os.environ.get(OUTPUT_DIR_ENV):
        data["output"]["directory"] = os.environ[OUTPUT_DIR_ENV]
    if formats is not None:
        data["output"]["formats"] = formats
    return validate_config(data)

"""
Settings
config.yaml parsed into pydantic models, with environment overrides
"""

import os
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from dotenv import load_dotenv
from loguru import logger
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from core.errors import InstanceError

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "config.yaml"

MONTE_CARLO_COMMANDS = frozenset({"np4", "birthday"})


class ArithmeticSettings(BaseModel):
    mode: str = "rational"
    float_tolerance: float = 1e-9

    @field_validator("mode")
    @classmethod
    def _known_mode(cls, value: str) -> str:
        if value not in ("rational", "float"):
            raise ValueError(f"mode must be rational or float, got {value!r}")
        return value


class SimulationSettings(BaseModel):
    workers: int = Field(1, ge=1, le=256)
    permutation_width_cap: int = Field(20, ge=1, le=30)
    matrix_witness_cap: int = Field(12, ge=1, le=16)


class SepvalSettings(BaseModel):
    grid: int = Field(64, ge=2)
    lattice: int = Field(40, ge=2)
    restarts: int = Field(20, ge=1)
    tolerance: float = Field(1e-4, gt=0)


class ProtocolSettings(BaseModel):
    c_prod: str = "1/3"
    lambda_bits: int = Field(8, ge=1, le=32)
    dummy_bits: int = Field(8, ge=1, le=16)

    @property
    def c_prod_fraction(self) -> Fraction:
        return Fraction(self.c_prod)


class NpcertSettings(BaseModel):
    paninski_constant: float = Field(19.0, gt=0)
    uniformity_delta: str = "1/2"
    trials: int = Field(10_000, ge=1)
    confidence: float = Field(0.99, gt=0, lt=1)
    exact_branch_cap: int = Field(10 ** 6, ge=1)
    minimize_restarts: int = Field(32, ge=0)
    minimize_grid: int = Field(4, ge=1)


class RectClosureSettings(BaseModel):
    max_ell: int = Field(10, ge=1, le=10)
    max_r: int = Field(10, ge=0, le=10)


class SosSettings(BaseModel):
    epsilon: float = Field(0.2, gt=0, lt=1)


class CleanccSettings(BaseModel):
    sweep_n: int = Field(3, ge=1, le=3)
    sweep_dG: int = Field(2, ge=0, le=3)


class SuiteSettings(BaseModel):
    seed: int = 20240101
    random_verifiers: int = Field(50, ge=1)
    random_pairs: int = Field(50, ge=1)
    random_states: int = Field(100, ge=1)
    np4_vertices: int = Field(400, ge=2)
    np4_trials: int = Field(10_000, ge=1)
    birthday_trials: int = Field(100_000, ge=1)
    rect_random_instances: int = Field(20, ge=1)
    sos_pairs: int = Field(100, ge=1)
    criteria: List[str] = Field(default_factory=lambda: [
        "multiplicativity", "branch_overlap", "product_test", "symmetric_projector", "protocol5",
        "protocol4", "birthday", "rect", "cleancc", "sos", "conjunction",
    ])


class LoggingSettings(BaseModel):
    level: str = "INFO"
    file: str = "./data/logs/stoqlab.log"


class Settings(BaseModel):
    name: str = "stoqlab"
    version: str = "1.0.0"
    arithmetic: ArithmeticSettings = Field(default_factory=ArithmeticSettings)
    simulation: SimulationSettings = Field(default_factory=SimulationSettings)
    sepval: SepvalSettings = Field(default_factory=SepvalSettings)
    protocols: ProtocolSettings = Field(default_factory=ProtocolSettings)
    npcert: NpcertSettings = Field(default_factory=NpcertSettings)
    rectclosure: RectClosureSettings = Field(default_factory=RectClosureSettings)
    sos: SosSettings = Field(default_factory=SosSettings)
    cleancc: CleanccSettings = Field(default_factory=CleanccSettings)
    suite: SuiteSettings = Field(default_factory=SuiteSettings)
    logging: LoggingSettings = Field(default_factory=LoggingSettings)


def _apply_environment(raw: Dict[str, Any]) -> Dict[str, Any]:
    """STOQLAB_WORKERS, STOQLAB_MODE and LOG_LEVEL win over the file"""
    overrides = {
        ("simulation", "workers"): os.getenv("STOQLAB_WORKERS"),
        ("arithmetic", "mode"): os.getenv("STOQLAB_MODE"),
        ("logging", "level"): os.getenv("LOG_LEVEL"),
    }
    for (section, key), value in overrides.items():
        if value:
            raw.setdefault(section, {})[key] = value
    return raw


def load_settings(config_path: Optional[str] = None) -> Settings:
    """
    Read config.yaml (or STOQLAB_CONFIG) into Settings

    Raises:
        InstanceError: unreadable file or values outside their ranges
    """
    load_dotenv()
    path = Path(config_path or os.getenv("STOQLAB_CONFIG") or DEFAULT_CONFIG_PATH)
    raw: Dict[str, Any] = {}
    if path.exists():
        try:
            with open(path, "r") as f:
                raw = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise InstanceError(f"config {path} is not valid YAML: {e}")
    else:
        logger.warning(f"[Settings] {path} not found, using defaults")
    try:
        settings = Settings(**_apply_environment(raw))
    except ValidationError as e:
        raise InstanceError(f"invalid configuration in {path}: {e}")
    logger.debug(f"[Settings] loaded {path}: mode={settings.arithmetic.mode}, workers={settings.simulation.workers}")
    return settings


_settings: Optional[Settings] = None


def get_settings(config_path: Optional[str] = None) -> Settings:
    """Get or create the process-wide settings"""
    global _settings
    if _settings is None or config_path is not None:
        _settings = load_settings(config_path)
    return _settings


def reset_settings() -> None:
    global _settings
    _settings = None


class ExperimentConfig(BaseModel):
    """One CLI invocation, validated before anything runs"""
    subcommand: str
    instance: Optional[str] = None
    paths: Dict[str, str] = Field(default_factory=dict)
    gamma: Optional[float] = Field(None, gt=0, lt=1)
    delta: Optional[float] = Field(None, gt=0, le=1)
    epsilon: Optional[float] = Field(None, gt=0, lt=1)
    K: Optional[int] = Field(None, ge=1)
    trials: Optional[int] = Field(None, ge=1)
    rounds: Optional[int] = Field(None, ge=1)
    seed: Optional[int] = Field(None, ge=0)
    workers: int = Field(1, ge=1, le=256)
    mode: str = "rational"
    out: Optional[str] = None
    csv: Optional[str] = None
    knobs: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("mode")
    @classmethod
    def _known_mode(cls, value: str) -> str:
        if value not in ("rational", "float"):
            raise ValueError(f"mode must be rational or float, got {value!r}")
        return value

    @model_validator(mode="after")
    def _seed_for_monte_carlo(self) -> "ExperimentConfig":
        if self.subcommand in MONTE_CARLO_COMMANDS and self.seed is None:
            raise ValueError(f"'{self.subcommand}' samples at random and needs --seed")
        return self

    @classmethod
    def create(cls, **fields: Any) -> "ExperimentConfig":
        try:
            return cls(**fields)
        except ValidationError as e:
            raise InstanceError(f"invalid {fields.get('subcommand', 'experiment')} arguments: {e}")

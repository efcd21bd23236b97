"""
Runtime settings, optionally overridden from a YAML file.
"""

from pathlib import Path

import yaml
from pydantic import BaseModel, ConfigDict, Field

from app.domain.sparse_recovery import SolverConfig
from app.domain.value_objects import SolverKind


class SolverSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    residual_tol: float = Field(1e-6, gt=0)
    convergence_tol: float = Field(1e-9, gt=0)
    max_sparsity: int | None = Field(None, ge=1)
    max_iterations: int | None = Field(None, ge=1)
    attempt_every: int = Field(1, ge=1)
    kind: SolverKind = SolverKind.OMP

    def to_config(self) -> SolverConfig:
        return SolverConfig(**self.model_dump())


class SessionSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    recv_timeout_s: float = Field(5.0, gt=0)


class BloomSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    universe_max: int = Field(1 << 20, ge=1, le=1 << 26)
    bits_per_element: int = Field(10, ge=1)


class HarnessSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    long_run_n: int = Field(200, ge=1, description="Larger n needs --allow-long")
    base_seed: int = Field(0, ge=0, lt=1 << 64)


class Settings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    solver: SolverSettings = Field(default_factory=SolverSettings)
    session: SessionSettings = Field(default_factory=SessionSettings)
    bloom: BloomSettings = Field(default_factory=BloomSettings)
    harness: HarnessSettings = Field(default_factory=HarnessSettings)


def load_settings(path: str | Path | None = None) -> Settings:
    """Defaults, overlaid with the mapping in `path` when given."""
    if path is None:
        return Settings()
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: top level must be a mapping")
    return Settings.model_validate(raw)

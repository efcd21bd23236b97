"""
DTOs - requests and records exchanged by the harness, CLI and HTTP API.
"""

from typing import Any

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.domain.value_objects import DBound, ProtocolName, SolverKind, TransportName


class TrialRecordDTO(BaseModel):
    """DTO - one benchmark trial, one CSV row."""
    protocol: ProtocolName
    n: int = Field(..., ge=1)
    k: int = Field(..., ge=2)
    d: int = Field(..., ge=0)
    trial: int = Field(..., ge=0, description="Trial index within its (protocol, d) cell")
    scalars_sent: int = Field(..., ge=0, description="64-bit scalars sent A to B")
    rows_used: int | None = Field(None, ge=0, description="Measurement rows, cs-iblt only")
    rounds: int = Field(1, ge=1)
    success: bool = Field(..., description="Oracle comparison, not the protocol's claim")
    wall_ms: float = Field(0.0, ge=0)

    def to_row(self) -> dict[str, Any]:
        return self.model_dump(mode="json")


class TrialRequestDTO(BaseModel):
    """DTO - run a single trial."""
    n: int = Field(..., ge=1, description="Upper bound on set sizes")
    k: int = Field(2, ge=2, description="Hash functions per element")
    d: int = Field(..., ge=0, description="Total difference size")
    seed: int = Field(0, ge=0, lt=1 << 64)
    protocol: ProtocolName = ProtocolName.CS_IBLT
    transport: TransportName = TransportName.INPROC
    solver: SolverKind = SolverKind.OMP

    model_config = ConfigDict(json_schema_extra={
        "example": {"n": 7, "k": 2, "d": 2, "seed": 1, "protocol": "cs-iblt", "transport": "inproc"}
    })

    @model_validator(mode="after")
    def _d_within_n(self) -> "TrialRequestDTO":
        if self.d > self.n:
            raise ValueError(f"d={self.d} exceeds n={self.n}")
        return self


class NegotiateRequestDTO(BaseModel):
    """DTO - session parameter negotiation."""
    n: int = Field(..., ge=1)
    k: int = Field(2, ge=2)
    d_bound: DBound = DBound.AT_MOST_N
    matrix_seed: int = Field(0, ge=0, lt=1 << 64)
    hash_seed: int = Field(0, ge=0, lt=1 << 64)


class SessionParamsDTO(BaseModel):
    """DTO - the Hello a sender would emit."""
    version: int
    n: int
    k: int
    b: int
    matrix_seed: int
    hash_seed: int
    d_bound: DBound

    model_config = ConfigDict(from_attributes=True)


class SweepRequestDTO(BaseModel):
    """DTO - a benchmark sweep over d."""
    n: int = Field(..., ge=1)
    k: int = Field(2, ge=2)
    d_min: int = Field(0, ge=0)
    d_max: int = Field(..., ge=0)
    d_step: int = Field(1, ge=1)
    trials: int = Field(1, ge=0)
    protocols: list[ProtocolName] = Field(
        default_factory=lambda: [ProtocolName.CS_IBLT, ProtocolName.IBLT_GUESS, ProtocolName.NAIVE]
    )
    jobs: int = Field(1, ge=1)
    allow_long: bool = False

    @model_validator(mode="after")
    def _d_range(self) -> "SweepRequestDTO":
        if self.d_max > self.n:
            raise ValueError(f"d_max={self.d_max} exceeds n={self.n}")
        return self

    def d_values(self) -> list[int]:
        """Empty when d_min > d_max."""
        return list(range(self.d_min, self.d_max + 1, self.d_step))

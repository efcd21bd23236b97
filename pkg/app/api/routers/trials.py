"""
API Routers - session negotiation and single benchmark trials.
"""

from fastapi import APIRouter, Depends

from app.application.dto.reconcile_dto import (
    NegotiateRequestDTO,
    SessionParamsDTO,
    TrialRecordDTO,
    TrialRequestDTO,
)
from app.application.harness import gen_instance, run_trial, universe_for
from app.core.config import Settings
from app.domain.exceptions import InvalidParametersError
from app.domain.protocol import hello_for, negotiate

router = APIRouter(prefix="/api/v1", tags=["Reconciliation"])

_settings = Settings()


def get_settings() -> Settings:
    return _settings


@router.post("/sessions/negotiate", response_model=SessionParamsDTO)
def negotiate_session(request: NegotiateRequestDTO):
    """Table length and seeds a sender would announce in its Hello."""
    params = negotiate(
        request.n, request.k, request.d_bound, seeds=(request.matrix_seed, request.hash_seed)
    )
    return SessionParamsDTO.model_validate(hello_for(params))


@router.post("/trials", response_model=TrialRecordDTO)
def create_trial(request: TrialRequestDTO, settings: Settings = Depends(get_settings)):
    """Generate an instance from the seed and run one protocol on it."""
    if request.n > settings.harness.long_run_n:
        raise InvalidParametersError(
            f"n={request.n} exceeds {settings.harness.long_run_n}; run larger trials from the CLI"
        )
    settings = settings.model_copy(
        update={"solver": settings.solver.model_copy(update={"kind": request.solver})}
    )
    universe = universe_for([request.protocol], settings)
    instance = gen_instance(request.n, request.d, request.seed, universe)
    return run_trial(instance, request.protocol, request.k, request.transport, settings)

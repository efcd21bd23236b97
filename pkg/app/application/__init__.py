"""Application layer - Use cases and DTOs."""

from app.application.dto.reconcile_dto import (
    NegotiateRequestDTO,
    SessionParamsDTO,
    SweepRequestDTO,
    TrialRecordDTO,
    TrialRequestDTO,
)
from app.application.harness import (
    Instance,
    gen_instance,
    run_trial,
    sweep,
    worked_example_instance,
)

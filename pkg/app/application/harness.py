"""
Benchmark use cases: instance generation, single trials and d-sweeps.

Every trial is scored against the brute-force difference of its instance,
never against the protocol's own claim.
"""

import logging
import math
import time
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.stats import spearmanr

from app.application.dto.reconcile_dto import SweepRequestDTO, TrialRecordDTO
from app.core.config import Settings
from app.domain.baselines import (
    bloom_reconcile,
    iblt_guess_reconcile,
    iblt_oracle_reconcile,
    naive_reconcile,
)
from app.domain.cs_encode import matrix_rows
from app.domain.exceptions import (
    InfeasibleParametersError,
    InvalidParametersError,
    NoConvergenceError,
)
from app.domain.hashing import derive_seed
from app.domain.protocol import ReconcileOutcome, apply_reconciliation, negotiate
from app.domain.sparse_recovery import SolverConfig, quantize, solve_l1
from app.domain.value_objects import (
    ELEMENT_MAX,
    DBound,
    Element,
    MatrixSpec,
    ProtocolName,
    SessionParams,
    TransportName,
)
from app.infrastructure.results import write_results
from app.infrastructure.session_runner import run_inproc_session, run_tcp_session

logger = logging.getLogger(__name__)

UNIVERSE_MAX = ELEMENT_MAX - 1

# seed labels so each consumer of a trial seed draws an independent stream
_MATRIX_LABEL = 1
_HASH_LABEL = 2
_BASELINE_LABEL = 3


@dataclass(frozen=True)
class Instance:
    s_a: frozenset[Element]
    s_b: frozenset[Element]
    n: int
    d: int
    rng_seed: int

    @cached_property
    def delta_a(self) -> frozenset[Element]:
        return self.s_a - self.s_b

    @cached_property
    def delta_b(self) -> frozenset[Element]:
        return self.s_b - self.s_a


def gen_instance(
    n: int,
    d: int,
    rng_seed: int,
    universe_max: int = UNIVERSE_MAX,
    skew: int | None = None,
) -> Instance:
    """
    Two sets sharing all but d elements, drawn without replacement from
    [1, universe_max]. |Delta_A| = ceil(d/2) unless `skew` fixes it. The host
    with the larger difference holds exactly n elements.
    """
    if n < 1 or not 0 <= d <= n:
        raise InfeasibleParametersError(f"Need n >= 1 and 0 <= d <= n, got n={n}, d={d}")
    if not 1 <= universe_max <= UNIVERSE_MAX:
        raise InfeasibleParametersError(f"universe_max must lie in [1, 2^32), got {universe_max}")
    only_a = math.ceil(d / 2) if skew is None else skew
    if not 0 <= only_a <= d:
        raise InfeasibleParametersError(f"skew must lie in [0, {d}], got {skew}")
    only_b = d - only_a
    common = n - max(only_a, only_b)
    total = common + only_a + only_b
    if total > universe_max:
        raise InfeasibleParametersError(
            f"{total} distinct elements do not fit in [1, {universe_max}]"
        )

    rng = np.random.default_rng(rng_seed)
    drawn = [Element(int(v) + 1) for v in rng.choice(universe_max, size=total, replace=False)]
    shared = drawn[:common]
    s_a = frozenset(shared + drawn[common:common + only_a])
    s_b = frozenset(shared + drawn[common + only_a:])
    return Instance(s_a=s_a, s_b=s_b, n=n, d=d, rng_seed=rng_seed)


def worked_example_instance(rng_seed: int = 0) -> Instance:
    """S_A = {1..7}, S_B = {2..8}: Delta_A = {1}, Delta_B = {8}."""
    return Instance(
        s_a=frozenset(Element(e) for e in range(1, 8)),
        s_b=frozenset(Element(e) for e in range(2, 9)),
        n=7,
        d=2,
        rng_seed=rng_seed,
    )


def session_params_for(instance: Instance, k: int) -> SessionParams:
    """Session parameters both hosts derive from the instance seed."""
    seed = instance.rng_seed
    return negotiate(
        instance.n,
        k,
        DBound.AT_MOST_N,
        seeds=(derive_seed(seed, _MATRIX_LABEL), derive_seed(seed, _HASH_LABEL)),
    )


def _oracle_success(instance: Instance, outcome: ReconcileOutcome) -> bool:
    if not outcome.success:
        return False
    if outcome.delta_a != instance.delta_a or outcome.delta_b != instance.delta_b:
        return False
    return apply_reconciliation(instance.s_b, outcome.delta_a, outcome.delta_b) == instance.s_a


def _execute(
    instance: Instance,
    protocol: ProtocolName,
    k: int,
    transport: TransportName,
    settings: Settings,
) -> ReconcileOutcome:
    seed = instance.rng_seed
    if protocol is ProtocolName.CS_IBLT:
        params = session_params_for(instance, k)
        solver = settings.solver.to_config()
        if transport is TransportName.TCP:
            session = run_tcp_session(
                instance.s_a, instance.s_b, params, solver, settings.session.recv_timeout_s
            )
        else:
            session = run_inproc_session(instance.s_a, instance.s_b, params, solver)
        return session.outcome
    baseline_seed = derive_seed(seed, _BASELINE_LABEL)
    if protocol is ProtocolName.IBLT_GUESS:
        return iblt_guess_reconcile(instance.s_a, instance.s_b, instance.n, k, baseline_seed)
    if protocol is ProtocolName.IBLT_ORACLE:
        return iblt_oracle_reconcile(instance.s_a, instance.s_b, k, baseline_seed)
    if protocol is ProtocolName.NAIVE:
        return naive_reconcile(instance.s_a, instance.s_b)
    if protocol is ProtocolName.BLOOM:
        return bloom_reconcile(
            instance.s_a,
            instance.s_b,
            settings.bloom.universe_max,
            settings.bloom.bits_per_element,
            baseline_seed,
        )
    raise InvalidParametersError(f"Unknown protocol {protocol!r}")


def run_trial(
    instance: Instance,
    protocol: ProtocolName | str,
    k: int = 2,
    transport: TransportName | str = TransportName.INPROC,
    settings: Settings | None = None,
    trial: int = 0,
) -> TrialRecordDTO:
    """Run one protocol end to end. Failures of any kind become success=False."""
    protocol = ProtocolName(protocol)
    transport = TransportName(transport)
    settings = settings or Settings()

    started = time.perf_counter()
    try:
        outcome = _execute(instance, protocol, k, transport, settings)
        success = _oracle_success(instance, outcome)
    except (ValueError, OSError) as exc:
        logger.warning("Trial %s n=%d d=%d failed: %s", protocol.value, instance.n, instance.d, exc)
        outcome = ReconcileOutcome()
        success = False
    wall_ms = (time.perf_counter() - started) * 1000.0

    if outcome.success and not success:
        logger.warning(
            "%s claimed success on n=%d d=%d seed=%d but disagrees with the oracle",
            protocol.value, instance.n, instance.d, instance.rng_seed,
        )
    return TrialRecordDTO(
        protocol=protocol,
        n=instance.n,
        k=k,
        d=instance.d,
        trial=trial,
        scalars_sent=outcome.scalars_sent,
        rows_used=outcome.rows_used if protocol is ProtocolName.CS_IBLT else None,
        rounds=outcome.rounds,
        success=success,
        wall_ms=round(wall_ms, 3),
    )


def trial_seed(base_seed: int, n: int, d: int, trial: int) -> int:
    return derive_seed(base_seed, n, d, trial)


def universe_for(protocols: Iterable[ProtocolName], settings: Settings) -> int:
    # the Bloom baseline enumerates the universe, so it caps it for everyone
    if ProtocolName.BLOOM in protocols:
        return settings.bloom.universe_max
    return UNIVERSE_MAX


def _sweep_task(
    task: tuple[ProtocolName, int, int, int, int, int, Settings],
) -> TrialRecordDTO:
    protocol, n, k, d, trial, universe_max, settings = task
    instance = gen_instance(n, d, trial_seed(settings.harness.base_seed, n, d, trial), universe_max)
    return run_trial(instance, protocol, k, TransportName.INPROC, settings, trial)


def sweep(
    request: SweepRequestDTO,
    out_path: str | Path | None = None,
    settings: Settings | None = None,
) -> list[TrialRecordDTO]:
    """
    One record per (protocol, d, trial), in that order. All protocols see the
    same instance for a given (d, trial).
    """
    settings = settings or Settings()
    if request.n > settings.harness.long_run_n and not request.allow_long:
        raise InvalidParametersError(
            f"n={request.n} exceeds {settings.harness.long_run_n}; pass --allow-long to run it"
        )
    universe_max = universe_for(request.protocols, settings)
    tasks = [
        (protocol, request.n, request.k, d, trial, universe_max, settings)
        for protocol in request.protocols
        for d in request.d_values()
        for trial in range(request.trials)
    ]
    logger.info("Sweep of %d trials on %d worker(s)", len(tasks), request.jobs)

    if request.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=request.jobs) as pool:
            records = list(pool.map(_sweep_task, tasks))
    else:
        records = [_sweep_task(task) for task in tasks]

    if out_path is not None:
        write_results((r.to_row() for r in records), out_path)
    return records


def mean_cost(records: Sequence[TrialRecordDTO], protocol: ProtocolName, d: int) -> float:
    costs = [r.scalars_sent for r in records if r.protocol == protocol and r.d == d]
    if not costs:
        raise InvalidParametersError(f"No {protocol.value} records at d={d}")
    return float(np.mean(costs))


def cost_trend(records: Sequence[TrialRecordDTO], protocol: ProtocolName) -> float:
    """Spearman rank correlation between d and the mean scalars_sent at that d."""
    ds = sorted({r.d for r in records if r.protocol == protocol})
    if len(ds) < 2:
        raise InvalidParametersError(f"Need {protocol.value} records at two or more d values")
    rho = spearmanr(ds, [mean_cost(records, protocol, d) for d in ds]).statistic
    return float(rho)


# --- planted sparse recovery ----------------------------------------------


def measurements_for(b: int, s: int, c: float, slack: int = 0) -> int:
    """min(b, ceil(c * s * ln(b / s)) + slack)."""
    if not 1 <= s <= b:
        raise InvalidParametersError(f"Sparsity must lie in [1, {b}], got {s}")
    return min(b, math.ceil(c * s * math.log(b / s)) + slack)


def planted_vector(b: int, s: int, seed: int) -> np.ndarray:
    """Length-b integer vector with s nonzero entries in +-[1, 2^16]."""
    rng = np.random.default_rng(seed)
    x = np.zeros(b, dtype=np.int64)
    support = rng.choice(b, size=s, replace=False)
    x[support] = rng.integers(1, 2**16 + 1, size=s) * rng.choice([-1, 1], size=s)
    return x


def planted_recovery_trial(
    b: int, s: int, m: int, seed: int, cfg: SolverConfig | None = None
) -> bool:
    """Recover a planted s-sparse vector from m rows of Phi."""
    x = planted_vector(b, s, seed)
    phi = matrix_rows(MatrixSpec(seed=derive_seed(seed, _MATRIX_LABEL), b=b), 0, m)
    y = phi @ x.astype(np.float64)
    try:
        x_hat = quantize(solve_l1(phi, y, cfg))
    except NoConvergenceError:
        return False
    return bool(np.array_equal(x_hat, x))


def recovery_rate(
    b: int, s: int, m: int, trials: int, base_seed: int = 0, cfg: SolverConfig | None = None
) -> float:
    hits = sum(
        planted_recovery_trial(b, s, m, derive_seed(base_seed, b, s, m, t), cfg)
        for t in range(trials)
    )
    return hits / trials if trials else 0.0


def empirical_constant(
    b: int,
    s: int,
    trials: int,
    target: float = 0.95,
    grid: Sequence[float] = tuple(c / 4 for c in range(2, 17)),
    base_seed: int = 0,
) -> float | None:
    """Smallest c on the grid whose m = ceil(c s ln(b/s)) recovers at the target rate."""
    for c in grid:
        m = measurements_for(b, s, c)
        if recovery_rate(b, s, m, trials, base_seed) >= target:
            return c
    return None

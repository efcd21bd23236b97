"""
Recovery of the integer difference table from a prefix of measurement rows.

Each IBLT column is solved on its own: greedy orthogonal matching pursuit by
default, an l1 linear program (basis pursuit, HiGHS) on request, and a dense
linear solve once the system is square. Results are rounded to integers and
accepted only if they reproduce the measurements.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .exceptions import DimensionMismatchError, InvalidParametersError, NoConvergenceError
from .iblt import Iblt
from .value_objects import SolverKind

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class SolverConfig:
    """Value Object - solver tolerances and budgets."""
    residual_tol: float = 1e-6
    convergence_tol: float = 1e-9
    max_sparsity: int | None = None     # None: m - 1 while m < b
    max_iterations: int | None = None   # None: the sparsity cap
    attempt_every: int = 1
    kind: SolverKind = SolverKind.OMP

    def __post_init__(self) -> None:
        if self.residual_tol <= 0:
            raise InvalidParametersError(f"residual_tol must be positive: {self.residual_tol}")
        if self.convergence_tol <= 0:
            raise InvalidParametersError(
                f"convergence_tol must be positive: {self.convergence_tol}"
            )
        if self.attempt_every < 1:
            raise InvalidParametersError(f"attempt_every must be >= 1: {self.attempt_every}")
        if self.max_sparsity is not None and self.max_sparsity < 1:
            raise InvalidParametersError(f"max_sparsity must be >= 1: {self.max_sparsity}")


@dataclass
class RecoveryProblem:
    """Regenerated rows 0..m-1 of Phi with the two difference measurement columns."""
    phi_rows: np.ndarray
    y_sum: np.ndarray
    y_count: np.ndarray

    @property
    def m(self) -> int:
        return int(self.phi_rows.shape[0])


@dataclass
class RecoveredIblt:
    table: Iblt
    verified: bool


def _scale(y: np.ndarray) -> float:
    return max(1.0, float(np.abs(y).max())) if y.size else 1.0


def _exact_solve(phi: np.ndarray, y: np.ndarray) -> np.ndarray:
    try:
        x = np.linalg.solve(phi, y)
        # one step of iterative refinement
        x += np.linalg.solve(phi, y - phi @ x)
    except np.linalg.LinAlgError as exc:
        raise NoConvergenceError(f"Square system is singular: {exc}") from exc
    return x


def _omp(phi: np.ndarray, y: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    m, b = phi.shape
    cap = cfg.max_sparsity if cfg.max_sparsity is not None else m - 1
    cap = max(1, min(cap, m, b))
    budget = min(cap, cfg.max_iterations) if cfg.max_iterations is not None else cap
    tol = cfg.convergence_tol * max(1.0, float(np.linalg.norm(y)))

    norms = np.linalg.norm(phi, axis=0)
    norms[norms == 0.0] = 1.0
    basis = np.zeros((m, budget), dtype=np.float64)
    support: list[int] = []
    residual = y.astype(np.float64, copy=True)

    while np.linalg.norm(residual) > tol:
        if len(support) >= budget:
            raise NoConvergenceError(
                f"OMP reached {len(support)} atoms with residual "
                f"{np.linalg.norm(residual):.3e} > {tol:.3e}"
            )
        corr = np.abs(phi.T @ residual) / norms
        corr[support] = -1.0
        j = int(np.argmax(corr))
        q = phi[:, j].copy()
        active = basis[:, : len(support)]
        for _ in range(2):
            q -= active @ (active.T @ q)
        q_norm = float(np.linalg.norm(q))
        if q_norm <= 1e-12 * norms[j]:
            raise NoConvergenceError(f"Column {j} is dependent on the active set")
        q /= q_norm
        basis[:, len(support)] = q
        support.append(j)
        residual -= q * float(q @ residual)

    x = np.zeros(b, dtype=np.float64)
    if support:
        coef, *_ = np.linalg.lstsq(phi[:, support], y, rcond=None)
        x[support] = coef
    return x


def _basis_pursuit(phi: np.ndarray, y: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    m, b = phi.shape
    scale = _scale(y)
    options = {"primal_feasibility_tolerance": 1e-9, "dual_feasibility_tolerance": 1e-9}
    if cfg.max_iterations is not None:
        options["maxiter"] = cfg.max_iterations
    result = linprog(
        c=np.ones(2 * b),
        A_eq=np.hstack([phi, -phi]),
        b_eq=y / scale,
        bounds=(0, None),
        method="highs",
        options=options,
    )
    if result.status != 0:
        raise NoConvergenceError(f"Basis pursuit failed: {result.message}")
    z = result.x
    return (z[:b] - z[b:]) * scale


def solve_l1(phi: np.ndarray, y: np.ndarray, cfg: SolverConfig | None = None) -> np.ndarray:
    """Sparse x with phi @ x ~= y; exact when phi is square."""
    cfg = cfg or SolverConfig()
    phi = np.atleast_2d(np.asarray(phi, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    m, b = phi.shape
    if m < 1:
        raise InvalidParametersError("solve_l1 needs at least one measurement")
    if y.shape != (m,):
        raise DimensionMismatchError(f"y has shape {y.shape}, expected ({m},)")
    if not y.any():
        return np.zeros(b, dtype=np.float64)
    if m >= b:
        return _exact_solve(phi[:b], y[:b])
    if cfg.kind is SolverKind.BASIS_PURSUIT:
        return _basis_pursuit(phi, y, cfg)
    return _omp(phi, y, cfg)


def quantize(x: np.ndarray) -> np.ndarray:
    """Round half away from zero."""
    x = np.asarray(x, dtype=np.float64)
    return (np.sign(x) * np.floor(np.abs(x) + 0.5)).astype(np.int64)


def residual_ok(phi: np.ndarray, x_int: np.ndarray, y: np.ndarray, tol: float) -> bool:
    if y.size == 0:
        return True
    err = np.abs(phi @ x_int.astype(np.float64) - y).max()
    return bool(err <= tol * _scale(y))


def recover_difference(
    problem: RecoveryProblem,
    table_params: tuple[int, int, int],
    cfg: SolverConfig | None = None,
) -> RecoveredIblt:
    cfg = cfg or SolverConfig()
    b, k, seed = table_params
    m = problem.m
    if problem.phi_rows.ndim != 2 or problem.phi_rows.shape[1] != b:
        raise DimensionMismatchError(
            f"Rows of width {problem.phi_rows.shape[-1]} for a table of length {b}"
        )
    if problem.y_sum.shape != (m,) or problem.y_count.shape != (m,):
        raise DimensionMismatchError("Measurement columns do not match the row count")

    table = Iblt(b, k, seed)
    if m == 0:
        return RecoveredIblt(table=table, verified=True)

    # count column first: flat +-1 amplitudes make it the harder of the two
    columns: dict[str, np.ndarray] = {}
    for name, y in (("counts", problem.y_count), ("sums", problem.y_sum)):
        try:
            x_int = quantize(solve_l1(problem.phi_rows, y, cfg))
        except NoConvergenceError as exc:
            logger.debug("Recovery of %s column at m=%d did not converge: %s", name, m, exc)
            return RecoveredIblt(table=table, verified=False)
        if not residual_ok(problem.phi_rows, x_int, y, cfg.residual_tol):
            logger.debug("Recovery of %s column at m=%d failed the residual check", name, m)
            return RecoveredIblt(table=table, verified=False)
        columns[name] = x_int

    table.sums = columns["sums"]
    table.counts = columns["counts"]
    return RecoveredIblt(table=table, verified=True)

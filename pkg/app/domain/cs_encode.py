"""
Seeded Gaussian measurement matrix and the row-by-row encoding y = Phi . IBLT.

Row i of Phi is generated from a Philox-4x64 counter generator keyed by
(seed << 64) | i, so any row can be regenerated on either host without
transmitting Phi. Each pair of raw 64-bit words (w1, w2) becomes two N(0, 1)
samples by Box-Muller:

    u1 = ((w1 >> 11) + 1) * 2^-53        in (0, 1]
    u2 = (w2 >> 11) * 2^-53              in [0, 1)
    z1, z2 = sqrt(-2 ln u1) * (cos, sin)(2 pi u2)

Entries are not normalised by 1/m: m grows during a session and exact
integer recovery does not depend on the scale.
"""

import numpy as np

from .exceptions import DimensionMismatchError, RowBudgetExceededError
from .iblt import Iblt
from .value_objects import MatrixSpec, MeasurementRow

_TWO_POW_MINUS_53 = 2.0 ** -53


def _check_row(spec: MatrixSpec, i: int) -> None:
    if not 0 <= i < spec.row_budget:
        raise RowBudgetExceededError(
            f"Row {i} outside the budget of {spec.row_budget} rows"
        )


def gaussian_row(seed: int, i: int, width: int) -> np.ndarray:
    pairs = (width + 1) // 2
    bitgen = np.random.Philox(key=(seed << 64) | i)
    raw = bitgen.random_raw(2 * pairs)
    u1 = ((raw[0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * _TWO_POW_MINUS_53
    u2 = (raw[1::2] >> np.uint64(11)).astype(np.float64) * _TWO_POW_MINUS_53
    radius = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    out = np.empty(2 * pairs, dtype=np.float64)
    out[0::2] = radius * np.cos(theta)
    out[1::2] = radius * np.sin(theta)
    return out[:width]


def matrix_row(spec: MatrixSpec, i: int) -> np.ndarray:
    _check_row(spec, i)
    return gaussian_row(spec.seed, i, spec.b)


def matrix_rows(spec: MatrixSpec, start: int, stop: int) -> np.ndarray:
    """Rows start..stop-1 stacked into a (stop - start) x b array."""
    if stop <= start:
        return np.empty((0, spec.b), dtype=np.float64)
    _check_row(spec, start)
    _check_row(spec, stop - 1)
    return np.vstack([gaussian_row(spec.seed, i, spec.b) for i in range(start, stop)])


def encode_with_row(iblt: Iblt, phi_row: np.ndarray, i: int) -> MeasurementRow:
    y_sum = float(np.dot(phi_row, iblt.sums.astype(np.float64)))
    y_count = float(np.dot(phi_row, iblt.counts.astype(np.float64)))
    return MeasurementRow(index=i, y_sum=y_sum, y_count=y_count)


def encode_row(iblt: Iblt, spec: MatrixSpec, i: int) -> MeasurementRow:
    if spec.b != iblt.b:
        raise DimensionMismatchError(
            f"Matrix width {spec.b} does not match IBLT length {iblt.b}"
        )
    return encode_with_row(iblt, matrix_row(spec, i), i)


def encode_prefix(iblt: Iblt, spec: MatrixSpec, m: int) -> list[MeasurementRow]:
    if m > spec.row_budget:
        raise RowBudgetExceededError(f"Prefix of {m} rows exceeds {spec.row_budget}")
    return [encode_row(iblt, spec, i) for i in range(m)]

"""
Benchmark result files: the fixed-schema CSV and the cost-curve SVG.
"""

import logging
from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import Any

import matplotlib
import pandas as pd

matplotlib.use("Agg")
from matplotlib.figure import Figure  # noqa: E402

from app.domain.exceptions import MalformedCsvError  # noqa: E402

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "protocol", "n", "k", "d", "trial",
    "scalars_sent", "rows_used", "rounds", "success", "wall_ms",
]
_INT_COLUMNS = ["n", "k", "d", "trial", "scalars_sent", "rounds"]

# Fixed hash salt and no date metadata keep repeated renders byte-identical.
_SVG_RC = {"svg.hashsalt": "csiblt", "svg.fonttype": "none"}


def records_frame(records: Iterable[Mapping[str, Any]]) -> pd.DataFrame:
    frame = pd.DataFrame.from_records(list(records), columns=CSV_COLUMNS)
    frame["rows_used"] = frame["rows_used"].astype("Int64")
    return frame


def write_results(records: Iterable[Mapping[str, Any]], path: str | Path) -> Path:
    """Write trial records in CSV_COLUMNS order. No records gives a header-only file."""
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    frame = records_frame(records)
    frame["success"] = frame["success"].map(lambda v: "true" if v else "false")
    frame.to_csv(path, index=False, float_format="%.3f")
    logger.info("Wrote %d trial records to %s", len(frame), path)
    return path


def read_results(path: str | Path) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype={"protocol": str, "success": str})
    except pd.errors.EmptyDataError as exc:
        raise MalformedCsvError(f"{path} is empty") from exc
    except pd.errors.ParserError as exc:
        raise MalformedCsvError(f"{path} is not valid CSV: {exc}") from exc

    if list(frame.columns) != CSV_COLUMNS:
        raise MalformedCsvError(
            f"{path} has columns {list(frame.columns)}, expected {CSV_COLUMNS}"
        )
    try:
        for column in _INT_COLUMNS:
            frame[column] = pd.to_numeric(frame[column], errors="raise").astype("int64")
        frame["rows_used"] = pd.to_numeric(frame["rows_used"], errors="raise").astype("Int64")
        frame["wall_ms"] = pd.to_numeric(frame["wall_ms"], errors="raise").astype("float64")
    except (ValueError, TypeError) as exc:
        raise MalformedCsvError(f"{path} has a non-numeric field: {exc}") from exc

    flags = frame["success"].str.lower()
    if not flags.isin(["true", "false"]).all():
        raise MalformedCsvError(f"{path} has success values other than true/false")
    frame["success"] = flags == "true"
    return frame


def mean_cost_curves(frame: pd.DataFrame) -> pd.DataFrame:
    """Mean scalars_sent per (protocol, d), sorted for plotting."""
    return (
        frame.groupby(["protocol", "d"], sort=True)["scalars_sent"]
        .mean()
        .reset_index()
    )


def plot_results(csv_path: str | Path, out_path: str | Path) -> Path:
    """One line of mean scalars_sent against d per protocol, as SVG."""
    frame = read_results(csv_path)
    curves = mean_cost_curves(frame)
    out_path = Path(out_path)

    with matplotlib.rc_context(_SVG_RC):
        fig = Figure(figsize=(8, 5))
        ax = fig.add_subplot()
        for protocol, subset in curves.groupby("protocol", sort=True):
            ax.plot(subset["d"], subset["scalars_sent"], marker="o", label=str(protocol))
        if not frame.empty:
            ax.set_title(f"Communication cost, n={frame['n'].iloc[0]}, k={frame['k'].iloc[0]}")
        ax.set_xlabel("difference size d")
        ax.set_ylabel("mean scalars sent (64-bit units)")
        ax.grid(True, alpha=0.2)
        if not curves.empty:
            ax.legend()
        fig.tight_layout()
        fig.savefig(out_path, format="svg", metadata={"Date": None})
    logger.info("Plotted %d protocols to %s", curves["protocol"].nunique(), out_path)
    return out_path

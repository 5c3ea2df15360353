"""CSV writers: header row, ``.`` decimals, 10 significant digits, ``\\n`` line ends."""

from __future__ import annotations

import csv
import io
from typing import Iterable, Sequence

from .regions import PhaseCell, RateRegion
from .sim import BatchResult

__all__ = ["fmt", "to_csv", "write_csv", "region_rows", "phase_rows", "sim_row",
           "region_header", "PHASE_HEADER", "SIM_HEADER"]

PHASE_HEADER = ["rho1", "rho2", "fdf_sep_opt", "cdf_opt"]
SIM_HEADER = ["scheme", "L", "field", "n", "trials", "rate_tuple", "p_e", "ci_low", "ci_high",
              "relay_err", "user_err", "seed"]


def region_header(L: int = 2) -> list:
    return ["region_name", "param_or_vertex_index"] + [f"R{i + 1}" for i in range(L)]


def fmt(x) -> str:
    """Numbers to 10 significant digits; negative zero prints as 0."""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, str):
        return x
    v = float(x)
    if v == 0:
        return "0"
    return f"{v:.10g}"


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows) -> str:
    text = to_csv(header, rows)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return text


def region_rows(region: RateRegion, name: str = None):
    """One row per boundary vertex, in boundary order."""
    name = region.name if name is None else name
    return [[name, i] + [float(x) for x in v] for i, v in enumerate(region.boundary())]


def phase_rows(cells: Iterable[PhaseCell]):
    return [[float(c.rho1), float(c.rho2), c.fdf_separate_optimal, c.cdf_optimal] for c in cells]


def sim_row(result: BatchResult, L: int, field_name: str, rates: Sequence) -> list:
    lo, hi = result.ci
    return [result.scheme, L, field_name, result.n, result.trials, ";".join(str(r) for r in rates),
            result.p_e, lo, hi, result.relay_rate, result.user_rate, result.seed]

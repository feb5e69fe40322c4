"""Trial reports: per-group rows of per-trial values with a mean column,
rendered as aligned text and as machine-readable records."""
from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Sequence

from ..task import TrialSummary


@dataclass(frozen=True, slots=True)
class ReportGroup:
    label: str
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError(f"group {self.label!r} has no trials")

    @property
    def mean(self) -> float:
        return statistics.fmean(self.values)


@dataclass(frozen=True, slots=True)
class ReportTable:
    title: str
    groups: tuple[ReportGroup, ...]

    def __post_init__(self) -> None:
        if not self.groups:
            raise ValueError("report needs at least one group")


def make_table(title: str, groups: Sequence[tuple[str, Sequence[float]]]) -> ReportTable:
    return ReportTable(
        title=title,
        groups=tuple(ReportGroup(label, tuple(v)) for label, v in groups),
    )


def render_table(table: ReportTable, decimals: int = 1) -> str:
    """Aligned '1 2 3 ... Mean' layout, one row per group."""
    n = max(len(g.values) for g in table.groups)
    width = max(7, decimals + 6)
    label_w = max(len(g.label) for g in table.groups) + 2
    header = " " * label_w + "".join(f"{k:>{width}}" for k in range(1, n + 1))
    header += f"{'Mean':>{width}}"
    lines = [table.title, header]
    for g in table.groups:
        row = f"{g.label:<{label_w}}"
        for k in range(n):
            cell = f"{g.values[k]:.{decimals}f}" if k < len(g.values) else "-"
            row += f"{cell:>{width}}"
        row += f"{g.mean:>{width}.{decimals}f}"
        lines.append(row)
    return "\n".join(lines)


def table_records(table: ReportTable) -> list[dict]:
    rows = []
    for g in table.groups:
        rows.append(
            {
                "table": table.title,
                "group": g.label,
                "trials": list(g.values),
                "mean": g.mean,
            }
        )
    return rows


METRICS = (
    ("Completion times for tasks, in seconds", "completion_time_s"),
    ("Mean position errors for tasks, in millimeters", "mean_position_error_mm"),
    ("Mean orientation errors for tasks, in degrees", "mean_orientation_error_deg"),
    ("Non-collision percentage", "non_collision_pct"),
)


def make_report(summaries_by_group: dict[str, Sequence[TrialSummary]]) -> list[ReportTable]:
    """One table per metric, mirroring the per-trial + mean layout."""
    if not summaries_by_group:
        raise ValueError("no summaries to report")
    tables = []
    for title, attr in METRICS:
        groups = [
            (label, [getattr(s, attr) for s in summaries])
            for label, summaries in summaries_by_group.items()
        ]
        tables.append(make_table(title, groups))
    return tables

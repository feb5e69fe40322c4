from .archive import (
    ArchiveVersionError,
    CorruptArchiveError,
    SessionArchive,
    build_archive,
    dump_archive,
    load_archive,
    parse_archive,
    replay_archive,
    save_archive,
    simulation_meta,
)
from .report import ReportGroup, ReportTable, make_report, make_table, render_table, table_records

__all__ = [
    "SessionArchive",
    "CorruptArchiveError",
    "ArchiveVersionError",
    "build_archive",
    "simulation_meta",
    "dump_archive",
    "parse_archive",
    "save_archive",
    "load_archive",
    "replay_archive",
    "ReportGroup",
    "ReportTable",
    "make_table",
    "make_report",
    "render_table",
    "table_records",
]

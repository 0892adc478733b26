"""The three design-time databases consulted by transformation generation."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from .formats import FormatDatabase, load_formats
from .tables import TableSet
from .units import UnitDatabase


def default_formats() -> FormatDatabase:
    """Shipped decompositions for US dates, clock times and SQL datetimes."""
    text = resources.files("medcomp.data").joinpath("default_formats.json").read_text("utf-8")
    return load_formats(text)


@dataclass(frozen=True)
class DataCatalog:
    formats: FormatDatabase = field(default_factory=FormatDatabase)
    units: UnitDatabase = field(default_factory=UnitDatabase)
    tables: TableSet = field(default_factory=TableSet)

"""Static value lookup tables (one-to-one replacement of data values)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable

from .._json import expect_list, expect_object, expect_str, read_document, str_map
from ..errors import LookupMissError, ParseError


@dataclass(frozen=True)
class LookupTable:
    id: str
    entries: dict[str, str] = field(default_factory=dict, hash=False)

    def replace(self, value: str) -> str:
        try:
            return self.entries[value]
        except KeyError:
            raise LookupMissError(f"value {value!r} not found in lookup table {self.id!r}") from None

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.id, "entries": dict(sorted(self.entries.items()))}

    @classmethod
    def from_dict(cls, raw: Any, where: str) -> "LookupTable":
        obj = expect_object(raw, where, allowed={"id", "entries"}, required=("id", "entries"))
        return cls(expect_str(obj["id"], f"{where}.id"), str_map(obj["entries"], f"{where}.entries"))


class TableSet:
    def __init__(self, tables: Iterable[LookupTable] = ()):
        self.tables: dict[str, LookupTable] = {}
        for t in tables:
            if t.id in self.tables:
                raise ParseError(f"duplicate lookup table {t.id!r}")
            self.tables[t.id] = t

    def get(self, table_id: str) -> LookupTable | None:
        return self.tables.get(table_id)

    def __len__(self) -> int:
        return len(self.tables)

    def to_dict(self) -> dict[str, Any]:
        return {"tables": [self.tables[k].to_dict() for k in sorted(self.tables)]}


def load_tables(document: Any) -> TableSet:
    data = expect_object(read_document(document, "lookup tables"), "tables", allowed={"tables"})
    return TableSet(LookupTable.from_dict(t, f"tables[{i}]")
                    for i, t in enumerate(expect_list(data.get("tables", []), "tables")))

"""Unit conversions, stored as one-placeholder arithmetic expressions."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Iterable

from .._json import expect_list, expect_object, expect_str, read_document
from ..errors import NoConversionError, ParseError
from .expr import Expression, inverse_linear, parse_expression


@dataclass(frozen=True)
class UnitConversion:
    from_unit: str
    to_unit: str
    expression: str

    def __post_init__(self) -> None:
        self.parsed  # noqa: B018 - validate eagerly

    @cached_property
    def parsed(self) -> Expression:
        return parse_expression(self.expression)

    @property
    def key(self) -> str:
        return f"{self.from_unit}->{self.to_unit}"

    def to_dict(self) -> dict[str, str]:
        return {"from": self.from_unit, "to": self.to_unit, "expression": self.expression}

    @classmethod
    def from_dict(cls, raw: Any, where: str) -> "UnitConversion":
        obj = expect_object(raw, where, allowed={"from", "to", "expression"},
                            required=("from", "to", "expression"))
        return cls(expect_str(obj["from"], f"{where}.from"), expect_str(obj["to"], f"{where}.to"),
                   expect_str(obj["expression"], f"{where}.expression"))


class UnitDatabase:
    def __init__(self, conversions: Iterable[UnitConversion] = ()):
        self.conversions: dict[tuple[str, str], UnitConversion] = {}
        for c in conversions:
            if (c.from_unit, c.to_unit) in self.conversions:
                raise ParseError(f"duplicate conversion {c.key}")
            self.conversions[(c.from_unit, c.to_unit)] = c

    def find(self, from_unit: str, to_unit: str) -> UnitConversion | None:
        """Direct entry, else the algebraic inverse of a linear reverse entry."""
        direct = self.conversions.get((from_unit, to_unit))
        if direct is not None:
            return direct
        reverse = self.conversions.get((to_unit, from_unit))
        if reverse is None:
            return None
        inverted = inverse_linear(reverse.parsed)
        if inverted is None:
            return None
        return UnitConversion(from_unit, to_unit, inverted.source)

    def __len__(self) -> int:
        return len(self.conversions)

    def __iter__(self):
        return iter(self.conversions[k] for k in sorted(self.conversions))

    def to_dict(self) -> dict[str, Any]:
        return {"conversions": [c.to_dict() for c in self]}


def derive_unit_step(from_unit: str | None, to_unit: str | None,
                     conversions: UnitDatabase) -> UnitConversion | None:
    """Conversion to apply between two unit annotations; None when no step is needed.

    A side without a unit annotation is taken to carry the other side's unit.
    """
    if from_unit is None or to_unit is None or from_unit == to_unit:
        return None
    found = conversions.find(from_unit, to_unit)
    if found is None:
        raise NoConversionError(f"no conversion from {from_unit!r} to {to_unit!r}")
    return found


def load_units(document: Any) -> UnitDatabase:
    data = expect_object(read_document(document, "unit database"), "units", allowed={"conversions"})
    return UnitDatabase(UnitConversion.from_dict(c, f"conversions[{i}]")
                        for i, c in enumerate(expect_list(data.get("conversions", []), "conversions")))

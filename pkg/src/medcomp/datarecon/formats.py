"""Format decompositions: composite values split into parts by regular expressions."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Iterable

from .._json import expect_list, expect_object, expect_str, read_document
from ..errors import ParseError, UnknownFormatError, ValueParseError

_PLACEHOLDER = re.compile(r"\{#([^{}]+)\}")
_NUMBERED_BACKREF = re.compile(r"(?<!\\)(?:\\\\)*\\[1-9]")


@dataclass(frozen=True)
class Part:
    concept: str
    pattern: str


@dataclass(frozen=True)
class FormatDecomposition:
    concept: str
    format: str
    parts: tuple[Part, ...]
    template: str

    def __post_init__(self) -> None:
        where = f"decomposition {self.key}"
        names = [p.concept for p in self.parts]
        if len(set(names)) != len(names):
            raise ParseError("part concepts must be distinct", where)
        used = _PLACEHOLDER.findall(self.template)
        if sorted(used) != sorted(names):
            raise ParseError(f"template placeholders {used} must be exactly the parts {names}", where)
        for p in self.parts:
            try:
                compiled = re.compile(p.pattern)
            except re.error as exc:
                raise ParseError(f"bad pattern for {p.concept!r}: {exc}", where) from None
            if compiled.groups != 1:
                raise ParseError(f"pattern for {p.concept!r} must have exactly one capture group", where)
            if _NUMBERED_BACKREF.search(p.pattern):
                # group numbers shift once parts are concatenated into one regex
                raise ParseError(f"pattern for {p.concept!r} uses a numbered backreference", where)

    @property
    def key(self) -> str:
        return f"{self.concept}@{self.format}"

    @property
    def part_concepts(self) -> tuple[str, ...]:
        return tuple(p.concept for p in self.parts)

    def segments(self) -> list[tuple[str, str]]:
        """Template as [("literal", text) | ("part", concept)], in order."""
        out: list[tuple[str, str]] = []
        pos = 0
        for m in _PLACEHOLDER.finditer(self.template):
            if m.start() > pos:
                out.append(("literal", self.template[pos:m.start()]))
            out.append(("part", m.group(1)))
            pos = m.end()
        if pos < len(self.template):
            out.append(("literal", self.template[pos:]))
        return out

    @cached_property
    def _regex(self) -> re.Pattern[str]:
        patterns = {p.concept: p.pattern for p in self.parts}
        pieces = []
        for kind, text in self.segments():
            # each part pattern keeps its own single group; wrap to isolate alternations
            pieces.append(re.escape(text) if kind == "literal" else f"(?:{patterns[text]})")
        return re.compile("".join(pieces))

    def parse(self, value: str) -> dict[str, str]:
        m = self._regex.fullmatch(value)
        if m is None:
            raise ValueParseError(
                f"value {value!r} does not match format {self.key} (pattern {self._regex.pattern!r})")
        order = [text for kind, text in self.segments() if kind == "part"]
        return dict(zip(order, m.groups()))

    def assemble(self, parts: dict[str, str]) -> str:
        def fill(m: re.Match[str]) -> str:
            return parts[m.group(1)]
        return _PLACEHOLDER.sub(fill, self.template)

    def to_dict(self) -> dict[str, Any]:
        return {
            "composite": {"concept": self.concept, "format": self.format},
            "parts": [{"concept": p.concept, "pattern": p.pattern} for p in self.parts],
            "template": self.template,
        }

    @classmethod
    def from_dict(cls, raw: Any, where: str) -> "FormatDecomposition":
        obj = expect_object(raw, where, allowed={"composite", "parts", "template"},
                            required=("composite", "parts", "template"))
        comp = expect_object(obj["composite"], f"{where}.composite", allowed={"concept", "format"},
                             required=("concept", "format"))
        parts = []
        for i, p in enumerate(expect_list(obj["parts"], f"{where}.parts")):
            po = expect_object(p, f"{where}.parts[{i}]", allowed={"concept", "pattern"},
                               required=("concept", "pattern"))
            parts.append(Part(expect_str(po["concept"], f"{where}.parts[{i}].concept"),
                              expect_str(po["pattern"], f"{where}.parts[{i}].pattern")))
        return cls(
            expect_str(comp["concept"], f"{where}.composite.concept"),
            expect_str(comp["format"], f"{where}.composite.format"),
            tuple(parts),
            expect_str(obj["template"], f"{where}.template"),
        )


class FormatDatabase:
    def __init__(self, decompositions: Iterable[FormatDecomposition] = ()):
        self.decompositions: dict[tuple[str, str], FormatDecomposition] = {}
        for d in decompositions:
            if (d.concept, d.format) in self.decompositions:
                raise ParseError(f"duplicate decomposition {d.key}")
            self.decompositions[(d.concept, d.format)] = d

    def get(self, concept: str, fmt: str | None) -> FormatDecomposition | None:
        if fmt is None:
            return None
        return self.decompositions.get((concept, fmt))

    def require(self, concept: str, fmt: str | None) -> FormatDecomposition:
        d = self.get(concept, fmt)
        if d is None:
            raise UnknownFormatError(f"no decomposition for concept {concept!r} in format {fmt!r}")
        return d

    def __iter__(self):
        return iter(self.decompositions[k] for k in sorted(self.decompositions))

    def __len__(self) -> int:
        return len(self.decompositions)

    def merged(self, other: "FormatDatabase") -> "FormatDatabase":
        """Entries of ``other`` override entries of this database."""
        combined = dict(self.decompositions)
        combined.update(other.decompositions)
        return FormatDatabase(combined.values())

    def to_dict(self) -> dict[str, Any]:
        return {"decompositions": [d.to_dict() for d in self]}


def load_formats(document: Any) -> FormatDatabase:
    data = expect_object(read_document(document, "format database"), "formats",
                         allowed={"decompositions"})
    return FormatDatabase(FormatDecomposition.from_dict(d, f"decompositions[{i}]")
                          for i, d in enumerate(expect_list(data.get("decompositions", []), "decompositions")))

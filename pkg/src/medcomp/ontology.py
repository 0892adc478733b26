"""Lightweight concept taxonomy and degree-of-match reasoner.

Equivalent concepts are collapsed with union-find before the subclass
closure is materialised, so ``Exact`` is a true equivalence relation.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from graphlib import CycleError as _GraphCycle
from graphlib import TopologicalSorter
from typing import Any, Iterable

from ._json import expect_list, expect_object, expect_str, read_document
from .errors import ConfigError, CycleError, ParseError, UnknownConceptError


class Degree(enum.Enum):
    EXACT = "exact"
    PLUGIN = "plugin"
    SUBSUMES = "subsumes"
    FAIL = "fail"

    @property
    def rank(self) -> int:
        """Preference order used for deterministic choices (0 is best)."""
        return _RANK[self]


_RANK = {Degree.EXACT: 0, Degree.PLUGIN: 1, Degree.SUBSUMES: 2, Degree.FAIL: 3}


@dataclass(frozen=True)
class DegreeValues:
    exact: float = 1.0
    plugin: float = 0.8
    subsumes: float = 0.6
    fail: float = 0.0

    def __post_init__(self) -> None:
        if self.fail != 0.0:
            raise ConfigError("the Fail degree value is fixed at 0")
        if not (1.0 >= self.exact >= self.plugin >= self.subsumes > self.fail):
            raise ConfigError(
                "degree values must satisfy 1 >= exact >= plugin >= subsumes > fail = 0"
            )

    def value(self, degree: Degree) -> float:
        return getattr(self, degree.value)


class _UnionFind:
    def __init__(self, items: Iterable[str]):
        self.parent = {x: x for x in items}

    def find(self, x: str) -> str:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # smallest identifier is the representative, for stable output
            lo, hi = sorted((ra, rb))
            self.parent[hi] = lo


def local_name(concept: str) -> str:
    """Fragment after the last '#', '/' or ':' of a URI-like identifier."""
    return re.split(r"[#/:]", concept)[-1] or concept


class Ontology:
    """Immutable taxonomy; build it with :func:`load_ontology` or the constructor."""

    def __init__(
        self,
        concepts: Iterable[str] = (),
        subclass_edges: Iterable[tuple[str, str]] = (),
        equivalences: Iterable[tuple[str, str]] = (),
        labels: dict[str, list[str]] | None = None,
    ):
        self.concepts: frozenset[str] = frozenset(concepts)
        self.subclass_edges: tuple[tuple[str, str], ...] = tuple(
            (c, p) for c, p in subclass_edges
        )
        self.equivalences: tuple[tuple[str, str], ...] = tuple((a, b) for a, b in equivalences)
        self.labels: dict[str, tuple[str, ...]] = {
            c: tuple(ls) for c, ls in (labels or {}).items()
        }

        for pair in (*self.subclass_edges, *self.equivalences):
            for concept in pair:
                self._check(concept)
        for concept in self.labels:
            self._check(concept)

        uf = _UnionFind(sorted(self.concepts))
        for a, b in self.equivalences:
            uf.union(a, b)
        self._rep = {c: uf.find(c) for c in self.concepts}

        parents: dict[str, set[str]] = {r: set() for r in set(self._rep.values())}
        for child, parent in self.subclass_edges:
            rc, rp = self._rep[child], self._rep[parent]
            if rc != rp:
                parents[rc].add(rp)
        try:
            order = list(TopologicalSorter(parents).static_order())
        except _GraphCycle as exc:
            cycle = " -> ".join(exc.args[1]) if len(exc.args) > 1 else "?"
            raise CycleError(f"subsumption cycle: {cycle}") from None

        # parents come before children in static_order
        self._ancestors: dict[str, frozenset[str]] = {}
        for rep in order:
            acc = {rep}
            for p in parents[rep]:
                acc |= self._ancestors[p]
            self._ancestors[rep] = frozenset(acc)

    def _check(self, concept: str) -> None:
        if concept not in self.concepts:
            raise UnknownConceptError(f"unknown concept {concept!r}")

    def __contains__(self, concept: object) -> bool:
        return concept in self.concepts

    def representative(self, concept: str) -> str:
        self._check(concept)
        return self._rep[concept]

    def ancestors(self, concept: str) -> frozenset[str]:
        """Representatives of every concept subsuming ``concept`` (itself included)."""
        return self._ancestors[self.representative(concept)]

    def is_subsumed(self, child: str, parent: str) -> bool:
        self._check(parent)
        return self._rep[parent] in self.ancestors(child)

    def subsumption_pairs(self) -> set[tuple[str, str]]:
        """All non-reflexive (child, parent) pairs of the materialised closure."""
        return {
            (a, b)
            for a in self.concepts
            for b in self.concepts
            if a != b and self.is_subsumed(a, b)
        }

    def degree_of_match(self, requested: str, offered: str) -> Degree:
        req, off = self.representative(requested), self.representative(offered)
        if req == off:
            return Degree.EXACT
        if req in self._ancestors[off]:
            return Degree.PLUGIN
        if off in self._ancestors[req]:
            return Degree.SUBSUMES
        return Degree.FAIL

    def share_proper_ancestor(self, a: str, b: str) -> bool:
        """True when some concept strictly subsumes both ``a`` and ``b``."""
        ra, rb = self.representative(a), self.representative(b)
        common = (self._ancestors[ra] - {ra}) & (self._ancestors[rb] - {rb})
        return bool(common)

    def labels_for(self, concept: str) -> list[str]:
        """Declared labels, or the identifier's local name when none are declared."""
        self._check(concept)
        declared = self.labels.get(concept)
        return list(declared) if declared else [local_name(concept)]

    def to_dict(self) -> dict[str, Any]:
        return {
            "concepts": sorted(self.concepts),
            "subclass_of": [list(e) for e in self.subclass_edges],
            "equivalent": [list(e) for e in self.equivalences],
            "labels": {c: list(v) for c, v in sorted(self.labels.items())},
        }


_KEYS = {"concepts", "subclass_of", "equivalent", "labels"}


def _pairs(raw: Any, where: str) -> list[tuple[str, str]]:
    out = []
    for i, item in enumerate(expect_list(raw, where)):
        if not (isinstance(item, list) and len(item) == 2):
            raise ParseError("expected a [a, b] pair", f"{where}[{i}]")
        out.append((expect_str(item[0], f"{where}[{i}][0]"), expect_str(item[1], f"{where}[{i}][1]")))
    return out


def load_ontology(document: Any) -> Ontology:
    """Parse the ontology JSON format (text, bytes or decoded dict)."""
    data = expect_object(read_document(document, "ontology"), "ontology", allowed=_KEYS)
    concepts = [
        expect_str(c, f"concepts[{i}]")
        for i, c in enumerate(expect_list(data.get("concepts", []), "concepts"))
    ]
    if len(set(concepts)) != len(concepts):
        raise ParseError("duplicate concept identifiers", "concepts")
    labels_raw = expect_object(data.get("labels", {}), "labels")
    labels = {}
    for concept, ls in labels_raw.items():
        labels[concept] = [
            expect_str(x, f"labels.{concept}[{i}]")
            for i, x in enumerate(expect_list(ls, f"labels.{concept}"))
        ]
    return Ontology(
        concepts,
        _pairs(data.get("subclass_of", []), "subclass_of"),
        _pairs(data.get("equivalent", []), "equivalent"),
        labels,
    )

"""Bind each required input tag to the upstream tags that can feed it."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..config import MatchConfig
from ..ontology import Degree, Ontology
from ..procmodel import TagSpec
from ..textsim import annotation_similarity
from .formats import FormatDatabase
from .units import UnitDatabase

# binding kinds, in order of preference
DIRECT, UNIT, COMPOSITE, SYNTACTIC = "direct", "unit", "composite", "syntactic"


@dataclass(frozen=True)
class PartSource:
    part: str                 # part concept of the target decomposition
    source: str               # source tag
    source_part: str | None   # part of the source's decomposition, None for the whole value


@dataclass(frozen=True)
class Binding:
    target: TagSpec
    kind: str
    sources: tuple[TagSpec, ...]
    degree: Degree
    score: float = 1.0
    parts: tuple[PartSource, ...] = ()

    @property
    def source(self) -> TagSpec:
        return self.sources[0]


@dataclass
class BindingResult:
    bindings: list[Binding] = field(default_factory=list)
    unbound: list[TagSpec] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.unbound


def _direct(r: TagSpec, available: Sequence[TagSpec], o: Ontology) -> list[tuple[Degree, TagSpec]]:
    found = []
    for a in available:
        d = o.degree_of_match(r.concept, a.concept)
        if d is not Degree.FAIL:
            found.append((d, a))
    found.sort(key=lambda x: (x[0].rank, x[1].tag))
    return found


def _unit_siblings(r: TagSpec, available: Sequence[TagSpec], o: Ontology,
                   units: UnitDatabase | None) -> list[TagSpec]:
    """Tags of a sibling concept in a convertible unit, e.g. Celsius for a Fahrenheit input."""
    if r.unit is None or units is None:
        return []
    found = [
        a for a in available
        if a.unit is not None and a.unit != r.unit
        and o.degree_of_match(r.concept, a.concept) is Degree.FAIL
        and o.share_proper_ancestor(r.concept, a.concept)
        and units.find(a.unit, r.unit) is not None
    ]
    return sorted(found, key=lambda a: a.tag)


def _part_degree(o: Ontology, requested: str, offered: str) -> Degree:
    # part concepts (Month, Hour, ...) need not be declared in the ontology
    if requested in o and offered in o:
        return o.degree_of_match(requested, offered)
    return Degree.EXACT if requested == offered else Degree.FAIL


def _composite(r: TagSpec, available: Sequence[TagSpec], o: Ontology,
               formats: FormatDatabase | None) -> tuple[Degree, tuple[PartSource, ...]] | None:
    """Cover every part of the required composite from available tags or their parts."""
    if formats is None:
        return None
    target = formats.get(r.concept, r.format)
    if target is None:
        return None
    chosen: list[PartSource] = []
    worst = Degree.EXACT
    for part in target.parts:
        options = []
        for a in available:
            decomp = formats.get(a.concept, a.format)
            if decomp is not None:
                for sub in decomp.part_concepts:
                    d = _part_degree(o, part.concept, sub)
                    if d is not Degree.FAIL:
                        options.append((d.rank, 0, a.tag, sub, d))
            else:
                d = _part_degree(o, part.concept, a.concept)
                if d is not Degree.FAIL:
                    options.append((d.rank, 1, a.tag, "", d))
        if not options:
            return None
        rank, _, tag, sub, d = min(options)
        chosen.append(PartSource(part.concept, tag, sub or None))
        if d.rank > worst.rank:
            worst = d
    return worst, tuple(chosen)


def _labels(o: Ontology, t: TagSpec) -> list[str]:
    return [*o.labels_for(t.concept), t.tag]


def bind_one(r: TagSpec, available: Sequence[TagSpec], o: Ontology,
             formats: FormatDatabase | None, cfg: MatchConfig,
             units: UnitDatabase | None = None, *, syntactic: bool = True) -> Binding | None:
    direct = _direct(r, available, o)
    if direct:
        d, a = direct[0]
        return Binding(r, DIRECT, (a,), d)
    siblings = _unit_siblings(r, available, o, units)
    if siblings:
        return Binding(r, UNIT, (siblings[0],), Degree.FAIL)
    comp = _composite(r, available, o, formats)
    if comp is not None:
        degree, parts = comp
        by_tag = {a.tag: a for a in available}
        sources: list[TagSpec] = []
        for ps in parts:
            if by_tag[ps.source] not in sources:
                sources.append(by_tag[ps.source])
        return Binding(r, COMPOSITE, tuple(sources), degree, parts=parts)
    if syntactic:
        scored = [(annotation_similarity(_labels(o, r), _labels(o, a), cfg.metric), a) for a in available]
        scored = [(s, a) for s, a in scored if s >= cfg.sigma]
        if scored:
            s, a = min(scored, key=lambda x: (-x[0], x[1].tag))
            return Binding(r, SYNTACTIC, (a,), Degree.FAIL, score=s)
    return None


def bind_concepts(required: Iterable[TagSpec], available: Sequence[TagSpec], o: Ontology,
                  formats: FormatDatabase | None, cfg: MatchConfig,
                  units: UnitDatabase | None = None) -> BindingResult:
    """Bind every required tag; unresolvable tags are reported, never raised."""
    result = BindingResult()
    for r in required:
        b = bind_one(r, available, o, formats, cfg, units)
        if b is None:
            result.unbound.append(r)
        else:
            result.bindings.append(b)
    return result


def feeding_tags(r: TagSpec, available: Sequence[TagSpec], o: Ontology,
                 formats: FormatDatabase | None = None,
                 units: UnitDatabase | None = None) -> set[str]:
    """Every available tag that could feed ``r`` by logic, unit or composite binding."""
    tags = {a.tag for _, a in _direct(r, available, o)}
    tags.update(a.tag for a in _unit_siblings(r, available, o, units))
    comp = _composite(r, available, o, formats)
    if comp is not None:
        tags.update(ps.source for ps in comp[1])
    return tags

"""Hybrid n-to-m matchmaking of activity groups to service compositions.

Three steps: claim groups already recorded in the pattern database, match
the remaining activities against prefiltered compositions, report what is
still uncovered (with a human-task stub for each).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Mapping, Sequence

from .config import MatchConfig
from .datarecon.binding import feeding_tags
from .datarecon.catalog import DataCatalog
from .errors import UnknownConceptError
from .ontology import Degree, Ontology
from .patterns import MatchScore, PatternDatabase, group_signature
from .procmodel import ActivityGroup, ProcessModel, enumerate_groups, external_io
from .registry import FilterCriteria, OperationDescriptor, Registry, ServiceDescriptor, prefilter
from .textsim import annotation_similarity

PATTERN, FRESH = "pattern", "fresh"
STUB_ENDPOINT = "stub:human-task"


@dataclass(frozen=True)
class Rejected:
    """A composition that would break data integrity of the group."""
    reason: str


@dataclass(frozen=True)
class Assignment:
    group: ActivityGroup
    composition: tuple[OperationDescriptor, ...]
    score: MatchScore
    provenance: str = FRESH

    @property
    def refs(self) -> tuple[tuple[str, str], ...]:
        return tuple(op.ref for op in self.composition)

    def to_dict(self, canonical: bool = False) -> dict[str, Any]:
        out: dict[str, Any] = {
            "activities": list(self.group.activity_ids),
            "shape": self.group.shape,
            "composition": [{"service": s, "operation": o} for s, o in self.refs],
            "score": self.score.to_dict(),
        }
        if not canonical:
            out["provenance"] = self.provenance
        return out


@dataclass
class MatchPlan:
    assignments: list[Assignment] = field(default_factory=list)
    uncovered: list[str] = field(default_factory=list)
    stubs: list[ServiceDescriptor] = field(default_factory=list)

    @property
    def total_score(self) -> float:
        return math.fsum(a.score.combined for a in self.assignments)

    def assignment_for(self, activity_id: str) -> Assignment | None:
        for a in self.assignments:
            if activity_id in a.group.activity_ids:
                return a
        return None

    def to_dict(self, canonical: bool = False) -> dict[str, Any]:
        return {
            "assignments": [a.to_dict(canonical) for a in self.assignments],
            "uncovered": list(self.uncovered),
            "stubs": [s.to_dict() for s in self.stubs],
        }


@dataclass(frozen=True)
class Candidate:
    group: ActivityGroup
    composition: tuple[OperationDescriptor, ...]
    score: MatchScore

    @property
    def refs(self) -> tuple[tuple[str, str], ...]:
        return tuple(op.ref for op in self.composition)

    def rank_key(self) -> tuple:
        return (-self.score.combined, len(self.composition), self.refs)


# scoring -----------------------------------------------------------------

class Scorer:
    """Scores (group, composition) pairs; caches concept-level comparisons."""

    def __init__(self, p: ProcessModel, o: Ontology, cfg: MatchConfig, catalog: DataCatalog | None = None):
        self.p, self.o, self.cfg, self.catalog = p, o, cfg, catalog
        self._degree = lru_cache(maxsize=None)(o.degree_of_match)
        self._syn = lru_cache(maxsize=None)(
            lambda a, b: annotation_similarity(a, b, cfg.metric))
        self._io = lru_cache(maxsize=None)(lambda g: external_io(p, g))

    def _value(self, degree: Degree) -> float:
        return self.cfg.degrees.value(degree)

    def score(self, g: ActivityGroup, comp: Sequence[OperationDescriptor]) -> MatchScore | Rejected:
        o, p = self.o, self.p
        acts = [(p.annotation(a).operation_concept,
                 tuple(o.labels_for(p.annotation(a).operation_concept)) + (p.activity(a).label,))
                for a in g.activity_ids]
        pool = []
        for j, op in enumerate(comp):
            for concept in (op.operation_concept, *(op.behaviour or ())):
                pool.append((j, concept, tuple(o.labels_for(concept)) + (op.name,)))

        pairs = []
        for i, (concept, labels) in enumerate(acts):
            for t, (j, offered, olabels) in enumerate(pool):
                d = self._degree(concept, offered)
                pairs.append((-self._value(d), -self._syn(labels, olabels), i, t, d))
        pairs.sort(key=lambda x: x[:4])

        used_a: set[int] = set()
        used_t: set[int] = set()
        deg_values = [0.0] * len(acts)
        syn_values = [0.0] * len(acts)
        member_ok = [False] * len(comp)
        for neg_v, neg_s, i, t, d in pairs:
            if i in used_a or t in used_t:
                continue
            used_a.add(i)
            used_t.add(t)
            deg_values[i], syn_values[i] = -neg_v, -neg_s
            if d is not Degree.FAIL:
                member_ok[pool[t][0]] = True
        logic = math.fsum(deg_values) / len(acts)
        syntactic = math.fsum(syn_values) / len(acts)

        required, _ = self._io(g)
        formats = self.catalog.formats if self.catalog else None
        units = self.catalog.units if self.catalog else None
        available = list(required)
        checks = bound = 0
        group_used: set[str] = set()
        for j, op in enumerate(comp):
            for inp in op.inputs:
                checks += 1
                if feeding_tags(inp, available, o, formats, units):
                    bound += 1
                elif not member_ok[j]:
                    return Rejected(f"input {inp.tag!r} of {op.service_id}.{op.id} is unbound "
                                    "and the operation matches no activity")
                group_used |= feeding_tags(inp, required, o, formats, units)
            available.extend(op.outputs)
        for r in required:
            checks += 1
            bound += r.tag in group_used
        io_integrity = bound / checks if checks else 1.0

        a = self.cfg.alpha
        combined = a * (0.5 * logic + 0.5 * io_integrity) + (1 - a) * syntactic
        return MatchScore(logic, syntactic, min(1.0, max(0.0, combined)), io_integrity)

    def accepts(self, s: MatchScore | Rejected) -> bool:
        if isinstance(s, Rejected):
            return False
        if s.logic == 0.0:
            # logic failed everywhere: only the syntactic fallback can admit it
            return s.syntactic >= self.cfg.sigma
        return s.combined >= self.cfg.tau


def score_pair(g: ActivityGroup, comp: Sequence[OperationDescriptor], o: Ontology, cfg: MatchConfig,
               p: ProcessModel, catalog: DataCatalog | None = None) -> MatchScore | Rejected:
    return Scorer(p, o, cfg, catalog).score(g, comp)


# candidate generation ----------------------------------------------------

def _criteria(p: ProcessModel, criteria: Mapping[str, FilterCriteria] | None, a: str) -> FilterCriteria:
    if criteria is not None and a in criteria:
        return criteria[a]
    return FilterCriteria.from_annotation(p.annotation(a))


def group_operations(p: ProcessModel, r: Registry, g: ActivityGroup,
                     criteria: Mapping[str, FilterCriteria] | None = None) -> list[OperationDescriptor]:
    """Operations admitted by the filters of every member of the group."""
    ops = None
    for a in g.activity_ids:
        allowed = prefilter(r, _criteria(p, criteria, a))
        ops = allowed if ops is None else [op for op in ops if op in allowed]
    return ops or []


def compositions(ops: Sequence[OperationDescriptor], m: int):
    for length in range(1, m + 1):
        yield from itertools.permutations(ops, length)


def group_candidates(scorer: Scorer, r: Registry, g: ActivityGroup,
                     criteria: Mapping[str, FilterCriteria] | None = None) -> list[Candidate]:
    """Accepted compositions for one group, best first."""
    out = []
    for comp in compositions(group_operations(scorer.p, r, g, criteria), scorer.cfg.m):
        s = scorer.score(g, comp)
        if scorer.accepts(s):
            out.append(Candidate(g, tuple(comp), s))
    out.sort(key=Candidate.rank_key)
    return out


def rank_candidates(p: ProcessModel, r: Registry, o: Ontology, cfg: MatchConfig,
                    catalog: DataCatalog | None = None,
                    criteria: Mapping[str, FilterCriteria] | None = None) -> list[tuple[ActivityGroup, list[Candidate]]]:
    """Every group with its accepted compositions, for the explain view."""
    _check_concepts(p, r, o)
    scorer = Scorer(p, o, cfg, catalog)
    return [(g, group_candidates(scorer, r, g, criteria)) for g in enumerate_groups(p, cfg.k)]


# cover selection ---------------------------------------------------------

def _better(a: tuple, b: tuple | None) -> bool:
    """Compare (score, length, keys) triples: higher score, then shorter, then smaller keys."""
    if b is None:
        return True
    if a[0] != b[0]:
        return a[0] > b[0]
    if a[1] != b[1]:
        return a[1] < b[1]
    return a[2] < b[2]


def select_cover(order: Sequence[str], candidates: Sequence[Candidate]) -> list[Candidate]:
    """Disjoint set of candidates with maximal total score (exact search).

    Ties go to the smaller total composition length, then to the
    lexicographically smaller sequence of group positions.
    """
    index = {a: i for i, a in enumerate(order)}
    by_first: dict[int, list[tuple[int, Candidate, Fraction, tuple[int, ...]]]] = {}
    for c in candidates:
        positions = tuple(index[a] for a in c.group.activity_ids)
        mask = sum(1 << i for i in positions)
        by_first.setdefault(min(positions), []).append((mask, c, Fraction(c.score.combined), positions))
    full = (1 << len(order)) - 1
    memo: dict[int, tuple] = {}

    def best(mask: int) -> tuple:
        if mask == full:
            return (Fraction(0), 0, (), ())
        if mask in memo:
            return memo[mask]
        i = (~mask & (mask + 1)).bit_length() - 1  # lowest undecided position
        result = best(mask | (1 << i))  # leave it uncovered
        for cmask, c, s, positions in by_first.get(i, ()):
            if cmask & mask:
                continue
            rest = best(mask | cmask)
            option = (s + rest[0], len(c.composition) + rest[1], (positions,) + rest[2], (c,) + rest[3])
            if _better(option, result):
                result = option
        memo[mask] = result
        return result

    return list(best(0)[3])


# pipeline ----------------------------------------------------------------

def _check_concepts(p: ProcessModel, r: Registry, o: Ontology) -> None:
    for a in p.activity_order:
        for c in p.annotation(a).concepts():
            if c not in o:
                raise UnknownConceptError(f"activity {a!r} references unknown concept {c!r}")
    for op in r.operations():
        for c in (op.operation_concept, *(op.behaviour or ()), *(t.concept for t in (*op.inputs, *op.outputs))):
            if c not in o:
                raise UnknownConceptError(f"operation {op.service_id}.{op.id} references unknown concept {c!r}")


def make_stub(p: ProcessModel, activity_id: str) -> ServiceDescriptor:
    ann = p.annotation(activity_id)
    sid = f"stub-{activity_id}"
    op = OperationDescriptor(sid, "handle", p.activity(activity_id).label, ann.operation_concept,
                             ann.inputs, ann.outputs)
    return ServiceDescriptor(sid, f"Human task: {p.activity(activity_id).label}", STUB_ENDPOINT,
                             ann.partner or "", ann.domain or "", dict(ann.nfr), (op,))


def match_process(p: ProcessModel, r: Registry, o: Ontology, db: PatternDatabase | None = None,
                  cfg: MatchConfig | None = None,
                  criteria: Mapping[str, FilterCriteria] | None = None,
                  catalog: DataCatalog | None = None) -> MatchPlan:
    cfg = cfg or MatchConfig()
    _check_concepts(p, r, o)
    scorer = Scorer(p, o, cfg, catalog)
    groups = enumerate_groups(p, cfg.k)
    idx = p.topo_index
    claimed: set[str] = set()
    assignments: list[Assignment] = []

    # (i) pattern reuse, largest groups first
    if db is not None and len(db):
        for g in sorted(groups, key=lambda g: (-len(g), idx[g.activity_ids[0]])):
            if claimed & set(g.activity_ids):
                continue
            sig = group_signature(p, g)
            record = db.lookup(sig)
            if record is None:
                continue
            comp = [r.operation(ref) for ref in record.composition]
            if any(op is None for op in comp) or len(comp) > cfg.m:
                continue
            allowed = group_operations(p, r, g, criteria)
            if any(op not in allowed for op in comp):
                continue
            s = scorer.score(g, comp)
            if not scorer.accepts(s):
                continue
            db.record_hit(sig)
            claimed |= set(g.activity_ids)
            assignments.append(Assignment(g, tuple(comp), s, PATTERN))

    # (ii) fresh matchmaking over what is left
    remaining = [a for a in p.activity_order if a not in claimed]
    best_per_group = []
    for g in groups:
        if claimed & set(g.activity_ids):
            continue
        cands = group_candidates(scorer, r, g, criteria)
        if cands:
            best_per_group.append(cands[0])
    for c in select_cover(remaining, best_per_group):
        assignments.append(Assignment(c.group, c.composition, c.score, FRESH))

    # (iii) report the rest
    covered = {a for x in assignments for a in x.group.activity_ids}
    uncovered = [a for a in p.activity_order if a not in covered]
    assignments.sort(key=lambda x: idx[x.group.activity_ids[0]])
    return MatchPlan(assignments, uncovered, [make_stub(p, a) for a in uncovered])


def remember_plan(db: PatternDatabase, p: ProcessModel, plan: MatchPlan, cfg: MatchConfig) -> int:
    """Store every fresh assignment that reached ``tau``; returns how many were new."""
    before = len(db)
    for a in plan.assignments:
        if a.provenance == FRESH and a.score.combined >= cfg.tau:
            db.store(group_signature(p, a.group), a.refs, a.score)
    return len(db) - before

"""End-to-end compilation: match, derive transformations, build the workflow."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any

from .config import MatchConfig
from .datarecon.catalog import DataCatalog
from .datarecon.transform import TransformationSpec, UnboundReport, generate_transformation_spec
from .datarecon.xslt import render_xslt
from .errors import UnsupportedPatternError
from .matchmaker import Assignment, MatchPlan, match_process, remember_plan
from .ontology import Ontology
from .patterns import PatternDatabase
from .procmodel import ActivityGroup, ActivityItem, Item, ProcessModel, TagSpec, external_io
from .registry import Registry
from .wfgen import Workflow, generate_workflow, transform_id


@dataclass
class CompileResult:
    plan: MatchPlan
    workflow: Workflow
    specs: dict[str, TransformationSpec]
    stylesheets: dict[str, str]
    unbound: dict[str, list[str]]
    xslt_skipped: dict[str, str]
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def partial(self) -> bool:
        return bool(self.plan.uncovered or self.unbound)

    def report(self, canonical: bool = False) -> dict[str, Any]:
        out: dict[str, Any] = {
            "assignments": [a.to_dict(canonical) for a in self.plan.assignments],
            "uncovered": list(self.plan.uncovered),
            "stubs": [s.id for s in self.plan.stubs],
            "unbound": {k: v for k, v in sorted(self.unbound.items())},
            "xslt_skipped": {k: v for k, v in sorted(self.xslt_skipped.items())},
            "total_score": self.plan.total_score,
            "status": "partial" if self.partial else "complete",
        }
        if not canonical:
            out["timings"] = {k: round(v, 6) for k, v in self.timings.items()}
        return out


def initial_tags(p: ProcessModel) -> list[TagSpec]:
    """Tags the caller must supply: activity inputs no earlier activity produces."""
    required, _ = external_io(p, ActivityGroup(p.activity_order, "run"))
    return required


def _merge(available: list[TagSpec], new: list[TagSpec] | tuple[TagSpec, ...]) -> list[TagSpec]:
    # later producers shadow earlier tags of the same name, as in the runtime message
    by_tag = {t.tag: t for t in available}
    for t in new:
        by_tag.pop(t.tag, None)
        by_tag[t.tag] = t
    return list(by_tag.values())


def derive_specs(p: ProcessModel, plan: MatchPlan, o: Ontology, catalog: DataCatalog,
                 cfg: MatchConfig) -> tuple[dict[str, TransformationSpec], dict[str, list[str]]]:
    """One spec per invoked operation with inputs, fed by everything produced before it."""
    owner = {a: asg for asg in plan.assignments for a in asg.group.activity_ids}
    block_groups = {frozenset(asg.group.activity_ids): asg for asg in plan.assignments
                    if asg.group.shape == "block"}
    specs: dict[str, TransformationSpec] = {}
    unbound: dict[str, list[str]] = {}
    done: set[int] = set()

    def composition(asg: Assignment, available: list[TagSpec]) -> list[TagSpec]:
        done.add(id(asg))
        for j, op in enumerate(asg.composition):
            if op.inputs:
                sid = transform_id(asg, j)
                result = generate_transformation_spec(sid, op.service_id, op.id, op.inputs, available,
                                                      o, catalog, cfg)
                if isinstance(result, UnboundReport):
                    unbound[sid] = result.unbound_tags
                    result = result.spec
                specs[sid] = result
            available = _merge(available, op.outputs)
        return available

    def walk(items: tuple[Item, ...], available: list[TagSpec]) -> list[TagSpec]:
        for it in items:
            if isinstance(it, ActivityItem):
                asg = owner.get(it.id)
                if asg is None:
                    available = _merge(available, p.annotation(it.id).outputs)
                elif id(asg) not in done:
                    available = composition(asg, available)
                continue
            asg = block_groups.get(frozenset(it.activity_ids()))
            if asg is not None and it.activity_ids():
                available = composition(asg, available)
                continue
            after = list(available)
            for br in it.branches:
                added = [t for t in walk(br.items, available) if t not in available]
                after = _merge(after, added)
            available = after
        return available

    walk(p.body, initial_tags(p))
    return specs, unbound


def compile_process(p: ProcessModel, r: Registry, o: Ontology, catalog: DataCatalog,
                    cfg: MatchConfig | None = None, db: PatternDatabase | None = None,
                    name: str = "workflow") -> CompileResult:
    cfg = cfg or MatchConfig()
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    plan = match_process(p, r, o, db, cfg, catalog=catalog)
    if db is not None:
        remember_plan(db, p, plan, cfg)
    t1 = time.perf_counter()
    timings["matchmaking"] = t1 - t0
    specs, unbound = derive_specs(p, plan, o, catalog, cfg)
    stylesheets: dict[str, str] = {}
    skipped: dict[str, str] = {}
    for sid, spec in sorted(specs.items()):
        try:
            stylesheets[sid] = render_xslt(spec)
        except UnsupportedPatternError as exc:
            skipped[sid] = str(exc)
    t2 = time.perf_counter()
    timings["data_reconciliation"] = t2 - t1
    workflow = generate_workflow(p, plan, specs, name)
    timings["workflow_generation"] = time.perf_counter() - t2
    return CompileResult(plan, workflow, specs, stylesheets, unbound, skipped, timings)


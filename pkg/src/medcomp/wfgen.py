"""Behavioural reconciliation: technical workflow built by copying the process structure.

The orchestration document is a small BPEL-like XML dialect::

    <workflow name=...>
      <sequence>
        <transform spec=.../> <invoke operation=... service=... transform=.../>
        <humanTask stub=.../>
        <flow> <sequence/>... </flow>
        <switch> <case condition=...><sequence/></case>... </switch>
      </sequence>
    </workflow>
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Any, Mapping, Union
from xml.parsers import expat

from .datarecon.transform import TransformationSpec
from .errors import MissingSpecError, PlanMismatchError, SerializationError, ValidationError
from .matchmaker import Assignment, MatchPlan
from .procmodel import ActivityItem, Item, ProcessModel


@dataclass(frozen=True)
class Invoke:
    service: str
    operation: str
    transform: str | None = None


@dataclass(frozen=True)
class Transform:
    spec: str


@dataclass(frozen=True)
class HumanTask:
    stub: str


@dataclass(frozen=True)
class Sequence:
    children: tuple["WNode", ...] = ()


@dataclass(frozen=True)
class Flow:
    branches: tuple[Sequence, ...]


@dataclass(frozen=True)
class Case:
    condition: str
    body: Sequence


@dataclass(frozen=True)
class Switch:
    cases: tuple[Case, ...]


WNode = Union[Invoke, Transform, HumanTask, Sequence, Flow, Switch]


@dataclass(frozen=True)
class Workflow:
    name: str
    body: Sequence


def transform_id(assignment: Assignment, member: int) -> str:
    """Identifier of the transformation feeding member ``member`` of an assignment."""
    return f"xf-{assignment.group.activity_ids[0]}-{member + 1}"


def _check_plan(p: ProcessModel, plan: MatchPlan) -> None:
    seen: list[str] = []
    for a in plan.assignments:
        seen.extend(a.group.activity_ids)
    seen.extend(plan.uncovered)
    unknown = sorted(set(seen) - set(p.activity_order))
    if unknown:
        raise PlanMismatchError(f"plan references activities absent from the process: {unknown}")
    if len(seen) != len(set(seen)):
        raise PlanMismatchError("plan assigns some activity more than once")
    missing = sorted(set(p.activity_order) - set(seen))
    if missing:
        raise PlanMismatchError(f"plan neither covers nor reports activities {missing}")


def generate_workflow(p: ProcessModel, plan: MatchPlan, specs: Mapping[str, TransformationSpec],
                      name: str = "workflow") -> Workflow:
    _check_plan(p, plan)
    owner = {a: asg for asg in plan.assignments for a in asg.group.activity_ids}
    block_groups = {frozenset(asg.group.activity_ids): asg for asg in plan.assignments
                    if asg.group.shape == "block"}
    stubs = {s.id: s for s in plan.stubs}
    emitted: set[int] = set()

    def composition(asg: Assignment) -> list[WNode]:
        emitted.add(id(asg))
        out: list[WNode] = []
        for j, op in enumerate(asg.composition):
            if not op.inputs:
                out.append(Invoke(op.service_id, op.id))
                continue
            sid = transform_id(asg, j)
            spec = specs.get(sid)
            if spec is None:
                raise MissingSpecError(f"no transformation spec {sid!r} for {op.service_id}.{op.id}")
            if not spec.only_copies:
                out.append(Transform(sid))
            out.append(Invoke(op.service_id, op.id, sid))
        return out

    def walk(items: tuple[Item, ...]) -> Sequence:
        children: list[WNode] = []
        for it in items:
            if isinstance(it, ActivityItem):
                asg = owner.get(it.id)
                if asg is None:
                    stub = f"stub-{it.id}"
                    if stub not in stubs:
                        raise PlanMismatchError(f"uncovered activity {it.id!r} has no stub")
                    children.append(HumanTask(stub))
                elif id(asg) not in emitted:
                    if asg.group.shape == "block" and len(asg.group) > 1:
                        raise PlanMismatchError(f"block group {asg.group.activity_ids} is not a block")
                    children.extend(composition(asg))
                continue
            asg = block_groups.get(frozenset(it.activity_ids()))
            if asg is not None and it.activity_ids():
                children.extend(composition(asg))
            elif it.gateway_type == "parallel":
                children.append(Flow(tuple(walk(br.items) for br in it.branches)))
            else:
                children.append(Switch(tuple(Case(br.condition or "", walk(br.items)) for br in it.branches)))
        return Sequence(tuple(children))

    body = walk(p.body)
    return Workflow(name, body)


# serialisation -------------------------------------------------------------

def _element(node: WNode) -> ET.Element:
    if isinstance(node, Invoke):
        attrs = {"operation": node.operation, "service": node.service}
        if node.transform is not None:
            attrs["transform"] = node.transform
        return ET.Element("invoke", attrs)
    if isinstance(node, Transform):
        return ET.Element("transform", {"spec": node.spec})
    if isinstance(node, HumanTask):
        return ET.Element("humanTask", {"stub": node.stub})
    if isinstance(node, Sequence):
        el = ET.Element("sequence")
        el.extend(_element(c) for c in node.children)
        return el
    if isinstance(node, Flow):
        el = ET.Element("flow")
        el.extend(_element(b) for b in node.branches)
        return el
    if isinstance(node, Switch):
        el = ET.Element("switch")
        for case in node.cases:
            c = ET.SubElement(el, "case", {"condition": case.condition})
            c.append(_element(case.body))
        return el
    raise SerializationError(f"cannot serialise {node!r}")


def serialize_workflow(w: Workflow) -> str:
    # attributes are created in alphabetical order, and ElementTree keeps insertion order
    root = ET.Element("workflow", {"name": w.name})
    root.append(_element(w.body))
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


_ATTRS = {
    "workflow": ({"name"}, set()),
    "sequence": (set(), set()),
    "flow": (set(), set()),
    "switch": (set(), set()),
    "case": ({"condition"}, set()),
    "invoke": ({"service", "operation"}, {"transform"}),
    "transform": ({"spec"}, set()),
    "humanTask": ({"stub"}, set()),
}
_SEQUENCE_CHILDREN = {"sequence", "flow", "switch", "invoke", "transform", "humanTask"}


class _Tree:
    def __init__(self, tag: str, attrs: dict[str, str], path: str):
        self.tag, self.attrs, self.path = tag, attrs, path
        self.children: list[_Tree] = []
        self.text = ""


def _read_tree(document: str | bytes) -> _Tree:
    """Parse with expat, tracking the element stack so errors can name the open element."""
    stack: list[_Tree] = []
    root: list[_Tree] = []
    counts: list[dict[str, int]] = [{}]

    def start(tag: str, attrs: dict[str, str]) -> None:
        n = counts[-1].get(tag, 0)
        counts[-1][tag] = n + 1
        parent_path = stack[-1].path if stack else ""
        node = _Tree(tag, attrs, f"{parent_path}/{tag}[{n}]")
        (stack[-1].children if stack else root).append(node)
        stack.append(node)
        counts.append({})

    def end(_tag: str) -> None:
        stack.pop()
        counts.pop()

    def chars(data: str) -> None:
        if stack:
            stack[-1].text += data

    parser = expat.ParserCreate()
    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    data = document.encode("utf-8") if isinstance(document, str) else document
    try:
        parser.Parse(data, True)
    except expat.ExpatError as exc:
        reason = expat.ErrorString(exc.code)
        if stack:
            raise ValidationError(f"{reason} (line {exc.lineno}): unclosed <{stack[-1].tag}>",
                                  stack[-1].path) from None
        raise ValidationError(f"{reason} (line {exc.lineno})") from None
    return root[0]


def _check(node: _Tree) -> None:
    if node.tag not in _ATTRS:
        raise ValidationError(f"unknown element <{node.tag}>", node.path)
    required, optional = _ATTRS[node.tag]
    missing = sorted(required - set(node.attrs))
    if missing:
        raise ValidationError(f"<{node.tag}> lacks attribute(s) {missing}", node.path)
    extra = sorted(set(node.attrs) - required - optional)
    if extra:
        raise ValidationError(f"<{node.tag}> has unknown attribute(s) {extra}", node.path)
    if node.text.strip():
        raise ValidationError(f"<{node.tag}> contains text", node.path)


def _build(node: _Tree) -> WNode:
    _check(node)
    kids = node.children
    if node.tag in ("invoke", "transform", "humanTask"):
        if kids:
            raise ValidationError(f"<{node.tag}> must be empty", node.path)
        if node.tag == "invoke":
            return Invoke(node.attrs["service"], node.attrs["operation"], node.attrs.get("transform"))
        if node.tag == "transform":
            return Transform(node.attrs["spec"])
        return HumanTask(node.attrs["stub"])
    if node.tag == "sequence":
        children = []
        for i, k in enumerate(kids):
            if k.tag not in _SEQUENCE_CHILDREN:
                raise ValidationError(f"<{k.tag}> is not allowed inside <sequence>", k.path)
            children.append(_build(k))
        for i, child in enumerate(children):
            if isinstance(child, Transform):
                nxt = children[i + 1] if i + 1 < len(children) else None
                if not (isinstance(nxt, Invoke) and nxt.transform == child.spec):
                    raise ValidationError(f"<transform spec={child.spec!r}> is not followed by its <invoke>",
                                          kids[i].path)
        return Sequence(tuple(children))
    if node.tag == "flow":
        if not kids or any(k.tag != "sequence" for k in kids):
            raise ValidationError("<flow> must contain one or more <sequence> branches", node.path)
        return Flow(tuple(_build(k) for k in kids))  # type: ignore[misc]
    if node.tag == "switch":
        if not kids or any(k.tag != "case" for k in kids):
            raise ValidationError("<switch> must contain one or more <case> elements", node.path)
        cases = []
        for k in kids:
            _check(k)
            if len(k.children) != 1 or k.children[0].tag != "sequence":
                raise ValidationError("<case> must contain exactly one <sequence>", k.path)
            cases.append(Case(k.attrs["condition"], _build(k.children[0])))  # type: ignore[arg-type]
        return Switch(tuple(cases))
    raise ValidationError(f"<{node.tag}> is not allowed here", node.path)


def validate_workflow(document: str | bytes) -> Workflow:
    """Parse an orchestration document, raising ValidationError with the element path."""
    root = _read_tree(document)
    _check(root)
    if root.tag != "workflow":
        raise ValidationError(f"root element must be <workflow>, found <{root.tag}>", root.path)
    if len(root.children) != 1 or root.children[0].tag != "sequence":
        raise ValidationError("<workflow> must contain exactly one <sequence>", root.path)
    body = _build(root.children[0])
    return Workflow(root.attrs["name"], body)  # type: ignore[arg-type]


parse_workflow = validate_workflow


def iter_nodes(node: WNode | Workflow) -> Any:
    """Pre-order traversal of every node of a workflow."""
    if isinstance(node, Workflow):
        yield from iter_nodes(node.body)
        return
    yield node
    if isinstance(node, Sequence):
        for c in node.children:
            yield from iter_nodes(c)
    elif isinstance(node, Flow):
        for b in node.branches:
            yield from iter_nodes(b)
    elif isinstance(node, Switch):
        for c in node.cases:
            yield from iter_nodes(c.body)

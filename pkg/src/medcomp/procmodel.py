"""Abstract business-process model.

A process is parsed from its node/edge graph into a block tree (sequences of
activities and gateway blocks). The tree drives activity-group enumeration
and, later, the structure copy into the technical workflow.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterator, Union

from ._json import (
    expect_list,
    expect_object,
    expect_str,
    opt_str,
    read_document,
    str_map,
)
from .errors import ParseError, StructureError

KINDS = ("start", "end", "activity", "gateway_split", "gateway_join")
GATEWAY_TYPES = ("parallel", "exclusive")


@dataclass(frozen=True)
class TagSpec:
    tag: str
    concept: str
    format: str | None = None
    unit: str | None = None
    lookup: str | None = None  # id of a value lookup table applied on delivery

    def to_dict(self) -> dict[str, str]:
        out = {"tag": self.tag, "concept": self.concept}
        for key in ("format", "unit", "lookup"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out

    @classmethod
    def from_dict(cls, raw: Any, where: str) -> "TagSpec":
        obj = expect_object(raw, where, allowed={"tag", "concept", "format", "unit", "lookup"},
                            required=("tag", "concept"))
        return cls(
            tag=expect_str(obj["tag"], f"{where}.tag"),
            concept=expect_str(obj["concept"], f"{where}.concept"),
            format=opt_str(obj, "format", where),
            unit=opt_str(obj, "unit", where),
            lookup=opt_str(obj, "lookup", where),
        )


def parse_tags(raw: Any, where: str) -> tuple[TagSpec, ...]:
    tags = tuple(TagSpec.from_dict(t, f"{where}[{i}]") for i, t in enumerate(expect_list(raw, where)))
    names = [t.tag for t in tags]
    if len(set(names)) != len(names):
        raise StructureError(f"{where}: duplicate tag names")
    return tags


@dataclass(frozen=True)
class Annotation:
    operation_concept: str
    inputs: tuple[TagSpec, ...] = ()
    outputs: tuple[TagSpec, ...] = ()
    partner: str | None = None
    domain: str | None = None
    nfr: dict[str, str] = field(default_factory=dict, hash=False, compare=True)

    def concepts(self) -> Iterator[str]:
        yield self.operation_concept
        for t in (*self.inputs, *self.outputs):
            yield t.concept

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "operation": self.operation_concept,
            "inputs": [t.to_dict() for t in self.inputs],
            "outputs": [t.to_dict() for t in self.outputs],
        }
        if self.partner is not None:
            out["partner"] = self.partner
        if self.domain is not None:
            out["domain"] = self.domain
        if self.nfr:
            out["nfr"] = dict(self.nfr)
        return out


@dataclass(frozen=True)
class Node:
    id: str
    kind: str
    gateway_type: str | None = None
    annotation: Annotation | None = None
    name: str | None = None

    @property
    def label(self) -> str:
        return self.name or self.id


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    condition: str | None = None


# block tree
@dataclass(frozen=True)
class ActivityItem:
    id: str


@dataclass(frozen=True)
class Branch:
    condition: str | None
    items: tuple["Item", ...]


@dataclass(frozen=True)
class BlockItem:
    split: str
    join: str
    gateway_type: str
    branches: tuple[Branch, ...]

    def activity_ids(self) -> list[str]:
        out: list[str] = []
        for br in self.branches:
            out.extend(_activities_in(br.items))
        return out


Item = Union[ActivityItem, BlockItem]


def _activities_in(items: tuple[Item, ...]) -> list[str]:
    out: list[str] = []
    for it in items:
        if isinstance(it, ActivityItem):
            out.append(it.id)
        else:
            out.extend(it.activity_ids())
    return out


def iter_blocks(items: tuple[Item, ...]) -> Iterator[BlockItem]:
    for it in items:
        if isinstance(it, BlockItem):
            yield it
            for br in it.branches:
                yield from iter_blocks(br.items)


@dataclass(frozen=True)
class ActivityGroup:
    activity_ids: tuple[str, ...]
    shape: str  # "run" | "block"

    def __len__(self) -> int:
        return len(self.activity_ids)


@dataclass(frozen=True, eq=False)
class ProcessModel:
    nodes: dict[str, Node]
    edges: tuple[Edge, ...]
    body: tuple[Item, ...]

    @cached_property
    def activity_order(self) -> tuple[str, ...]:
        """Activities in pre-order of the block tree (a topological order)."""
        return tuple(_activities_in(self.body))

    @cached_property
    def topo_index(self) -> dict[str, int]:
        return {a: i for i, a in enumerate(self.activity_order)}

    def activity(self, activity_id: str) -> Node:
        node = self.nodes.get(activity_id)
        if node is None or node.kind != "activity":
            raise KeyError(activity_id)
        return node

    def annotation(self, activity_id: str) -> Annotation:
        ann = self.activity(activity_id).annotation
        assert ann is not None
        return ann

    @cached_property
    def _successors(self) -> dict[str, tuple[str, ...]]:
        succ: dict[str, list[str]] = {n: [] for n in self.nodes}
        for e in self.edges:
            succ[e.source].append(e.target)
        return {k: tuple(v) for k, v in succ.items()}

    @cached_property
    def _descendants(self) -> dict[str, frozenset[str]]:
        memo: dict[str, frozenset[str]] = {}

        def visit(n: str) -> frozenset[str]:
            if n not in memo:
                acc: set[str] = set()
                for s in self._successors[n]:
                    acc.add(s)
                    acc |= visit(s)
                memo[n] = frozenset(acc)
            return memo[n]

        for n in self.nodes:
            visit(n)
        return memo

    def reaches(self, a: str, b: str) -> bool:
        """True when a control path leads from node ``a`` to node ``b`` (a != b)."""
        return b in self._descendants[a]

    def blocks(self) -> list[BlockItem]:
        return list(iter_blocks(self.body))

    def to_dict(self) -> dict[str, Any]:
        nodes = []
        for n in self.nodes.values():
            d: dict[str, Any] = {"id": n.id, "kind": n.kind}
            if n.gateway_type:
                d["gateway_type"] = n.gateway_type
            if n.name:
                d["name"] = n.name
            if n.annotation:
                d["annotation"] = n.annotation.to_dict()
            nodes.append(d)
        edges = [[e.source, e.target] + ([e.condition] if e.condition is not None else [])
                 for e in self.edges]
        return {"nodes": nodes, "edges": edges}


# parsing ---------------------------------------------------------------

def _parse_annotation(raw: Any, where: str) -> Annotation:
    obj = expect_object(raw, where, allowed={"operation", "inputs", "outputs", "partner", "domain", "nfr"},
                        required=("operation",))
    return Annotation(
        operation_concept=expect_str(obj["operation"], f"{where}.operation"),
        inputs=parse_tags(obj.get("inputs", []), f"{where}.inputs"),
        outputs=parse_tags(obj.get("outputs", []), f"{where}.outputs"),
        partner=opt_str(obj, "partner", where),
        domain=opt_str(obj, "domain", where),
        nfr=str_map(obj.get("nfr"), f"{where}.nfr"),
    )


def _parse_node(raw: Any, where: str) -> Node:
    obj = expect_object(raw, where, allowed={"id", "kind", "gateway_type", "annotation", "name"},
                        required=("id", "kind"))
    node_id = expect_str(obj["id"], f"{where}.id")
    kind = expect_str(obj["kind"], f"{where}.kind")
    if kind not in KINDS:
        raise ParseError(f"unknown node kind {kind!r}", where)
    gateway_type = opt_str(obj, "gateway_type", where)
    if kind.startswith("gateway"):
        if gateway_type is None:
            raise StructureError(f"gateway {node_id!r} has no gateway_type")
        if gateway_type not in GATEWAY_TYPES:
            raise StructureError(f"unsupported gateway type {gateway_type!r} on {node_id!r}")
    elif gateway_type is not None:
        raise StructureError(f"gateway_type given on non-gateway node {node_id!r}")
    annotation = None
    if kind == "activity":
        if "annotation" not in obj:
            raise StructureError(f"activity {node_id!r} has no annotation")
        annotation = _parse_annotation(obj["annotation"], f"{where}.annotation")
    elif "annotation" in obj:
        raise StructureError(f"annotation given on non-activity node {node_id!r}")
    return Node(node_id, kind, gateway_type, annotation, opt_str(obj, "name", where))


def _parse_edge(raw: Any, where: str) -> Edge:
    if isinstance(raw, list) and len(raw) in (2, 3):
        parts = [expect_str(x, f"{where}[{i}]", allow_empty=(i == 2)) for i, x in enumerate(raw)]
        return Edge(parts[0], parts[1], parts[2] if len(parts) == 3 else None)
    if isinstance(raw, dict):
        obj = expect_object(raw, where, allowed={"from", "to", "condition"}, required=("from", "to"))
        return Edge(expect_str(obj["from"], f"{where}.from"), expect_str(obj["to"], f"{where}.to"),
                    opt_str(obj, "condition", where))
    raise ParseError("edge must be [from, to] or [from, to, condition]", where)


def parse_process(document: Any) -> ProcessModel:
    """Parse and validate a process document; raises StructureError on bad shape."""
    data = expect_object(read_document(document, "process"), "process", allowed={"nodes", "edges"},
                         required=("nodes", "edges"))
    nodes: dict[str, Node] = {}
    for i, raw in enumerate(expect_list(data["nodes"], "nodes")):
        node = _parse_node(raw, f"nodes[{i}]")
        if node.id in nodes:
            raise StructureError(f"duplicate node id {node.id!r}")
        nodes[node.id] = node
    edges = tuple(_parse_edge(raw, f"edges[{i}]") for i, raw in enumerate(expect_list(data["edges"], "edges")))
    body = _validate(nodes, edges)
    return ProcessModel(nodes, edges, body)


def _validate(nodes: dict[str, Node], edges: tuple[Edge, ...]) -> tuple[Item, ...]:
    succ: dict[str, list[Edge]] = {n: [] for n in nodes}
    pred: dict[str, list[str]] = {n: [] for n in nodes}
    seen: set[tuple[str, str]] = set()
    for e in edges:
        for end in (e.source, e.target):
            if end not in nodes:
                raise StructureError(f"dangling edge {e.source!r} -> {e.target!r}: unknown node {end!r}")
        if (e.source, e.target) in seen:
            raise StructureError(f"duplicate edge {e.source!r} -> {e.target!r}")
        seen.add((e.source, e.target))
        succ[e.source].append(e)
        pred[e.target].append(e.source)

    starts = [n for n in nodes.values() if n.kind == "start"]
    ends = [n for n in nodes.values() if n.kind == "end"]
    if len(starts) > 1:
        raise StructureError("multiple starts")
    if not starts:
        raise StructureError("missing start")
    if len(ends) > 1:
        raise StructureError("multiple ends")
    if not ends:
        raise StructureError("missing end")

    for n in nodes.values():
        n_in, n_out = len(pred[n.id]), len(succ[n.id])
        if n.kind == "start" and (n_in, n_out) != (0, 1):
            raise StructureError(f"start {n.id!r} must have no incoming and one outgoing edge")
        if n.kind == "end" and (n_in, n_out) != (1, 0):
            raise StructureError(f"end {n.id!r} must have one incoming and no outgoing edge")
        if n.kind == "activity" and (n_in, n_out) != (1, 1):
            raise StructureError(f"activity {n.id!r} must have exactly one incoming and one outgoing edge")
        if n.kind == "gateway_split" and (n_in != 1 or n_out < 2):
            raise StructureError(f"split {n.id!r} must have one incoming and at least two outgoing edges")
        if n.kind == "gateway_join" and (n_in < 2 or n_out != 1):
            raise StructureError(f"join {n.id!r} must have at least two incoming and one outgoing edge")
        if n.kind != "gateway_split" or n.gateway_type != "exclusive":
            for e in succ[n.id]:
                if e.condition is not None:
                    raise StructureError(f"condition on edge {e.source!r} -> {e.target!r} "
                                         "outside an exclusive split")

    start, end = starts[0].id, ends[0].id
    forward = _closure(start, {k: [e.target for e in v] for k, v in succ.items()})
    missing = sorted(set(nodes) - forward)
    if missing:
        raise StructureError(f"unreachable node(s) from start: {missing}")
    backward = _closure(end, pred)
    missing = sorted(set(nodes) - backward)
    if missing:
        raise StructureError(f"end not reachable from node(s): {missing}")
    _reject_cycles(nodes, succ)

    visited: set[str] = set()

    def parse_seq(first: str) -> tuple[tuple[Item, ...], str]:
        items: list[Item] = []
        cur = first
        while True:
            node = nodes[cur]
            if node.kind in ("end", "gateway_join"):
                return tuple(items), cur
            visited.add(cur)
            if node.kind == "activity":
                items.append(ActivityItem(cur))
                cur = succ[cur][0].target
                continue
            # gateway_split
            branches = []
            stops = set()
            for e in succ[cur]:
                b_items, stop = parse_seq(e.target)
                branches.append(Branch(e.condition, b_items))
                stops.add(stop)
            if len(stops) != 1:
                raise StructureError(f"crossing blocks: branches of split {cur!r} end at {sorted(stops)}")
            join = stops.pop()
            if nodes[join].kind != "gateway_join":
                raise StructureError(f"split {cur!r} has no matching join")
            if nodes[join].gateway_type != node.gateway_type:
                raise StructureError(
                    f"gateway type mismatch: {node.gateway_type} split {cur!r} "
                    f"closed by {nodes[join].gateway_type} join {join!r}")
            if len(pred[join]) != len(succ[cur]):
                raise StructureError(f"crossing blocks: join {join!r} has edges from outside split {cur!r}")
            if join in visited:
                raise StructureError(f"crossing blocks: join {join!r} closes more than one split")
            visited.add(join)
            items.append(BlockItem(cur, join, node.gateway_type or "", tuple(branches)))
            cur = succ[join][0].target

    visited.add(start)
    body, stop = parse_seq(succ[start][0].target)
    if stop != end:
        raise StructureError(f"crossing blocks: unmatched join {stop!r}")
    visited.add(end)
    leftover = sorted(set(nodes) - visited)
    if leftover:
        raise StructureError(f"crossing blocks: node(s) outside the block structure: {leftover}")
    return body


def _closure(root: str, adj: dict[str, list[str]]) -> set[str]:
    seen = {root}
    stack = [root]
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def _reject_cycles(nodes: dict[str, Node], succ: dict[str, list[Edge]]) -> None:
    state: dict[str, int] = {}
    for root in nodes:
        if root in state:
            continue
        stack = [(root, iter(succ[root]))]
        state[root] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                state[node] = 2
                stack.pop()
                continue
            t = nxt.target
            if state.get(t) == 1:
                raise StructureError(f"loop through {t!r}: loops are not supported")
            if t not in state:
                state[t] = 1
                stack.append((t, iter(succ[t])))


# group enumeration -----------------------------------------------------

def enumerate_groups(p: ProcessModel, k: int = 3) -> list[ActivityGroup]:
    """Activity groups allowed by process logic: runs within a branch and whole blocks."""
    if k < 1:
        raise ValueError("k must be >= 1")
    found: dict[frozenset[str], ActivityGroup] = {}
    idx = p.topo_index

    def add(ids: list[str], shape: str) -> None:
        key = frozenset(ids)
        prev = found.get(key)
        if prev is None or (prev.shape == "block" and shape == "run"):
            found[key] = ActivityGroup(tuple(sorted(ids, key=idx.__getitem__)), shape)

    def walk(items: tuple[Item, ...]) -> None:
        run: list[str] = []
        for it in (*items, None):
            if isinstance(it, ActivityItem):
                run.append(it.id)
                continue
            for i in range(len(run)):
                for j in range(i + 1, min(len(run), i + k) + 1):
                    add(run[i:j], "run")
            run = []
            if isinstance(it, BlockItem):
                inside = it.activity_ids()
                if 1 <= len(inside) <= k:
                    add(inside, "block")
                for br in it.branches:
                    walk(br.items)

    walk(p.body)
    return sorted(found.values(), key=lambda g: (idx[g.activity_ids[0]], len(g),
                                                 tuple(idx[a] for a in g.activity_ids)))


def _dedupe(tags: list[TagSpec]) -> list[TagSpec]:
    out: list[TagSpec] = []
    for t in tags:
        if t not in out:
            out.append(t)
    return out


def external_io(p: ProcessModel, g: ActivityGroup) -> tuple[list[TagSpec], list[TagSpec]]:
    """Inputs the group needs from outside, and everything it produces.

    An input counts as internal when a member that precedes it on a control
    path outputs the same concept.
    """
    required: list[TagSpec] = []
    produced: list[TagSpec] = []
    for a in g.activity_ids:
        ann = p.annotation(a)
        internal = {
            t.concept
            for b in g.activity_ids
            if b != a and p.reaches(b, a)
            for t in p.annotation(b).outputs
        }
        required.extend(t for t in ann.inputs if t.concept not in internal)
        produced.extend(ann.outputs)
    return _dedupe(required), _dedupe(produced)

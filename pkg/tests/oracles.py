"""Brute-force reference implementations the production code is checked against."""

from __future__ import annotations

import ast
import itertools
import math
from collections import Counter
from fractions import Fraction
from typing import Any

import networkx as nx

from medcomp.procmodel import ActivityGroup, ProcessModel
from medcomp.registry import FilterCriteria, Registry


# ontology ---------------------------------------------------------------

def closure_by_expansion(edges: list[tuple[str, str]], concepts: list[str]) -> set[tuple[str, str]]:
    """Reflexive-transitive closure by repeating edge expansion until a fixpoint."""
    rel = {(c, c) for c in concepts} | set(edges)
    while True:
        new = {(a, d) for a, b in rel for c, d in rel if b == c} - rel
        if not new:
            return rel
        rel |= new


# textsim ----------------------------------------------------------------

def jensen_shannon_direct(a: Counter, b: Counter) -> float:
    """1 - JSD/ln2 via KL divergences against the mixture, summed naively."""
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    ta, tb = sum(a.values()), sum(b.values())
    vocab = set(a) | set(b)
    p = {t: a[t] / ta for t in vocab}
    q = {t: b[t] / tb for t in vocab}
    m = {t: (p[t] + q[t]) / 2 for t in vocab}
    kl_pm = sum(p[t] * math.log(p[t] / m[t]) for t in vocab if p[t] > 0)
    kl_qm = sum(q[t] * math.log(q[t] / m[t]) for t in vocab if q[t] > 0)
    return 1 - (0.5 * kl_pm + 0.5 * kl_qm) / math.log(2)


# groups -----------------------------------------------------------------

def _graph(p: ProcessModel) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(p.nodes)
    g.add_edges_from((e.source, e.target) for e in p.edges)
    return g


def group_oracle(p: ProcessModel, k: int) -> set[tuple[frozenset[str], str]]:
    """Test every activity subset of size <= k against the run / block definitions."""
    g = _graph(p)
    acts = [n for n, node in p.nodes.items() if node.kind == "activity"]
    end = next(n for n, node in p.nodes.items() if node.kind == "end")

    # a block is delimited by a split and its immediate postdominator
    ipdom = nx.immediate_dominators(g.reverse(copy=True), end)
    block_sets = set()
    for n, node in p.nodes.items():
        if node.kind == "gateway_split":
            join = ipdom[n]
            inside = frozenset(a for a in acts if nx.has_path(g, n, a) and nx.has_path(g, a, join))
            block_sets.add(inside)

    def is_run(subset: tuple[str, ...]) -> bool:
        # some ordering chains the activities by direct control edges
        for order in itertools.permutations(subset):
            if all(g.has_edge(x, y) for x, y in zip(order, order[1:])):
                return True
        return False

    found = {}
    for size in range(1, k + 1):
        for subset in itertools.combinations(acts, size):
            key = frozenset(subset)
            if is_run(subset):
                found[key] = "run"
            elif key in block_sets:
                found[key] = "block"
    return set(found.items())


# matchmaker -------------------------------------------------------------

def brute_force_total(p: ProcessModel, r: Registry, scorer, k: int, m: int) -> float:
    """Optimal summed score over every set of disjoint groups x every composition."""
    idx = p.topo_index
    groups = [ActivityGroup(tuple(sorted(s, key=idx.__getitem__)), shape)
              for s, shape in group_oracle(p, k)]
    best: dict[frozenset[str], float] = {}
    for grp in groups:
        allowed = None
        for a in grp.activity_ids:
            c = FilterCriteria.from_annotation(p.annotation(a))
            ops = {op.ref for op in r.operations() if c.accepts(r.services[op.service_id])}
            allowed = ops if allowed is None else allowed & ops
        ops = [r.operation(ref) for ref in sorted(allowed or ())]
        for length in range(1, m + 1):
            for comp in itertools.permutations(ops, length):
                s = scorer.score(grp, comp)
                if scorer.accepts(s):
                    key = frozenset(grp.activity_ids)
                    best[key] = max(best.get(key, -1.0), s.combined)
    keys = list(best)
    top = 0.0
    # every family of pairwise disjoint groups
    for n in range(1, len(keys) + 1):
        for family in itertools.combinations(keys, n):
            union: set[str] = set()
            ok = True
            for f in family:
                if union & f:
                    ok = False
                    break
                union |= f
            if ok:
                top = max(top, math.fsum(best[f] for f in family))
    return top


# workflow ---------------------------------------------------------------

def process_graph(p: ProcessModel) -> nx.DiGraph:
    """Control graph labelled by node role, activities anonymised."""
    g = nx.DiGraph()
    for n, node in p.nodes.items():
        label = "act" if node.kind == "activity" else (
            f"{node.gateway_type}_{node.kind}" if node.gateway_type else node.kind)
        g.add_node(n, label=label)
    g.add_edges_from((e.source, e.target) for e in p.edges)
    return g


def workflow_graph(w: Any) -> nx.DiGraph:
    """Control graph of a workflow tree, Transform nodes collapsed."""
    from medcomp.wfgen import Flow, HumanTask, Invoke, Sequence, Transform

    g = nx.DiGraph()
    counter = itertools.count()

    def new(label: str) -> int:
        n = next(counter)
        g.add_node(n, label=label)
        return n

    def emit(seq: Sequence, prev: int) -> int:
        for child in seq.children:
            if isinstance(child, Transform):
                continue
            if isinstance(child, (Invoke, HumanTask)):
                n = new("act")
                g.add_edge(prev, n)
                prev = n
            elif isinstance(child, Sequence):
                prev = emit(child, prev)
            else:
                kind = "parallel" if isinstance(child, Flow) else "exclusive"
                split, join = new(f"{kind}_gateway_split"), new(f"{kind}_gateway_join")
                g.add_edge(prev, split)
                bodies = child.branches if isinstance(child, Flow) else [c.body for c in child.cases]
                for body in bodies:
                    g.add_edge(emit(body, split), join)
                prev = join
        return prev

    start = new("start")
    last = emit(w.body, start)
    g.add_edge(last, new("end"))
    return g


def isomorphic(a: nx.DiGraph, b: nx.DiGraph) -> bool:
    return nx.is_isomorphic(a, b, node_match=lambda x, y: x["label"] == y["label"])


# expressions ------------------------------------------------------------

def fraction_eval(text: str, x: Fraction) -> Fraction:
    """Evaluate a generated expression with Python's own parser over Fractions."""
    src = (text.replace("×", "*").replace("÷", "/").replace("−", "-")
           .replace("{#x}", "X"))
    tree = ast.parse(src, mode="eval")

    def ev(node: ast.AST) -> Fraction:
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant):
            return Fraction(str(node.value))
        if isinstance(node, ast.Name):
            return x
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -ev(node.operand)
        if isinstance(node, ast.BinOp):
            left, right = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                return left / right
        raise ValueError(f"unexpected node {ast.dump(node)}")

    return ev(tree)

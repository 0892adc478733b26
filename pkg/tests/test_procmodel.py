from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medcomp.errors import ParseError, StructureError
from medcomp.procmodel import ActivityGroup, enumerate_groups, external_io, parse_process
from gen import random_process, random_tree, sequence_process, tree_to_process
from oracles import group_oracle


def act(aid: str, inputs=(), outputs=(), op: str = "Op") -> dict:
    return {"id": aid, "kind": "activity",
            "annotation": {"operation": op,
                           "inputs": [{"tag": t, "concept": t} for t in inputs],
                           "outputs": [{"tag": t, "concept": t} for t in outputs]}}


START, END = {"id": "s", "kind": "start"}, {"id": "e", "kind": "end"}


def gw(gid: str, kind: str, gtype: str) -> dict:
    return {"id": gid, "kind": kind, "gateway_type": gtype}


def parallel_ab(a=act("A"), b=act("B")) -> dict:
    return {"nodes": [START, gw("g1", "gateway_split", "parallel"), a, b,
                      gw("g2", "gateway_join", "parallel"), END],
            "edges": [["s", "g1"], ["g1", "A"], ["g1", "B"], ["A", "g2"], ["B", "g2"], ["g2", "e"]]}


def ids(groups) -> list[tuple[str, ...]]:
    return [g.activity_ids for g in groups]


def test_minimal_process():
    p = parse_process({"nodes": [START, act("A"), END], "edges": [["s", "A"], ["A", "e"]]})
    assert p.activity_order == ("A",)


@pytest.mark.parametrize("doc, message", [
    ({"nodes": [START, {"id": "s2", "kind": "start"}, act("A"), END],
      "edges": [["s", "A"], ["s2", "A"], ["A", "e"]]}, "multiple starts"),
    ({"nodes": [START, gw("g1", "gateway_split", "parallel"), act("A"), act("B"),
                gw("g2", "gateway_join", "exclusive"), END],
      "edges": [["s", "g1"], ["g1", "A"], ["g1", "B"], ["A", "g2"], ["B", "g2"], ["g2", "e"]]},
     "gateway type mismatch"),
    ({"nodes": [START, act("A"), END], "edges": [["s", "A"], ["A", "e"], ["A", "X"]]}, "dangling edge"),
    ({"nodes": [START, act("A"), END], "edges": [["s", "A"]]}, "exactly one incoming and one outgoing"),
    ({"nodes": [START, act("A"), act("A"), END], "edges": []}, "duplicate node id"),
    ({"nodes": [START, act("A"), END], "edges": [["s", "A"], ["A", "e"], ["s", "A"]]}, "duplicate edge"),
])
def test_structure_errors(doc, message):
    with pytest.raises(StructureError) as exc:
        parse_process(doc)
    assert message in str(exc.value)


def test_crossing_blocks_rejected():
    # g1 opens a block closed by g3 while g2's block straddles it
    doc = {"nodes": [START, gw("g1", "gateway_split", "parallel"), gw("g2", "gateway_split", "parallel"),
                     act("A"), act("B"), act("C"),
                     gw("j1", "gateway_join", "parallel"), gw("j2", "gateway_join", "parallel"), END],
           "edges": [["s", "g1"], ["g1", "A"], ["g1", "g2"], ["g2", "B"], ["g2", "C"],
                     ["A", "j1"], ["B", "j1"], ["C", "j2"], ["j1", "j2"], ["j2", "e"]]}
    with pytest.raises(StructureError) as exc:
        parse_process(doc)
    assert "crossing blocks" in str(exc.value)


def test_loops_rejected():
    doc = {"nodes": [START, gw("g1", "gateway_join", "exclusive"), act("A"),
                     gw("g2", "gateway_split", "exclusive"), END],
           "edges": [["s", "g1"], ["g1", "A"], ["A", "g2"], ["g2", "g1", "again"], ["g2", "e", "done"]]}
    with pytest.raises(StructureError):
        parse_process(doc)


def test_syntax_error_has_location():
    with pytest.raises(ParseError) as exc:
        parse_process('{"nodes": [}')
    assert exc.value.location and "line 1" in exc.value.location


def test_unknown_kind_is_a_parse_error():
    with pytest.raises(ParseError):
        parse_process({"nodes": [{"id": "x", "kind": "event"}], "edges": []})


def test_sequence_groups():
    p = parse_process(sequence_process(3))
    assert ids(enumerate_groups(p, 3)) == [("a0",), ("a0", "a1"), ("a0", "a1", "a2"),
                                           ("a1",), ("a1", "a2"), ("a2",)]


def test_single_activity_groups():
    p = parse_process(sequence_process(1))
    assert ids(enumerate_groups(p, 5)) == [("a0",)]


def test_parallel_block_groups():
    p = parse_process(parallel_ab())
    groups = enumerate_groups(p, 2)
    assert [(g.activity_ids, g.shape) for g in groups] == [
        (("A",), "run"), (("A", "B"), "block"), (("B",), "run")]


def test_k_must_be_positive():
    with pytest.raises(ValueError):
        enumerate_groups(parse_process(sequence_process(2)), 0)


@pytest.mark.parametrize("n", range(1, 9))
def test_sequence_count_law(n):
    assert len(enumerate_groups(parse_process(sequence_process(n)), n)) == n * (n + 1) // 2


@pytest.mark.parametrize("seed", range(60))
def test_groups_match_subset_oracle(seed):
    rng = random.Random(seed)
    p = parse_process(random_process(rng, rng.randint(1, 8)))
    k = rng.randint(1, 4)
    got = {(frozenset(g.activity_ids), g.shape) for g in enumerate_groups(p, k)}
    assert got == group_oracle(p, k)


@pytest.mark.parametrize("seed", range(30))
def test_groups_are_convex_and_ordered(seed):
    rng = random.Random(1000 + seed)
    p = parse_process(random_process(rng, rng.randint(1, 8)))
    groups = enumerate_groups(p, 3)
    idx = p.topo_index
    keys = [(idx[g.activity_ids[0]], len(g)) for g in groups]
    assert keys == sorted(keys)
    assert len({frozenset(g.activity_ids) for g in groups}) == len(groups)
    for g in groups:
        members = set(g.activity_ids)
        for x in p.activity_order:
            if x in members:
                continue
            assert not any(p.reaches(a, x) and p.reaches(x, b) for a in members for b in members)


def test_external_io_single():
    p = parse_process({"nodes": [START, act("A", ["x"], ["y"]), END], "edges": [["s", "A"], ["A", "e"]]})
    req, prod = external_io(p, ActivityGroup(("A",), "run"))
    assert [t.tag for t in req] == ["x"] and [t.tag for t in prod] == ["y"]


def test_external_io_run_consumes_internal_outputs():
    doc = {"nodes": [START, act("A", ["x"], ["y"]), act("B", ["y", "z"], ["w"]), END],
           "edges": [["s", "A"], ["A", "B"], ["B", "e"]]}
    p = parse_process(doc)
    req, prod = external_io(p, ActivityGroup(("A", "B"), "run"))
    assert [t.tag for t in req] == ["x", "z"]
    assert [t.tag for t in prod] == ["y", "w"]


def test_external_io_parallel_block_is_union():
    p = parse_process(parallel_ab(act("A", ["x"], ["y"]), act("B", ["y"], ["z"])))
    req, _ = external_io(p, ActivityGroup(("A", "B"), "block"))
    # parallel siblings do not feed each other
    assert [t.tag for t in req] == ["x", "y"]


def test_round_trip_to_dict():
    rng = random.Random(3)
    for _ in range(20):
        p = parse_process(random_process(rng, rng.randint(1, 6)))
        again = parse_process(p.to_dict())
        assert again.activity_order == p.activity_order
        assert [b.gateway_type for b in again.blocks()] == [b.gateway_type for b in p.blocks()]


@st.composite
def trees(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(1, 7))
    return random_tree(random.Random(seed), n)


@given(trees())
@settings(max_examples=80, deadline=None)
def test_every_generated_tree_parses(tree):
    p = parse_process(tree_to_process(tree))
    assert len(set(p.activity_order)) == len(p.activity_order)
    order = p.topo_index
    for e in p.edges:
        if e.source in order and e.target in order:
            assert order[e.source] < order[e.target]

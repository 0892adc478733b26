from __future__ import annotations

from medcomp.config import MatchConfig
from medcomp.datarecon.binding import COMPOSITE, DIRECT, SYNTACTIC, UNIT, bind_concepts, bind_one, feeding_tags
from medcomp.datarecon.catalog import default_formats
from medcomp.ontology import Degree, load_ontology
from medcomp.procmodel import TagSpec

CFG = MatchConfig()
FORMATS = default_formats()


def test_sensor_bindings(sensor):
    p, r, o, catalog = sensor
    upstream = p.annotation("RecordSensor").inputs
    dt, value = r.operations()[0].inputs
    b = bind_one(dt, upstream, o, catalog.formats, CFG, catalog.units)
    assert b.kind == COMPOSITE and [s.tag for s in b.sources] == ["DateUS", "Time"]
    assert {ps.part: (ps.source, ps.source_part) for ps in b.parts} == {
        "Year": ("DateUS", "Year"), "Month": ("DateUS", "Month"), "Day": ("DateUS", "Day"),
        "Hour": ("Time", "Hour"), "Minute": ("Time", "Minute"), "Second": ("Time", "Second")}
    b = bind_one(value, upstream, o, catalog.formats, CFG, catalog.units)
    assert b.kind == UNIT and b.source.tag == "SensorTempC"


def test_unit_sibling_needs_a_conversion(sensor):
    p, r, o, catalog = sensor
    value = r.operations()[0].inputs[1]
    assert bind_one(value, p.annotation("RecordSensor").inputs, o, catalog.formats, CFG) is None


def test_direct_binding_prefers_exact_then_plugin():
    o = load_ontology({"concepts": ["T", "C"], "subclass_of": [["C", "T"]]})
    avail = [TagSpec("general", "T"), TagSpec("special", "C")]
    b = bind_one(TagSpec("want", "T"), avail, o, None, CFG)
    assert (b.kind, b.source.tag, b.degree) == (DIRECT, "general", Degree.EXACT)
    b = bind_one(TagSpec("want", "T"), avail[1:], o, None, CFG)
    assert (b.kind, b.degree) == (DIRECT, Degree.PLUGIN)


def test_syntactic_fallback_respects_sigma():
    o = load_ontology({"concepts": ["A", "B"], "labels": {"A": ["customer name"], "B": ["customer name"]}})
    b = bind_one(TagSpec("x", "A"), [TagSpec("y", "B")], o, None, CFG)
    assert b.kind == SYNTACTIC and b.score == 1.0
    assert bind_one(TagSpec("x", "A"), [TagSpec("y", "B")], o, None, CFG, syntactic=False) is None


def test_bind_concepts_reports_unbound():
    o = load_ontology({"concepts": ["A", "B", "Z"]})
    result = bind_concepts([TagSpec("a", "A"), TagSpec("z", "Z")], [TagSpec("a", "A")], o, None, CFG)
    assert not result.complete and [t.tag for t in result.unbound] == ["z"]
    assert [b.source.tag for b in result.bindings] == ["a"]


def test_composite_from_whole_part_values():
    o = load_ontology({"concepts": ["Datetime", "Year", "Month", "Day", "Hour", "Minute", "Second"]})
    avail = [TagSpec(c.lower(), c) for c in ["Year", "Month", "Day", "Hour", "Minute", "Second"]]
    b = bind_one(TagSpec("dt", "Datetime", "SQL"), avail, o, FORMATS, CFG)
    assert b.kind == COMPOSITE and all(ps.source_part is None for ps in b.parts)
    assert feeding_tags(TagSpec("dt", "Datetime", "SQL"), avail, o, FORMATS) == {t.tag for t in avail}


def test_incomplete_composite_is_unbound():
    o = load_ontology({"concepts": ["Datetime", "Date"]})
    b = bind_one(TagSpec("dt", "Datetime", "SQL"), [TagSpec("d", "Date", "US")], o, FORMATS, CFG)
    assert b is None

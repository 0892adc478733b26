from __future__ import annotations

import json

import pytest

from medcomp.config import MatchConfig
from medcomp.datarecon.catalog import DataCatalog, default_formats
from medcomp.datarecon.tables import load_tables
from medcomp.datarecon.transform import (
    Assemble, Convert, Copy, Lookup, Parse, TransformationSpec, UnboundReport, apply_transformation,
    generate_transformation_spec, load_spec,
)
from medcomp.errors import LookupMissError, MissingTagError, ParseError, UnboundTagError, ValueParseError
from medcomp.ontology import load_ontology
from medcomp.procmodel import TagSpec

CFG = MatchConfig()
SENSOR_MSG = {"DateUS": "12-25-2010", "Time": "14:30:00", "SensorTempC": "100"}


def _sensor_spec(sensor) -> TransformationSpec:
    p, r, o, catalog = sensor
    op = r.operations()[0]
    return generate_transformation_spec("xf", op.service_id, op.id, op.inputs,
                                        p.annotation("RecordSensor").inputs, o, catalog, CFG)


def test_sensor_spec_steps(sensor):
    spec = _sensor_spec(sensor)
    dt, value = spec.inputs
    assert [type(s) for s in dt.steps] == [Parse, Parse, Assemble]
    assert [type(s) for s in value.steps] == [Copy, Convert]
    assert dt.sources == ("DateUS", "Time") and value.binding == "unit"
    assert not spec.only_copies and spec.unbound_tags == []


def test_sensor_values(sensor):
    out = apply_transformation(_sensor_spec(sensor), SENSOR_MSG)
    assert out == {"Datetime": "2010-12-25 14:30:00", "Value": "212"}


def test_spec_round_trips_through_json(sensor):
    spec = _sensor_spec(sensor)
    again = load_spec(json.dumps(spec.to_dict()))
    assert again.to_dict() == spec.to_dict()
    assert apply_transformation(again, SENSOR_MSG) == apply_transformation(spec, SENSOR_MSG)


def test_copy_only_spec():
    o = load_ontology({"concepts": ["Id", "Amount"]})
    spec = generate_transformation_spec("xf", "S", "op", [TagSpec("OrderId", "Id"), TagSpec("Sum", "Amount")],
                                        [TagSpec("Id", "Id"), TagSpec("Amount", "Amount")], o,
                                        DataCatalog(), CFG)
    assert spec.only_copies
    assert apply_transformation(spec, {"Id": "7", "Amount": "9.5"}) == {"OrderId": "7", "Sum": "9.5"}


def test_unbound_report_keeps_a_spec():
    o = load_ontology({"concepts": ["Id", "Secret"]})
    result = generate_transformation_spec("xf", "S", "op", [TagSpec("Id", "Id"), TagSpec("Key", "Secret")],
                                          [TagSpec("Id", "Id")], o, DataCatalog(), CFG)
    assert isinstance(result, UnboundReport) and result.unbound_tags == ["Key"]
    assert result.spec.unbound_tags == ["Key"] and not result.spec.only_copies
    with pytest.raises(UnboundTagError):
        apply_transformation(result.spec, {"Id": "1"})


def _country_spec() -> TransformationSpec:
    o = load_ontology({"concepts": ["Country"]})
    tables = load_tables({"tables": [{"id": "iso", "entries": {"FR": "France", "IT": "Italy"}}]})
    return generate_transformation_spec("xf", "S", "op", [TagSpec("Name", "Country", lookup="iso")],
                                        [TagSpec("Code", "Country")], o,
                                        DataCatalog(default_formats(), tables=tables), CFG)


def test_lookup_hit_and_miss():
    spec = _country_spec()
    assert [type(s) for s in spec.inputs[0].steps] == [Copy, Lookup]
    assert apply_transformation(spec, {"Code": "FR"}) == {"Name": "France"}
    with pytest.raises(LookupMissError):
        apply_transformation(spec, {"Code": "DE"})


def test_runtime_errors(sensor):
    spec = _sensor_spec(sensor)
    with pytest.raises(MissingTagError):
        apply_transformation(spec, {"DateUS": "12-25-2010", "Time": "14:30:00"})
    with pytest.raises(ValueParseError):
        apply_transformation(spec, {**SENSOR_MSG, "DateUS": "2010-12-25"})
    with pytest.raises(ValueParseError):
        apply_transformation(spec, {**SENSOR_MSG, "SensorTempC": "hot"})


def test_decimal_comma_input_and_rounding(sensor):
    out = apply_transformation(_sensor_spec(sensor), {**SENSOR_MSG, "SensorTempC": "36,65"})
    assert out["Value"] == "97.97"


@pytest.mark.parametrize("patch", [
    {"inputs": [{"target": {"tag": "x", "concept": "X"}, "steps": [{"op": "explode"}]}]},
    {"places": -1},
    {"inputs": [{"target": {"tag": "x", "concept": "X"}, "steps": [{"op": "convert", "conversion": "nope"}]}]},
])
def test_load_spec_rejects_bad_documents(patch):
    doc = {"id": "xf", "target": {"service": "S", "operation": "op"}, "inputs": []}
    doc.update(patch)
    with pytest.raises(ParseError):
        load_spec(doc)

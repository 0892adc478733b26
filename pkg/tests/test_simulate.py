from __future__ import annotations

import json

import pytest

from conftest import compile_fixture
from medcomp.errors import (
    HumanTaskPending, MessageConflictError, MissingMockError, MissingTagError, NoMatchingCaseError, ParseError,
)
from medcomp.pipeline import compile_process
from medcomp.registry import load_registry
from medcomp.simulate import MockBehavior, Simulator, load_mocks, load_prompts, simulate
from medcomp.wfgen import Case, Invoke, Sequence, Switch, Workflow

ORDER = {"OrderId": "o-1", "Amount": "12.50"}


def mocks(**outputs: dict) -> MockBehavior:
    """Mocks keyed "Service.operation"."""
    return MockBehavior({tuple(k.split(".")): v for k, v in outputs.items()})


SHOP_MOCKS = mocks(**{"Warehouse.checkStock": {"StockLevel": "4"},
                      "Warehouse.ship": {"TrackingNo": "t-{OrderId}"},
                      "Payments.charge": {"Receipt": "r-{Amount}"}})


def test_sensor_scenario(sensor, sensor_dir):
    p, r, o, catalog = sensor
    result = compile_process(p, r, o, catalog)
    m = load_mocks((sensor_dir / "mocks.json").read_text())
    m.check_against(r)
    out = simulate(result.workflow, result.specs, m, json.loads((sensor_dir / "message.json").read_text()))
    assert out["Datetime"] == "2010-12-25 14:30:00" and out["Value"] == "212"
    assert out["MeasurementId"] == "m-2010-12-25 14:30:00"


def test_sequence_accumulates_outputs():
    _, result = compile_fixture("exact_1to1")
    sim = Simulator(result.specs, SHOP_MOCKS)
    out = sim.run(result.workflow, ORDER)
    assert out == {**ORDER, "StockLevel": "4", "Receipt": "r-12.50", "TrackingNo": "t-o-1"}
    assert sim.trace == ["invoke Warehouse.checkStock", "invoke Payments.charge", "invoke Warehouse.ship"]


def test_flow_merges_disjoint_branches():
    _, result = compile_fixture("parallel")
    out = simulate(result.workflow, result.specs, SHOP_MOCKS, ORDER)
    assert out["StockLevel"] == "4" and out["Receipt"] == "r-12.50"


def test_flow_conflict():
    _, result = compile_fixture("parallel")
    clash = mocks(**{"Warehouse.checkStock": {"Status": "stocked"}, "Payments.charge": {"Status": "paid"},
                     "Warehouse.ship": {}})
    with pytest.raises(MessageConflictError):
        simulate(result.workflow, result.specs, clash, ORDER)


def test_flow_conflict_even_on_equal_values():
    _, result = compile_fixture("parallel")
    same = mocks(**{"Warehouse.checkStock": {"Status": "ok"}, "Payments.charge": {"Status": "ok"},
                    "Warehouse.ship": {}})
    with pytest.raises(MessageConflictError):
        simulate(result.workflow, result.specs, same, ORDER)


def _exclusive(approval: str) -> MockBehavior:
    return mocks(**{"Desk.approve": {"Approval": approval}, "Warehouse.ship": {"TrackingNo": "t"}})


def test_switch_takes_matching_case():
    _, result = compile_fixture("exclusive")
    assert simulate(result.workflow, result.specs, _exclusive("yes"), ORDER)["TrackingNo"] == "t"


def test_switch_default_reaches_pending_human_task():
    _, result = compile_fixture("exclusive")
    with pytest.raises(HumanTaskPending):
        simulate(result.workflow, result.specs, _exclusive("no"), ORDER)
    out = simulate(result.workflow, result.specs, _exclusive("no"), ORDER,
                   load_prompts({"stub-Notify": {"Notified": "by phone"}}))
    assert out["Notified"] == "by phone" and "TrackingNo" not in out


def test_switch_without_default():
    w = Workflow("w", Sequence((Switch((Case("x=1", Sequence((Invoke("S", "op"),))),)),)))
    with pytest.raises(NoMatchingCaseError):
        simulate(w, {}, mocks(**{"S.op": {}}), {"x": "2"})
    assert simulate(w, {}, mocks(**{"S.op": {"y": "done"}}), {"x": "1"})["y"] == "done"


def test_missing_mock_and_template_tag():
    _, result = compile_fixture("exact_1to1")
    with pytest.raises(MissingMockError):
        simulate(result.workflow, result.specs, mocks(**{"Warehouse.checkStock": {}}), ORDER)
    bad = mocks(**{"Warehouse.checkStock": {"x": "{Nope}"}})
    with pytest.raises(MissingTagError):
        simulate(result.workflow, result.specs, bad, ORDER)


def test_mock_registry_check():
    r = load_registry({"services": [{"id": "S", "operations": [{"id": "op", "operation": "C"}]}]})
    mocks(**{"S.op": {}}).check_against(r)
    with pytest.raises(MissingMockError):
        mocks(**{"S.other": {}}).check_against(r)


def test_load_mocks_rejects_duplicates():
    doc = {"mocks": [{"service": "S", "operation": "op"}, {"service": "S", "operation": "op"}]}
    with pytest.raises(ParseError):
        load_mocks(doc)

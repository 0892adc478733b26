"""Desk-scale execution of a generated workflow against mock services.

The message is a flat tag -> string mapping that accumulates as the
workflow runs. A Transform builds the input message for the Invoke that
follows it; the mock's outputs are then merged into the running message.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Mapping

from ._json import expect_list, expect_object, expect_str, read_document, str_map
from .datarecon.transform import Message, TransformationSpec, apply_transformation
from .errors import (
    HumanTaskPending,
    MessageConflictError,
    MissingMockError,
    MissingSpecError,
    MissingTagError,
    NoMatchingCaseError,
    ParseError,
)
from .registry import Registry
from .wfgen import Flow, HumanTask, Invoke, Sequence, Switch, Transform, WNode, Workflow

_PLACEHOLDER = re.compile(r"\{([^{}]+)\}")


@dataclass(frozen=True)
class MockBehavior:
    """Output templates per (service, operation); ``{Tag}`` is replaced from the call's inputs."""
    outputs: Mapping[tuple[str, str], Mapping[str, str]]

    def check_against(self, r: Registry) -> None:
        for ref in sorted(self.outputs):
            if r.operation(ref) is None:
                raise MissingMockError(f"mock targets unknown operation {ref[0]}.{ref[1]}")

    def call(self, service: str, operation: str, inputs: Mapping[str, str]) -> Message:
        template = self.outputs.get((service, operation))
        if template is None:
            raise MissingMockError(f"no mock for {service}.{operation}")

        def fill(m: re.Match) -> str:
            tag = m.group(1)
            if tag not in inputs:
                raise MissingTagError(f"mock {service}.{operation} refers to absent input {tag!r}")
            return inputs[tag]

        return {tag: _PLACEHOLDER.sub(fill, text) for tag, text in template.items()}


def load_mocks(document: Any) -> MockBehavior:
    data = expect_object(read_document(document, "mocks"), "mocks", allowed={"mocks"}, required=("mocks",))
    outputs: dict[tuple[str, str], dict[str, str]] = {}
    for i, raw in enumerate(expect_list(data["mocks"], "mocks")):
        where = f"mocks[{i}]"
        obj = expect_object(raw, where, allowed={"service", "operation", "output"},
                            required=("service", "operation"))
        ref = (expect_str(obj["service"], f"{where}.service"), expect_str(obj["operation"], f"{where}.operation"))
        if ref in outputs:
            raise ParseError(f"duplicate mock for {ref[0]}.{ref[1]}", where)
        outputs[ref] = str_map(obj.get("output", {}), f"{where}.output")
    return MockBehavior(outputs)


def load_message(document: Any, what: str = "message") -> Message:
    return str_map(read_document(document, what), what)


def load_prompts(document: Any) -> dict[str, Message]:
    data = expect_object(read_document(document, "prompt file"), "prompts")
    return {stub: str_map(values, f"prompts.{stub}") for stub, values in data.items()}


def _case_matches(condition: str, msg: Mapping[str, str]) -> bool:
    tag, sep, value = condition.partition("=")
    return bool(sep) and msg.get(tag.strip()) == value.strip()


class Simulator:
    def __init__(self, specs: Mapping[str, TransformationSpec], mocks: MockBehavior,
                 prompts: Mapping[str, Mapping[str, str]] | None = None):
        self.specs = specs
        self.mocks = mocks
        self.prompts = prompts or {}
        self.trace: list[str] = []

    def run(self, w: Workflow, message: Mapping[str, str]) -> Message:
        return self._node(w.body, dict(message))

    def _node(self, node: WNode, msg: Message) -> Message:
        if isinstance(node, Sequence):
            pending: Message | None = None
            for child in node.children:
                if isinstance(child, Transform):
                    pending = apply_transformation(self._spec(child.spec), msg)
                    self.trace.append(f"transform {child.spec}")
                elif isinstance(child, Invoke):
                    msg = self._invoke(child, msg, pending)
                    pending = None
                else:
                    msg = self._node(child, msg)
            return msg
        if isinstance(node, Flow):
            merged = dict(msg)
            origin: dict[str, int] = {}
            for i, branch in enumerate(node.branches):
                out = self._node(branch, dict(msg))
                for tag, value in out.items():
                    if tag in msg and msg[tag] == value:
                        continue
                    if tag in origin:
                        raise MessageConflictError(
                            f"parallel branches {origin[tag]} and {i} both set tag {tag!r}")
                    origin[tag] = i
                    merged[tag] = value
            return merged
        if isinstance(node, Switch):
            default = None
            for case in node.cases:
                if not case.condition.strip():
                    default = default or case
                elif _case_matches(case.condition, msg):
                    return self._node(case.body, msg)
            if default is None:
                raise NoMatchingCaseError("no switch case matches the message")
            return self._node(default.body, msg)
        if isinstance(node, HumanTask):
            values = self.prompts.get(node.stub)
            if values is None:
                raise HumanTaskPending(f"human task {node.stub!r} needs values from a prompt file")
            self.trace.append(f"human {node.stub}")
            return {**msg, **values}
        if isinstance(node, Invoke):
            return self._invoke(node, msg, None)
        # a Transform outside a sequence cannot precede anything
        raise MissingSpecError(f"stray transform {node!r}")

    def _spec(self, spec_id: str) -> TransformationSpec:
        spec = self.specs.get(spec_id)
        if spec is None:
            raise MissingSpecError(f"no transformation spec {spec_id!r}")
        return spec

    def _invoke(self, node: Invoke, msg: Message, pending: Message | None) -> Message:
        if pending is None:
            # copy-only transformations have no Transform node; run them here
            pending = apply_transformation(self._spec(node.transform), msg) if node.transform else {}
        self.trace.append(f"invoke {node.service}.{node.operation}")
        return {**msg, **self.mocks.call(node.service, node.operation, pending)}


def simulate(w: Workflow, specs: Mapping[str, TransformationSpec], mocks: MockBehavior,
             message: Mapping[str, str], prompts: Mapping[str, Mapping[str, str]] | None = None) -> Message:
    return Simulator(specs, mocks, prompts).run(w, message)

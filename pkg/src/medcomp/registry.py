"""File-based technical-service registry and the cheap pre-matchmaking filters."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Iterable

from ._json import expect_list, expect_object, expect_str, read_document, str_map
from .errors import DuplicateIdError, ParseError
from .procmodel import Annotation, TagSpec, parse_tags


@dataclass(frozen=True)
class OperationDescriptor:
    service_id: str
    id: str
    name: str
    operation_concept: str
    inputs: tuple[TagSpec, ...] = ()
    outputs: tuple[TagSpec, ...] = ()
    behaviour: tuple[str, ...] | None = None

    @property
    def ref(self) -> tuple[str, str]:
        return (self.service_id, self.id)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "id": self.id,
            "name": self.name,
            "operation": self.operation_concept,
            "inputs": [t.to_dict() for t in self.inputs],
            "outputs": [t.to_dict() for t in self.outputs],
        }
        if self.behaviour is not None:
            out["behaviour"] = list(self.behaviour)
        return out


@dataclass(frozen=True)
class ServiceDescriptor:
    id: str
    name: str
    endpoint: str
    partner: str
    domain: str
    nfr: dict[str, str] = field(default_factory=dict, hash=False)
    operations: tuple[OperationDescriptor, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "name": self.name,
            "endpoint": self.endpoint,
            "partner": self.partner,
            "domain": self.domain,
            "nfr": dict(sorted(self.nfr.items())),
            "operations": [op.to_dict() for op in self.operations],
        }


@dataclass(frozen=True)
class FilterCriteria:
    partner: str | None = None
    domain: str | None = None
    nfr_required: dict[str, str] = field(default_factory=dict, hash=False)

    @classmethod
    def from_annotation(cls, ann: Annotation) -> "FilterCriteria":
        return cls(ann.partner, ann.domain, dict(ann.nfr))

    def accepts(self, service: ServiceDescriptor) -> bool:
        if self.partner is not None and service.partner != self.partner:
            return False
        if self.domain is not None and service.domain != self.domain:
            return False
        return all(service.nfr.get(k) == v for k, v in self.nfr_required.items())


class Registry:
    def __init__(self, services: Iterable[ServiceDescriptor] = ()):
        self.services: dict[str, ServiceDescriptor] = {}
        for s in services:
            if s.id in self.services:
                raise DuplicateIdError(f"duplicate service id {s.id!r}")
            op_ids = [op.id for op in s.operations]
            if len(set(op_ids)) != len(op_ids):
                raise DuplicateIdError(f"duplicate operation id in service {s.id!r}")
            self.services[s.id] = s

        self.by_partner: dict[str, list[str]] = defaultdict(list)
        self.by_domain: dict[str, list[str]] = defaultdict(list)
        self.by_concept: dict[str, list[tuple[str, str]]] = defaultdict(list)
        for sid in sorted(self.services):
            s = self.services[sid]
            self.by_partner[s.partner].append(sid)
            self.by_domain[s.domain].append(sid)
            for op in sorted(s.operations, key=lambda o: o.id):
                self.by_concept[op.operation_concept].append(op.ref)

    def operations(self) -> list[OperationDescriptor]:
        return [op for sid in sorted(self.services)
                for op in sorted(self.services[sid].operations, key=lambda o: o.id)]

    def operation(self, ref: tuple[str, str]) -> OperationDescriptor | None:
        service = self.services.get(ref[0])
        if service is None:
            return None
        for op in service.operations:
            if op.id == ref[1]:
                return op
        return None

    def __len__(self) -> int:
        return len(self.services)

    def to_dict(self) -> dict[str, Any]:
        return {"services": [self.services[s].to_dict() for s in sorted(self.services)]}


def prefilter(r: Registry, c: FilterCriteria) -> list[OperationDescriptor]:
    """Operations of every service satisfying all present criteria, by (service, operation) id."""
    return [op for op in r.operations() if c.accepts(r.services[op.service_id])]


_SERVICE_KEYS = {"id", "name", "endpoint", "partner", "domain", "nfr", "operations"}
_OP_KEYS = {"id", "name", "operation", "inputs", "outputs", "behaviour"}


def _parse_operation(raw: Any, service_id: str, where: str) -> OperationDescriptor:
    obj = expect_object(raw, where, allowed=_OP_KEYS, required=("id", "operation"))
    behaviour = obj.get("behaviour")
    if behaviour is not None:
        behaviour = tuple(expect_str(c, f"{where}.behaviour[{i}]")
                          for i, c in enumerate(expect_list(behaviour, f"{where}.behaviour")))
    op_id = expect_str(obj["id"], f"{where}.id")
    return OperationDescriptor(
        service_id=service_id,
        id=op_id,
        name=expect_str(obj.get("name", op_id), f"{where}.name"),
        operation_concept=expect_str(obj["operation"], f"{where}.operation"),
        inputs=parse_tags(obj.get("inputs", []), f"{where}.inputs"),
        outputs=parse_tags(obj.get("outputs", []), f"{where}.outputs"),
        behaviour=behaviour,
    )


def _parse_service(raw: Any, where: str) -> ServiceDescriptor:
    obj = expect_object(raw, where, allowed=_SERVICE_KEYS, required=("id", "operations"))
    sid = expect_str(obj["id"], f"{where}.id")
    ops_raw = expect_list(obj["operations"], f"{where}.operations")
    if not ops_raw:
        raise ParseError(f"service {sid!r} declares no operations", where)
    return ServiceDescriptor(
        id=sid,
        name=expect_str(obj.get("name", sid), f"{where}.name"),
        endpoint=expect_str(obj.get("endpoint", ""), f"{where}.endpoint", allow_empty=True),
        partner=expect_str(obj.get("partner", ""), f"{where}.partner", allow_empty=True),
        domain=expect_str(obj.get("domain", ""), f"{where}.domain", allow_empty=True),
        nfr=str_map(obj.get("nfr"), f"{where}.nfr"),
        operations=tuple(_parse_operation(o, sid, f"{where}.operations[{i}]")
                         for i, o in enumerate(ops_raw)),
    )


def load_registry(document: Any) -> Registry:
    data = expect_object(read_document(document, "registry"), "registry", allowed={"services"},
                         required=("services",))
    return Registry(_parse_service(s, f"services[{i}]")
                    for i, s in enumerate(expect_list(data["services"], "services")))

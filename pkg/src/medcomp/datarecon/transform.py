"""Per-input transformation recipes: generation at design time, execution at run time."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence, Union

from .._json import expect_list, expect_object, expect_str, read_document
from ..config import MatchConfig
from ..errors import MissingTagError, ParseError, UnboundTagError, UnknownFormatError, UnknownTableError
from ..ontology import Ontology
from ..procmodel import TagSpec
from .binding import COMPOSITE, Binding, PartSource, bind_one
from .catalog import DataCatalog
from .expr import format_decimal, parse_number
from .formats import FormatDatabase, FormatDecomposition
from .tables import LookupTable
from .units import UnitConversion, derive_unit_step

Message = dict[str, str]


@dataclass(frozen=True)
class Copy:
    source: str


@dataclass(frozen=True)
class Parse:
    source: str
    decomposition: str


@dataclass(frozen=True)
class Assemble:
    decomposition: str
    parts: tuple[PartSource, ...]


@dataclass(frozen=True)
class Convert:
    conversion: str


@dataclass(frozen=True)
class Lookup:
    table: str


Step = Union[Copy, Parse, Assemble, Convert, Lookup]


def _step_to_dict(step: Step) -> dict[str, Any]:
    if isinstance(step, Copy):
        return {"op": "copy", "source": step.source}
    if isinstance(step, Parse):
        return {"op": "parse", "source": step.source, "decomposition": step.decomposition}
    if isinstance(step, Assemble):
        parts = {}
        for ps in step.parts:
            ref = {"source": ps.source}
            if ps.source_part is not None:
                ref["part"] = ps.source_part
            parts[ps.part] = ref
        return {"op": "assemble", "decomposition": step.decomposition, "parts": parts}
    if isinstance(step, Convert):
        return {"op": "convert", "conversion": step.conversion}
    return {"op": "lookup", "table": step.table}


def _step_from_dict(raw: Any, where: str) -> Step:
    obj = expect_object(raw, where, required=("op",))
    op = obj["op"]
    if op == "copy":
        expect_object(obj, where, allowed={"op", "source"}, required=("source",))
        return Copy(expect_str(obj["source"], f"{where}.source"))
    if op == "parse":
        expect_object(obj, where, allowed={"op", "source", "decomposition"}, required=("source", "decomposition"))
        return Parse(expect_str(obj["source"], f"{where}.source"),
                     expect_str(obj["decomposition"], f"{where}.decomposition"))
    if op == "assemble":
        expect_object(obj, where, allowed={"op", "decomposition", "parts"}, required=("decomposition", "parts"))
        parts = []
        for part, ref in expect_object(obj["parts"], f"{where}.parts").items():
            ref = expect_object(ref, f"{where}.parts.{part}", allowed={"source", "part"}, required=("source",))
            parts.append(PartSource(part, expect_str(ref["source"], f"{where}.parts.{part}.source"),
                                    ref.get("part")))
        return Assemble(expect_str(obj["decomposition"], f"{where}.decomposition"), tuple(parts))
    if op == "convert":
        expect_object(obj, where, allowed={"op", "conversion"}, required=("conversion",))
        return Convert(expect_str(obj["conversion"], f"{where}.conversion"))
    if op == "lookup":
        expect_object(obj, where, allowed={"op", "table"}, required=("table",))
        return Lookup(expect_str(obj["table"], f"{where}.table"))
    raise ParseError(f"unknown step {op!r}", where)


@dataclass(frozen=True)
class InputRecipe:
    target: TagSpec
    sources: tuple[str, ...]
    steps: tuple[Step, ...]
    binding: str = "direct"  # binding kind, or "unbound"

    @property
    def unbound(self) -> bool:
        return self.binding == "unbound"


@dataclass(frozen=True)
class TransformationSpec:
    id: str
    service: str
    operation: str
    inputs: tuple[InputRecipe, ...]
    decompositions: Mapping[str, FormatDecomposition] = field(default_factory=dict, hash=False)
    conversions: Mapping[str, UnitConversion] = field(default_factory=dict, hash=False)
    tables: Mapping[str, LookupTable] = field(default_factory=dict, hash=False)
    places: int = 6

    def __post_init__(self) -> None:
        tags = [r.target.tag for r in self.inputs]
        if len(set(tags)) != len(tags):
            raise ParseError(f"transformation {self.id!r}: target tags must be unique")
        for r in self.inputs:
            for step in r.steps:
                if isinstance(step, (Parse, Assemble)) and step.decomposition not in self.decompositions:
                    raise UnknownFormatError(f"transformation {self.id!r} references unknown "
                                             f"decomposition {step.decomposition!r}")
                if isinstance(step, Convert) and step.conversion not in self.conversions:
                    raise ParseError(f"transformation {self.id!r} references unknown conversion "
                                     f"{step.conversion!r}")
                if isinstance(step, Lookup) and step.table not in self.tables:
                    raise UnknownTableError(f"transformation {self.id!r} references unknown table "
                                            f"{step.table!r}")

    @property
    def only_copies(self) -> bool:
        return all(not r.unbound and all(isinstance(s, Copy) for s in r.steps) for r in self.inputs)

    @property
    def unbound_tags(self) -> list[str]:
        return [r.target.tag for r in self.inputs if r.unbound]

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "target": {"service": self.service, "operation": self.operation},
            "places": self.places,
            "inputs": [
                {
                    "target": r.target.to_dict(),
                    "binding": r.binding,
                    "sources": list(r.sources),
                    "steps": [_step_to_dict(s) for s in r.steps],
                }
                for r in self.inputs
            ],
            "decompositions": {k: v.to_dict() for k, v in sorted(self.decompositions.items())},
            "conversions": {k: v.to_dict() for k, v in sorted(self.conversions.items())},
            "tables": {k: v.to_dict() for k, v in sorted(self.tables.items())},
        }


_SPEC_KEYS = {"id", "target", "places", "inputs", "decompositions", "conversions", "tables"}


def load_spec(document: Any) -> TransformationSpec:
    data = expect_object(read_document(document, "transformation spec"), "spec", allowed=_SPEC_KEYS,
                         required=("id", "target", "inputs"))
    target = expect_object(data["target"], "spec.target", allowed={"service", "operation"},
                           required=("service", "operation"))
    inputs = []
    for i, raw in enumerate(expect_list(data["inputs"], "spec.inputs")):
        where = f"spec.inputs[{i}]"
        obj = expect_object(raw, where, allowed={"target", "binding", "sources", "steps"},
                            required=("target", "steps"))
        inputs.append(InputRecipe(
            TagSpec.from_dict(obj["target"], f"{where}.target"),
            tuple(expect_str(s, f"{where}.sources") for s in expect_list(obj.get("sources", []), f"{where}.sources")),
            tuple(_step_from_dict(s, f"{where}.steps[{j}]")
                  for j, s in enumerate(expect_list(obj["steps"], f"{where}.steps"))),
            expect_str(obj.get("binding", "direct"), f"{where}.binding"),
        ))
    places = data.get("places", 6)
    if isinstance(places, bool) or not isinstance(places, int) or places < 0:
        raise ParseError("places must be a non-negative integer", "spec.places")
    return TransformationSpec(
        id=expect_str(data["id"], "spec.id"),
        service=expect_str(target["service"], "spec.target.service"),
        operation=expect_str(target["operation"], "spec.target.operation"),
        inputs=tuple(inputs),
        decompositions={k: FormatDecomposition.from_dict(v, f"spec.decompositions.{k}")
                        for k, v in expect_object(data.get("decompositions", {}), "spec.decompositions").items()},
        conversions={k: UnitConversion.from_dict(v, f"spec.conversions.{k}")
                     for k, v in expect_object(data.get("conversions", {}), "spec.conversions").items()},
        tables={k: LookupTable.from_dict(v, f"spec.tables.{k}")
                for k, v in expect_object(data.get("tables", {}), "spec.tables").items()},
        places=places,
    )


# design time ---------------------------------------------------------------

def derive_format_steps(binding: Binding, formats: FormatDatabase) -> list[Step]:
    """Parse/Assemble steps turning the bound source value(s) into the target format."""
    r = binding.target
    if binding.kind == COMPOSITE:
        target = formats.require(r.concept, r.format)
        steps: list[Step] = []
        by_tag = {s.tag: s for s in binding.sources}
        for tag in dict.fromkeys(ps.source for ps in binding.parts if ps.source_part is not None):
            src = by_tag[tag]
            steps.append(Parse(tag, formats.require(src.concept, src.format).key))
        steps.append(Assemble(target.key, binding.parts))
        return steps
    s = binding.source
    if s.format == r.format:
        return [Copy(s.tag)]
    source_d = formats.require(s.concept, s.format)
    target_d = formats.require(r.concept, r.format)
    available = set(source_d.part_concepts)
    missing = [p for p in target_d.part_concepts if p not in available]
    if missing:
        raise UnknownFormatError(f"format {source_d.key} does not provide part(s) {missing} "
                                 f"required by {target_d.key}")
    return [Parse(s.tag, source_d.key),
            Assemble(target_d.key, tuple(PartSource(p, s.tag, p) for p in target_d.part_concepts))]


@dataclass
class UnboundReport:
    """Tags no upstream output could feed; ``spec`` still lists them, flagged unbound."""
    spec: TransformationSpec
    unbound: list[TagSpec]

    @property
    def unbound_tags(self) -> list[str]:
        return [t.tag for t in self.unbound]


def generate_transformation_spec(
    spec_id: str,
    service: str,
    operation: str,
    target_inputs: Sequence[TagSpec],
    upstream: Sequence[TagSpec],
    o: Ontology,
    catalog: DataCatalog,
    cfg: MatchConfig,
) -> TransformationSpec | UnboundReport:
    recipes: list[InputRecipe] = []
    unbound: list[TagSpec] = []
    decomps: dict[str, FormatDecomposition] = {}
    conversions: dict[str, UnitConversion] = {}
    tables: dict[str, LookupTable] = {}
    formats, units = catalog.formats, catalog.units

    for r in target_inputs:
        binding = bind_one(r, upstream, o, formats, cfg, units)
        if binding is None:
            unbound.append(r)
            recipes.append(InputRecipe(r, (), (), "unbound"))
            continue
        steps = derive_format_steps(binding, formats)
        for step in steps:
            if isinstance(step, Parse):
                decomps[step.decomposition] = _by_key(formats, step.decomposition)
            elif isinstance(step, Assemble):
                decomps[step.decomposition] = _by_key(formats, step.decomposition)
        if binding.kind != COMPOSITE:
            conv = derive_unit_step(binding.source.unit, r.unit, units)
            if conv is not None:
                conversions[conv.key] = conv
                steps.append(Convert(conv.key))
        if r.lookup is not None:
            table = catalog.tables.get(r.lookup)
            if table is None:
                raise UnknownTableError(f"input {r.tag!r} names unknown lookup table {r.lookup!r}")
            tables[table.id] = table
            steps.append(Lookup(table.id))
        recipes.append(InputRecipe(r, tuple(s.tag for s in binding.sources), tuple(steps), binding.kind))

    spec = TransformationSpec(spec_id, service, operation, tuple(recipes), decomps, conversions, tables,
                              cfg.places)
    return UnboundReport(spec, unbound) if unbound else spec


def _by_key(formats: FormatDatabase, key: str) -> FormatDecomposition:
    concept, _, fmt = key.rpartition("@")
    return formats.require(concept, fmt)


# run time ----------------------------------------------------------------

def _get(msg: Mapping[str, str], tag: str) -> str:
    try:
        return msg[tag]
    except KeyError:
        raise MissingTagError(f"message has no tag {tag!r}") from None


def apply_recipe(spec: TransformationSpec, recipe: InputRecipe, msg: Mapping[str, str]) -> str:
    if recipe.unbound:
        raise UnboundTagError(f"input {recipe.target.tag!r} of {spec.id!r} has no binding")
    current: str | None = None
    parts: dict[tuple[str, str], str] = {}
    for step in recipe.steps:
        if isinstance(step, Copy):
            current = _get(msg, step.source)
        elif isinstance(step, Parse):
            values = spec.decompositions[step.decomposition].parse(_get(msg, step.source))
            for part, value in values.items():
                parts[(step.source, part)] = value
        elif isinstance(step, Assemble):
            filled = {}
            for ps in step.parts:
                filled[ps.part] = (parts[(ps.source, ps.source_part)] if ps.source_part is not None
                                   else _get(msg, ps.source))
            current = spec.decompositions[step.decomposition].assemble(filled)
        elif isinstance(step, Convert):
            conv = spec.conversions[step.conversion]
            current = format_decimal(conv.parsed.evaluate_exact(parse_number(current or "")), spec.places)
        else:
            current = spec.tables[step.table].replace(current or "")
    if current is None:
        raise ParseError(f"recipe for {recipe.target.tag!r} produces no value")
    return current


def apply_transformation(spec: TransformationSpec, msg: Mapping[str, str]) -> Message:
    """Build the target operation's input message from an upstream message."""
    return {r.target.tag: apply_recipe(spec, r, msg) for r in spec.inputs}

"""Informational reconciliation: bind inputs to upstream outputs and transform values."""

from .binding import Binding, BindingResult, PartSource, bind_concepts
from .catalog import DataCatalog, default_formats
from .expr import Expression, evaluate, format_decimal, parse_expression
from .formats import FormatDatabase, FormatDecomposition, Part, load_formats
from .tables import LookupTable, TableSet, load_tables
from .transform import (
    Assemble,
    Convert,
    Copy,
    InputRecipe,
    Lookup,
    Message,
    Parse,
    TransformationSpec,
    UnboundReport,
    apply_transformation,
    derive_format_steps,
    generate_transformation_spec,
    load_spec,
)
from .units import UnitConversion, UnitDatabase, derive_unit_step, load_units
from .xslt import render_xslt

__all__ = [
    "Assemble", "Binding", "BindingResult", "Convert", "Copy", "DataCatalog", "Expression",
    "FormatDatabase", "FormatDecomposition", "InputRecipe", "Lookup", "LookupTable", "Message",
    "Parse", "Part", "PartSource", "TableSet", "TransformationSpec", "UnboundReport",
    "UnitConversion", "UnitDatabase", "apply_transformation", "bind_concepts", "default_formats",
    "derive_format_steps", "derive_unit_step", "evaluate", "format_decimal",
    "generate_transformation_spec", "load_formats", "load_spec", "load_tables", "load_units",
    "parse_expression", "render_xslt",
]

"""Render a transformation spec as an XSLT 1.0 stylesheet.

Messages are rendered as ``<message><Tag>value</Tag>...</message>``. Value
parsing is expressed with substring functions, so only fixed-width parts or
parts followed by a literal separator can be rendered.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from xml.sax.saxutils import escape, quoteattr

try:  # Python >= 3.11
    from re import _constants as sre_constants
    from re import _parser as sre_parse
except ImportError:  # pragma: no cover
    import sre_constants
    import sre_parse

from ..errors import SerializationError, UnsupportedPatternError
from .formats import FormatDecomposition
from .transform import Assemble, Convert, Copy, InputRecipe, Lookup, Parse, TransformationSpec

XSL_NS = "http://www.w3.org/1999/XSL/Transform"
_NCNAME = re.compile(r"[A-Za-z_][\w.\-]*\Z")
_UNSUPPORTED = {
    sre_constants.GROUPREF: "backreference",
    sre_constants.GROUPREF_EXISTS: "conditional group",
    sre_constants.ASSERT: "lookahead/lookbehind",
    sre_constants.ASSERT_NOT: "negative lookaround",
    sre_constants.AT: "anchor",
}


def _check_dialect(pattern: str) -> tuple[int, int]:
    """Width (min, max) of a part pattern, rejecting constructs XPath cannot express."""
    parsed = sre_parse.parse(pattern)

    def walk(items) -> None:
        for op, av in items:
            if op in _UNSUPPORTED:
                raise UnsupportedPatternError(f"pattern {pattern!r} uses a {_UNSUPPORTED[op]}")
            if op is sre_constants.SUBPATTERN:
                walk(av[-1])
            elif op in (sre_constants.MAX_REPEAT, sre_constants.MIN_REPEAT):
                walk(av[2])
            elif op is sre_constants.BRANCH:
                for alt in av[1]:
                    walk(alt)

    walk(parsed)
    return parsed.getwidth()


def _literal(text: str) -> str:
    if "'" not in text:
        return f"'{text}'"
    if '"' not in text:
        return f'"{text}"'
    raise UnsupportedPatternError(f"literal {text!r} mixes both quote characters")


def _part_expressions(d: FormatDecomposition, source: str) -> dict[str, str]:
    patterns = {p.concept: p.pattern for p in d.parts}
    segments = d.segments()
    out: dict[str, str] = {}
    rest = source
    i = 0
    while i < len(segments):
        kind, text = segments[i]
        if kind == "literal":
            rest = f"substring({rest}, {len(text) + 1})"
            i += 1
            continue
        lo, hi = _check_dialect(patterns[text])
        if lo == hi:
            out[text] = f"substring({rest}, 1, {lo})"
            rest = f"substring({rest}, {lo + 1})"
            i += 1
        elif i + 1 == len(segments):
            out[text] = rest
            i += 1
        elif segments[i + 1][0] == "literal":
            sep = _literal(segments[i + 1][1])
            out[text] = f"substring-before({rest}, {sep})"
            rest = f"substring-after({rest}, {sep})"
            i += 2
        else:
            raise UnsupportedPatternError(
                f"variable-width part {text!r} of {d.key} is not followed by a separator")
    return out


def _xpath_source(tag: str) -> str:
    if not _NCNAME.match(tag):
        raise SerializationError(f"tag {tag!r} is not a valid XML element name")
    return f"/message/{tag}"


def _recipe_body(spec: TransformationSpec, recipe: InputRecipe) -> list[str]:
    lines: list[str] = []
    counter = 0
    current = ""
    parts: dict[tuple[str, str], str] = {}

    def bind(expr: str) -> str:
        nonlocal counter
        counter += 1
        name = f"v{counter}"
        lines.append(f"<xsl:variable name={quoteattr(name)} select={quoteattr(expr)}/>")
        return f"${name}"

    for step in recipe.steps:
        if isinstance(step, Copy):
            current = bind(f"string({_xpath_source(step.source)})")
        elif isinstance(step, Parse):
            d = spec.decompositions[step.decomposition]
            for part, expr in _part_expressions(d, _xpath_source(step.source)).items():
                parts[(step.source, part)] = bind(expr)
        elif isinstance(step, Assemble):
            d = spec.decompositions[step.decomposition]
            refs = {ps.part: (parts[(ps.source, ps.source_part)] if ps.source_part is not None
                              else f"string({_xpath_source(ps.source)})") for ps in step.parts}
            args = [refs[text] if kind == "part" else _literal(text) for kind, text in d.segments()]
            current = bind(f"concat({', '.join(args)})" if len(args) > 1 else f"string({args[0]})")
        elif isinstance(step, Convert):
            expr = spec.conversions[step.conversion].parsed
            arith = expr.render(lambda _name, v=current: f"number({v})", div="div")
            picture = "0." + "#" * spec.places if spec.places else "0"
            current = bind(f"format-number({arith}, '{picture}')")
        elif isinstance(step, Lookup):
            counter += 1
            name = f"v{counter}"
            lines.append(f"<xsl:variable name={quoteattr(name)}>")
            lines.append("  <xsl:choose>")
            for key, value in sorted(spec.tables[step.table].entries.items()):
                lines.append(f"    <xsl:when test={quoteattr(f'{current} = {_literal(key)}')}>"
                             f"{escape(value)}</xsl:when>")
            lines.append("    <xsl:otherwise><xsl:message terminate=\"yes\">lookup miss in table "
                         f"{escape(step.table)}</xsl:message></xsl:otherwise>")
            lines.append("  </xsl:choose>")
            lines.append("</xsl:variable>")
            current = f"${name}"
    tag = recipe.target.tag
    _xpath_source(tag)
    lines.append(f"<{tag}><xsl:value-of select={quoteattr(current)}/></{tag}>")
    return lines


def render_xslt(spec: TransformationSpec) -> str:
    """XSLT 1.0 stylesheet producing the target input message from an upstream message."""
    if spec.unbound_tags:
        raise UnsupportedPatternError(f"spec {spec.id!r} has unbound inputs {spec.unbound_tags}")
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<xsl:stylesheet version="1.0" xmlns:xsl="{XSL_NS}">',
        '  <xsl:output method="xml" indent="yes" encoding="UTF-8"/>',
        '  <xsl:template match="/message">',
        "    <message>",
    ]
    for i, _recipe in enumerate(spec.inputs):
        out.append(f'      <xsl:call-template name="input-{i}"/>')
    out += ["    </message>", "  </xsl:template>"]
    for i, recipe in enumerate(spec.inputs):
        out.append(f'  <xsl:template name="input-{i}">')
        out.extend("    " + line for line in _recipe_body(spec, recipe))
        out.append("  </xsl:template>")
    out.append("</xsl:stylesheet>")
    text = "\n".join(out) + "\n"
    try:
        ET.fromstring(text.encode("utf-8"))
    except ET.ParseError as exc:  # pragma: no cover - guards the generator itself
        raise SerializationError(f"generated stylesheet is not well-formed: {exc}") from exc
    return text

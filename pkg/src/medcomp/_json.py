"""Small helpers for reading the JSON file formats."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .errors import ParseError


def read_document(document: Any, what: str) -> Any:
    """Accept raw JSON text/bytes or an already decoded object."""
    if isinstance(document, (bytes, bytearray)):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"{what} is not valid UTF-8: {exc}") from exc
    if isinstance(document, str):
        try:
            return json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(
                f"invalid JSON in {what}: {exc.msg}", f"line {exc.lineno} column {exc.colno}"
            ) from exc
    return document


def read_file(path: str | Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def dumps(obj: Any) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def expect_object(value: Any, where: str, allowed: set[str] | None = None,
                  required: tuple[str, ...] = ()) -> dict:
    if not isinstance(value, dict):
        raise ParseError("expected a JSON object", where)
    if allowed is not None:
        unknown = sorted(set(value) - allowed)
        if unknown:
            raise ParseError(f"unknown keys {unknown}", where)
    for key in required:
        if key not in value:
            raise ParseError(f"missing required key {key!r}", where)
    return value


def expect_list(value: Any, where: str) -> list:
    if not isinstance(value, list):
        raise ParseError("expected a JSON array", where)
    return value


def expect_str(value: Any, where: str, *, allow_empty: bool = False) -> str:
    if not isinstance(value, str) or (not allow_empty and not value):
        raise ParseError("expected a non-empty string", where)
    return value


def opt_str(obj: dict, key: str, where: str) -> str | None:
    value = obj.get(key)
    if value is None:
        return None
    return expect_str(value, f"{where}.{key}")


def str_map(value: Any, where: str) -> dict[str, str]:
    if value is None:
        return {}
    expect_object(value, where)
    for k, v in value.items():
        if not isinstance(v, str):
            raise ParseError(f"value for {k!r} must be a string", where)
    return dict(value)

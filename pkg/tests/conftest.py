from __future__ import annotations

import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).parent
sys.path.insert(0, str(TESTS))

from medcomp.datarecon.catalog import DataCatalog, default_formats  # noqa: E402
from medcomp.datarecon.units import load_units  # noqa: E402
from medcomp.ontology import load_ontology  # noqa: E402
from medcomp.procmodel import parse_process  # noqa: E402
from medcomp.registry import load_registry  # noqa: E402

SENSOR = Path(__file__).resolve().parents[1] / "src" / "medcomp" / "data" / "sensor"
FIXTURES = TESTS / "fixtures"


@pytest.fixture
def sensor_dir() -> Path:
    return SENSOR


@pytest.fixture
def sensor():
    """(process, registry, ontology, catalog) of the shipped sensor scenario."""
    p = parse_process((SENSOR / "process.json").read_text("utf-8"))
    r = load_registry((SENSOR / "registry.json").read_text("utf-8"))
    o = load_ontology((SENSOR / "ontology.json").read_text("utf-8"))
    units = load_units((SENSOR / "units.json").read_text("utf-8"))
    return p, r, o, DataCatalog(default_formats(), units)

FIXTURE_NAMES = sorted(d.name for d in FIXTURES.iterdir() if d.is_dir())


def load_fixture(name: str):
    """(process, registry, ontology) of one directory under tests/fixtures."""
    d = FIXTURES / name
    return (parse_process((d / "process.json").read_text("utf-8")),
            load_registry((d / "registry.json").read_text("utf-8")),
            load_ontology((d / "ontology.json").read_text("utf-8")))


def compile_fixture(name: str, **kwargs):
    from medcomp.datarecon.catalog import DataCatalog, default_formats
    from medcomp.pipeline import compile_process

    p, r, o = load_fixture(name)
    return p, compile_process(p, r, o, DataCatalog(default_formats()), **kwargs)

"""Command-line driver: compile, match, transform, simulate.

Exit codes: 0 success, 2 partial coverage (or a human task without input),
1 any error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Any, Sequence, TextIO

from ._json import dumps, read_file
from .config import MatchConfig, load_config
from .datarecon.catalog import DataCatalog, default_formats
from .datarecon.formats import load_formats
from .datarecon.tables import TableSet, load_tables
from .datarecon.transform import TransformationSpec, apply_transformation, load_spec
from .datarecon.units import UnitDatabase, load_units
from .errors import HumanTaskPending, MediationError
from .matchmaker import match_process, rank_candidates
from .ontology import Ontology, load_ontology
from .patterns import PatternDatabase
from .pipeline import CompileResult, compile_process
from .procmodel import ProcessModel, parse_process
from .registry import Registry, load_registry
from .simulate import Simulator, load_message, load_mocks, load_prompts
from .textsim import Metric
from .wfgen import serialize_workflow, validate_workflow

EXIT_OK, EXIT_ERROR, EXIT_PARTIAL = 0, 1, 2


class _FileError(MediationError):
    pass


def _read(path: str | Path) -> str:
    try:
        return read_file(path)
    except OSError as exc:
        raise _FileError(f"cannot read {path}: {exc.strerror or exc}") from None


def _load(path: str | Path, loader: Any) -> Any:
    try:
        return loader(_read(path))
    except _FileError:
        raise
    except MediationError as exc:
        # keep the error class, prefix the file for context
        exc.args = (f"{path}: {exc}",)
        raise


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


def _config(args: argparse.Namespace) -> MatchConfig:
    cfg = _load(args.config, load_config) if args.config else MatchConfig()
    overrides = {k: getattr(args, k) for k in ("metric", "alpha", "sigma", "tau", "k", "m")
                 if getattr(args, k) is not None}
    if "metric" in overrides:
        overrides["metric"] = Metric.parse(overrides["metric"])
    return cfg.with_overrides(**overrides) if overrides else cfg


def _catalog(args: argparse.Namespace) -> DataCatalog:
    formats = default_formats()
    if args.formats:
        formats = formats.merged(_load(args.formats, load_formats))
    units = _load(args.units, load_units) if args.units else UnitDatabase()
    tables = _load(args.tables, load_tables) if args.tables else TableSet()
    return DataCatalog(formats, units, tables)


def _inputs(args: argparse.Namespace) -> tuple[ProcessModel, Registry, Ontology]:
    return (_load(args.process, parse_process), _load(args.registry, load_registry),
            _load(args.ontology, load_ontology))


def write_outputs(result: CompileResult, out_dir: Path, report_path: Path | None, canonical: bool) -> None:
    """Write every artifact of a compilation; file contents are deterministic."""
    _write(out_dir / "workflow.xml", serialize_workflow(result.workflow))
    for sid, spec in sorted(result.specs.items()):
        _write(out_dir / "specs" / f"{sid}.json", dumps(spec.to_dict()))
    for sid, text in sorted(result.stylesheets.items()):
        _write(out_dir / "xslt" / f"{sid}.xsl", text)
    _write(out_dir / "plan.json", dumps(result.plan.to_dict(canonical)))
    _write(out_dir / "stubs.json", dumps({"stubs": [s.to_dict() for s in result.plan.stubs]}))
    _write(report_path or out_dir / "report.json", dumps(result.report(canonical)))


def cmd_compile(args: argparse.Namespace, out: TextIO) -> int:
    p, r, o = _inputs(args)
    cfg = _config(args)
    catalog = _catalog(args)
    db = PatternDatabase.load(args.patterns) if args.patterns else None
    result = compile_process(p, r, o, catalog, cfg, db, name=Path(args.process).stem)
    out_dir = Path(args.out_dir)
    write_outputs(result, out_dir, Path(args.report) if args.report else None, args.canonical)
    if db is not None:
        db.save(args.patterns)
    covered = len(p.activity_order) - len(result.plan.uncovered)
    print(f"compiled {covered}/{len(p.activity_order)} activities into {out_dir}", file=out)
    for a in result.plan.uncovered:
        print(f"uncovered: {a} (stub-{a})", file=out)
    for sid, tags in sorted(result.unbound.items()):
        print(f"unbound: {sid}: {', '.join(tags)}", file=out)
    return EXIT_PARTIAL if result.partial else EXIT_OK


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def cmd_match(args: argparse.Namespace, out: TextIO) -> int:
    p, r, o = _inputs(args)
    cfg = _config(args)
    catalog = _catalog(args)
    ranking = rank_candidates(p, r, o, cfg, catalog=catalog)
    for g, cands in ranking:
        print(f"group [{', '.join(g.activity_ids)}] ({g.shape})", file=out)
        if not cands:
            print("  no candidates", file=out)
        for i, c in enumerate(cands, 1):
            comp = " -> ".join(f"{s}.{op}" for s, op in c.refs)
            s = c.score
            print(f"  {i}. {comp}  combined={_fmt(s.combined)} logic={_fmt(s.logic)} "
                  f"syntactic={_fmt(s.syntactic)} io={_fmt(s.io_integrity)}", file=out)
    plan = match_process(p, r, o, None, cfg, catalog=catalog)
    print("selected:", file=out)
    for a in plan.assignments:
        comp = " -> ".join(f"{s}.{op}" for s, op in a.refs)
        print(f"  [{', '.join(a.group.activity_ids)}] => {comp}  combined={_fmt(a.score.combined)}", file=out)
    for a in plan.uncovered:
        print(f"  [{a}] => uncovered", file=out)
    return EXIT_PARTIAL if plan.uncovered else EXIT_OK


def cmd_transform(args: argparse.Namespace, out: TextIO) -> int:
    spec = _load(args.spec, load_spec)
    msg = _message(args.message)
    out.write(dumps(apply_transformation(spec, msg)))
    return EXIT_OK


def _message(arg: str) -> dict[str, str]:
    # inline JSON or a file path
    return load_message(arg if arg.lstrip().startswith("{") else _read(arg))


def _load_specs(directory: Path) -> dict[str, TransformationSpec]:
    specs = {}
    if directory.is_dir():
        for path in sorted(directory.glob("*.json")):
            spec = _load(path, load_spec)
            specs[spec.id] = spec
    return specs


def cmd_simulate(args: argparse.Namespace, out: TextIO) -> int:
    if args.workflow is None and args.out_dir is None:
        raise _FileError("simulate needs --workflow or --out-dir")
    base = Path(args.out_dir) if args.out_dir else None
    workflow_path = Path(args.workflow) if args.workflow else base / "workflow.xml"
    workflow = _load(workflow_path, validate_workflow)
    specs = _load_specs(base / "specs") if base else {}
    for path in args.spec or ():
        spec = _load(path, load_spec)
        specs[spec.id] = spec
    mocks = _load(args.mocks, load_mocks)
    if args.registry:
        mocks.check_against(_load(args.registry, load_registry))
    prompts = _load(args.prompt_file, load_prompts) if args.prompt_file else {}
    result = Simulator(specs, mocks, prompts).run(workflow, _message(args.message))
    out.write(dumps(result))
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="medcomp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def model_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--process", required=True, help="process model (JSON)")
        p.add_argument("--registry", required=True, help="service registry (JSON)")
        p.add_argument("--ontology", required=True, help="ontology (JSON)")
        p.add_argument("--formats", help="extra format decompositions (JSON)")
        p.add_argument("--units", help="unit conversions (JSON)")
        p.add_argument("--tables", help="value lookup tables (JSON)")
        p.add_argument("--config", help="matching configuration (JSON)")
        p.add_argument("--metric", choices=["cosine", "extended_jaccard", "jensen_shannon"])
        p.add_argument("--alpha", type=float)
        p.add_argument("--sigma", type=float)
        p.add_argument("--tau", type=float)
        p.add_argument("--k", type=int)
        p.add_argument("--m", type=int)

    c = sub.add_parser("compile", help="compile a process into a workflow and transformations")
    model_args(c)
    c.add_argument("--patterns", help="pattern database (JSON), read and updated")
    c.add_argument("--out-dir", required=True)
    c.add_argument("--report", help="report path (default: <out-dir>/report.json)")
    c.add_argument("--canonical", action="store_true", help="omit timings and provenance")
    c.set_defaults(func=cmd_compile)

    m = sub.add_parser("match", help="show ranked candidate compositions per group")
    model_args(m)
    m.set_defaults(func=cmd_match)

    t = sub.add_parser("transform", help="apply a transformation spec to a message")
    t.add_argument("--spec", required=True)
    t.add_argument("--message", required=True, help="message file or inline JSON object")
    t.set_defaults(func=cmd_transform)

    s = sub.add_parser("simulate", help="run a compiled workflow against mock services")
    s.add_argument("--out-dir", help="compile output directory (workflow.xml and specs/)")
    s.add_argument("--workflow", help="workflow document (overrides <out-dir>/workflow.xml)")
    s.add_argument("--spec", action="append", help="extra transformation spec; repeatable")
    s.add_argument("--mocks", required=True)
    s.add_argument("--message", required=True, help="initial message file or inline JSON object")
    s.add_argument("--prompt-file", help="values for human tasks, keyed by stub id")
    s.add_argument("--registry", help="check that every mock targets a registered operation")
    s.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = _parser().parse_args(argv)
    try:
        return args.func(args, out)
    except HumanTaskPending as exc:
        print(f"pending: {exc}", file=err)
        return EXIT_PARTIAL
    except MediationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=err)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

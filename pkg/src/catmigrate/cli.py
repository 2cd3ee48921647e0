"""Command-line front end.

Verbs: ``validate``, ``migrate``, ``check-adjunction``, ``export-rdf``,
``render``.  Documents load left to right, earlier files serving as the
namespace for later ones.  Diagnostics go to standard error only; reports go
to standard output (JSON with ``--json``).  Exit codes: 0 ok, 1 validation
violation or failed check, 2 parse/usage errors, 3 bound errors.
"""
from __future__ import annotations

import argparse
import csv as csv_module
import io
import json
import sys
import time
from pathlib import Path as FilePath

from . import dsl
from .errors import BoundError, EngineError, ParseError
from .instances import (
    Instance,
    count_morphisms,
    validate_instance,
    validate_morphism,
)
from .migration import (
    DEFAULT_PATH_BOUND,
    DEFAULT_SATURATION_BOUND,
    MigrationLog,
    delta,
    pi,
    sigma,
    check_translation,
)
from .rdf import export_triples, grothendieck
from .schemas import DEFAULT_REWRITE_BUDGET
from .typed import validate_typed


def _load_documents(paths: list[str]) -> tuple[list[tuple[str, dsl.Document]], dict]:
    docs = []
    env: dict[tuple[str, str], object] = {}
    for path in paths:
        text = FilePath(path).read_text(encoding="utf-8")
        try:
            doc = dsl.parse_document(text, env)
        except ParseError as exc:
            raise ParseError(
                f"{path}: {exc.message}", exc.line, exc.column, exc.expected
            ) from None
        env.update(dsl.document_env(doc))
        docs.append((path, doc))
    return docs, env


def _lookup(env: dict, kind: str, name: str):
    value = env.get((kind, name))
    if value is None:
        raise KeyError(f"unknown {kind} {name!r}")
    return value


def _emit_report(args, report: dict) -> None:
    if not getattr(args, "stable", False):
        report["wall_time_ms"] = round(report.pop("_elapsed", 0.0) * 1000.0, 3)
    else:
        report.pop("_elapsed", None)
    if getattr(args, "json", False):
        print(json.dumps(report, sort_keys=True))


def _write_output(out: str | None, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        FilePath(out).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def _cmd_validate(args) -> int:
    start = time.perf_counter()
    docs, _ = _load_documents(args.files)
    violations = []
    for path, doc in docs:
        for decl in doc.declarations:
            if isinstance(decl, dsl.InstanceDecl):
                items = validate_instance(decl.instance)
                kind = "instance"
            elif isinstance(decl, dsl.TranslationDecl):
                items = check_translation(decl.translation, args.rewrite_budget)
                kind = "translation"
            elif isinstance(decl, dsl.MorphismDecl):
                items = validate_morphism(decl.morphism)
                kind = "morphism"
            elif isinstance(decl, dsl.TypedInstanceDecl):
                items = validate_typed(decl.typed)
                kind = "typedinstance"
            else:
                continue
            for item in items:
                violations.append(
                    {"file": path, "kind": kind, "name": decl.name, "message": item.describe()}
                )
    for v in violations:
        print(f"{v['file']}: {v['kind']} {v['name']}: {v['message']}", file=sys.stderr)
    report = {
        "command": "validate",
        "inputs": list(args.files),
        "bounds": {"rewrite_budget": args.rewrite_budget},
        "violations": violations,
        "warnings": [],
        "_elapsed": time.perf_counter() - start,
    }
    _emit_report(args, report)
    return 1 if violations else 0


# ---------------------------------------------------------------------------
# migrate
# ---------------------------------------------------------------------------


def _cmd_migrate(args) -> int:
    start = time.perf_counter()
    docs, env = _load_documents(args.files)
    translation = _lookup(env, "translation", args.translation)
    instance = _lookup(env, "instance", args.instance)
    log = MigrationLog()
    if args.kind == "delta":
        result = delta(translation, instance)
    elif args.kind == "sigma":
        result = sigma(translation, instance, saturation_bound=args.saturation_bound, log=log)
    else:
        result = pi(
            translation,
            instance,
            path_bound=args.path_bound,
            budget=args.rewrite_budget,
            log=log,
        )
    name = args.name or f"{args.instance}_{args.kind}"
    schema_name = _schema_name_of(docs, result.schema)
    out_doc = dsl.Document([dsl.InstanceDecl(name, schema_name, result)])
    text = dsl.print_document(out_doc)
    counts = {v: len(result.row_set(v)) for v in result.schema.vertices}
    if args.out is None:
        sys.stdout.write(text)
        for v, n in counts.items():
            print(f"table {v}: {n} rows", file=sys.stderr)
    else:
        _write_output(args.out, text)
        if not args.json:
            for v, n in counts.items():
                print(f"table {v}: {n} rows")
    report = {
        "command": f"migrate {args.kind}",
        "inputs": list(args.files),
        "translation": args.translation,
        "instance": args.instance,
        "bounds": {
            "rewrite_budget": args.rewrite_budget,
            "path_bound": args.path_bound,
            "saturation_bound": args.saturation_bound,
        },
        "tables": counts,
        "warnings": list(log.warnings),
        "saturation_rounds": [dict(r) for r in log.saturation_rounds],
        "_elapsed": time.perf_counter() - start,
    }
    _emit_report(args, report)
    return 0


def _schema_name_of(docs, schema) -> str:
    for _, doc in docs:
        for decl in doc.declarations:
            if isinstance(decl, dsl.SchemaDecl) and decl.schema == schema:
                return decl.name
    return schema.name


# ---------------------------------------------------------------------------
# check-adjunction
# ---------------------------------------------------------------------------


def _corrupt(instance: Instance) -> Instance:
    """Deterministically break the instance for the mutation-test mode:
    flatten the first multi-valued column to a constant, or failing that
    drop a row."""
    rows = {v: tuple(r) for v, r in instance.rows.items()}
    columns = {a: dict(col) for a, col in instance.columns.items()}
    for arrow in instance.schema.arrows:
        col = columns[arrow.name]
        if len(set(col.values())) >= 2:
            first = col[instance.row_set(arrow.source)[0]]
            columns[arrow.name] = {r: first for r in col}
            return Instance(instance.schema, rows, columns)
    for v in instance.schema.vertices:
        if rows[v]:
            dropped = rows[v][-1]
            rows[v] = rows[v][:-1]
            for a in instance.schema.graph.out_arrows(v):
                columns[a.name].pop(dropped, None)
            return Instance(instance.schema, rows, columns)
    return instance


def _cmd_check_adjunction(args) -> int:
    start = time.perf_counter()
    _, env = _load_documents(args.files)
    translation = _lookup(env, "translation", args.translation)
    instance_c = _lookup(env, "instance", args.instance_on_source)
    instance_d = _lookup(env, "instance", args.instance_on_target)

    pushed = sigma(translation, instance_c, saturation_bound=args.saturation_bound)
    if args.corrupt_sigma:
        pushed = _corrupt(pushed)
    pulled = delta(translation, instance_d)
    limit = pi(translation, instance_c, path_bound=args.path_bound, budget=args.rewrite_budget)

    counts = {
        "hom_sigma_side": count_morphisms(pushed, instance_d, cap=args.cap),
        "hom_delta_side": count_morphisms(instance_c, pulled, cap=args.cap),
        "hom_delta_side_pi": count_morphisms(pulled, instance_c, cap=args.cap),
        "hom_pi_side": count_morphisms(instance_d, limit, cap=args.cap),
    }
    sigma_ok = counts["hom_sigma_side"] == counts["hom_delta_side"]
    pi_ok = counts["hom_delta_side_pi"] == counts["hom_pi_side"]
    lines = [
        f"|Hom(sigma I, J)| = {counts['hom_sigma_side']}",
        f"|Hom(I, delta J)| = {counts['hom_delta_side']}",
        f"sigma adjunction: {'equal' if sigma_ok else 'MISMATCH'}",
        f"|Hom(delta J, I)| = {counts['hom_delta_side_pi']}",
        f"|Hom(J, pi I)| = {counts['hom_pi_side']}",
        f"pi adjunction: {'equal' if pi_ok else 'MISMATCH'}",
    ]
    if not args.json:
        for line in lines:
            print(line)
    report = {
        "command": "check-adjunction",
        "inputs": list(args.files),
        "bounds": {
            "rewrite_budget": args.rewrite_budget,
            "path_bound": args.path_bound,
            "saturation_bound": args.saturation_bound,
            "cap": args.cap,
        },
        "counts": counts,
        "sigma_adjunction_equal": sigma_ok,
        "pi_adjunction_equal": pi_ok,
        "warnings": [],
        "_elapsed": time.perf_counter() - start,
    }
    _emit_report(args, report)
    return 0 if sigma_ok and pi_ok else 1


# ---------------------------------------------------------------------------
# export-rdf / render
# ---------------------------------------------------------------------------


def _cmd_export_rdf(args) -> int:
    _, env = _load_documents(args.files)
    instance = _lookup(env, "instance", args.instance)
    store = grothendieck(instance)
    _write_output(args.out, export_triples(store, args.base))
    return 0


def _render_table(instance: Instance, vertex: str, fmt: str) -> str:
    arrows = instance.schema.graph.out_arrows(vertex)
    header = ["ID"] + [a.name for a in arrows]
    body = [
        [row] + [instance.column(a.name)[row] for a in arrows]
        for row in instance.row_set(vertex)
    ]
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv_module.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(body)
        return buffer.getvalue()
    widths = [
        max(len(header[i]), *(len(r[i]) for r in body)) if body else len(header[i])
        for i in range(len(header))
    ]
    lines = [" | ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    lines.append("-+-".join("-" * w for w in widths))
    for r in body:
        lines.append(" | ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n"


def _cmd_render(args) -> int:
    _, env = _load_documents(args.files)
    instance = _lookup(env, "instance", args.instance)
    if args.table is not None:
        if not instance.schema.graph.has_vertex(args.table):
            raise KeyError(f"no table {args.table!r}")
        text = _render_table(instance, args.table, args.format)
    else:
        blocks = []
        for v in instance.schema.vertices:
            blocks.append(f"table {v}\n" + _render_table(instance, v, args.format))
        text = "\n".join(blocks)
    _write_output(args.out, text)
    return 0


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------


def _add_bounds(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--rewrite-budget", type=int, default=DEFAULT_REWRITE_BUDGET)
    parser.add_argument("--path-bound", type=int, default=DEFAULT_PATH_BOUND)
    parser.add_argument("--saturation-bound", type=int, default=DEFAULT_SATURATION_BOUND)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catmigrate",
        description="Categorical schemas, instances, and data migration.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("validate", help="validate every declaration in the given files")
    p.add_argument("files", nargs="+")
    p.add_argument("--json", action="store_true")
    p.add_argument("--stable", action="store_true")
    p.add_argument("--rewrite-budget", type=int, default=DEFAULT_REWRITE_BUDGET)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("migrate", help="run a migration functor on an instance")
    p.add_argument("kind", choices=["delta", "sigma", "pi"])
    p.add_argument("translation")
    p.add_argument("instance")
    p.add_argument("files", nargs="+")
    p.add_argument("--out")
    p.add_argument("--name", help="name for the migrated instance declaration")
    p.add_argument("--json", action="store_true")
    p.add_argument("--stable", action="store_true")
    _add_bounds(p)
    p.set_defaults(func=_cmd_migrate)

    p = sub.add_parser(
        "check-adjunction", help="count hom-sets on both sides of the two adjunctions"
    )
    p.add_argument("translation")
    p.add_argument("instance_on_source")
    p.add_argument("instance_on_target")
    p.add_argument("files", nargs="+")
    p.add_argument("--cap", type=int, default=2_000_000)
    p.add_argument("--corrupt-sigma", action="store_true", help="mutation-test mode")
    p.add_argument("--json", action="store_true")
    p.add_argument("--stable", action="store_true")
    _add_bounds(p)
    p.set_defaults(func=_cmd_check_adjunction)

    p = sub.add_parser("export-rdf", help="export an instance as sorted triples")
    p.add_argument("instance")
    p.add_argument("files", nargs="+")
    p.add_argument("--base", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_export_rdf)

    p = sub.add_parser("render", help="render instance tables")
    p.add_argument("instance")
    p.add_argument("files", nargs="+")
    p.add_argument("--format", choices=["ascii-table", "csv"], default="ascii-table")
    p.add_argument("--table")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_render)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (KeyError, FileNotFoundError) as exc:
        message = exc.args[0] if exc.args else str(exc)
        print(f"error: {message}", file=sys.stderr)
        return 2
    except BoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

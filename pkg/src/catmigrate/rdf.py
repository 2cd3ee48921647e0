"""Flattening instances into subject/predicate/object triple stores and back.

Every (vertex, row) becomes a typed node; every (arrow, row) becomes one
triple.  Node ids are namespaced ``vertex/row`` because row ids are only
unique per table.  The reverse construction rebuilds tables from node types
and triples, and the export writes deterministic N-Triples-shaped lines.
"""
from __future__ import annotations

from dataclasses import dataclass
from urllib.parse import quote

from .errors import TripleStoreError
from .instances import Instance
from .schemas import Schema


@dataclass
class TripleStore:
    schema: Schema
    nodes: tuple[tuple[str, str], ...] = ()  # (node id, type vertex)
    triples: tuple[tuple[str, str, str], ...] = ()  # (subject, predicate arrow, object)

    def node_type(self, node: str) -> str:
        for n, t in self.nodes:
            if n == node:
                return t
        raise TripleStoreError(f"unknown node {node!r}", node=node)


def validate_store(store: TripleStore) -> list[str]:
    """Typing and functionality violations, one message per problem."""
    problems = []
    types: dict[str, str] = {}
    for node, vertex in store.nodes:
        if node in types:
            problems.append(f"node {node!r} declared twice")
        types[node] = vertex
        if not store.schema.graph.has_vertex(vertex):
            problems.append(f"node {node!r} has unknown type {vertex!r}")
    seen: dict[tuple[str, str], str] = {}
    for subject, predicate, obj in store.triples:
        try:
            arrow = store.schema.graph.arrow(predicate)
        except Exception:
            problems.append(f"triple predicate {predicate!r} is not a schema arrow")
            continue
        if subject not in types:
            problems.append(f"triple subject {subject!r} is not a node")
        elif types[subject] != arrow.source:
            problems.append(
                f"subject {subject!r} has type {types[subject]!r}, "
                f"but predicate {predicate!r} needs {arrow.source!r}"
            )
        if obj not in types:
            problems.append(f"triple object {obj!r} is not a node")
        elif types[obj] != arrow.target:
            problems.append(
                f"object {obj!r} has type {types[obj]!r}, "
                f"but predicate {predicate!r} needs {arrow.target!r}"
            )
        key = (subject, predicate)
        if key in seen and seen[key] != obj:
            problems.append(
                f"predicate {predicate!r} is not functional on subject {subject!r}"
            )
        seen[key] = obj
    return problems


def node_id(vertex: str, row: str) -> str:
    return f"{vertex}/{row}"


def grothendieck(instance: Instance) -> TripleStore:
    """One node per (vertex, row), one triple per (arrow, source row)."""
    nodes = []
    for v in instance.schema.vertices:
        for r in instance.row_set(v):
            nodes.append((node_id(v, r), v))
    triples = []
    for arrow in instance.schema.arrows:
        column = instance.column(arrow.name)
        for r in instance.row_set(arrow.source):
            triples.append(
                (node_id(arrow.source, r), arrow.name, node_id(arrow.target, column[r]))
            )
    return TripleStore(instance.schema, tuple(nodes), tuple(triples))


def ungrothendieck(store: TripleStore) -> Instance:
    """Rebuild tables from a store; requires a triple for every (node, outgoing
    arrow) pair and exactly one object per (subject, predicate)."""
    problems = validate_store(store)
    if problems:
        raise TripleStoreError("; ".join(problems[:3]))

    def strip(node: str, vertex: str) -> str:
        prefix = vertex + "/"
        return node[len(prefix):] if node.startswith(prefix) else node

    rows: dict[str, list[str]] = {v: [] for v in store.schema.vertices}
    row_of_node: dict[str, str] = {}
    for node, vertex in store.nodes:
        row = strip(node, vertex)
        if row in rows[vertex]:
            raise TripleStoreError(
                f"two nodes of type {vertex!r} collapse to row id {row!r}", node=node
            )
        rows[vertex].append(row)
        row_of_node[node] = row

    value: dict[tuple[str, str], str] = {}
    for subject, predicate, obj in store.triples:
        value[(subject, predicate)] = obj

    columns: dict[str, dict[str, str]] = {}
    for arrow in store.schema.arrows:
        mapping = {}
        for node, vertex in store.nodes:
            if vertex != arrow.source:
                continue
            obj = value.get((node, arrow.name))
            if obj is None:
                raise TripleStoreError(
                    f"store has no triple <{node} {arrow.name} _>; column is partial",
                    node=node,
                    predicate=arrow.name,
                )
            mapping[row_of_node[node]] = row_of_node[obj]
        columns[arrow.name] = mapping

    return Instance(
        store.schema,
        {v: tuple(r) for v, r in rows.items()},
        columns,
    )


def _uri(base: str, component: str) -> str:
    return "<" + base.rstrip("/") + "/" + quote(component, safe="/:$-_.~()") + ">"


def export_triples(store: TripleStore, base: str) -> str:
    """One sorted line per triple: ``<base/subj> <base/pred> <base/obj> .``"""
    lines = [
        f"{_uri(base, s)} {_uri(base, p)} {_uri(base, o)} ."
        for s, p, o in store.triples
    ]
    return "".join(line + "\n" for line in sorted(lines))

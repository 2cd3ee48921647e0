"""Brute-force oracles for the pushforward functors, independent of the engine.

These work only on acyclic target schemas, where the path set is finite and
can be enumerated completely, the path-equivalence closure computed by
exhaustive positional rewriting, and the colimit/limit taken literally:
the colimit as a quotient of all (seed, path) terms, the limit as filtered
assignments over all comma objects.
"""
from __future__ import annotations

import itertools

from catmigrate.instances import Instance
from catmigrate.migration import Translation
from catmigrate.schemas import Path, Schema, path_target


def all_paths(schema: Schema, source: str, cap: int = 50_000) -> list[Path]:
    """Every path out of ``source``; the graph must be acyclic."""
    out: list[Path] = []
    stack = [Path(source, ())]
    while stack:
        path = stack.pop()
        out.append(path)
        if len(out) > cap:
            raise RuntimeError("path enumeration exploded; schema is not acyclic?")
        at = path_target(schema.graph, path)
        for arrow in schema.graph.out_arrows(at):
            stack.append(Path(source, path.arrows + (arrow.name,)))
    out.sort(key=lambda p: (len(p.arrows), p.arrows))
    return out


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def _rewrites(schema: Schema, arrows: tuple[str, ...], source: str):
    """All single positional rewrites of a path by the declared equations."""
    graph = schema.graph

    def vertex_at(i: int) -> str:
        return source if i == 0 else graph.arrow(arrows[i - 1]).target

    for eq in schema.equivalences:
        for lhs, rhs in ((eq.lhs, eq.rhs), (eq.rhs, eq.lhs)):
            k = len(lhs.arrows)
            for i in range(len(arrows) - k + 1):
                if arrows[i : i + k] == lhs.arrows and vertex_at(i) == lhs.source:
                    yield arrows[:i] + rhs.arrows + arrows[i + k :]


def path_partition(schema: Schema, paths: list[Path]) -> list[int]:
    """Class (root index) of each path under the declared-equation closure."""
    index = {p.arrows: i for i, p in enumerate(paths)}
    uf = _UnionFind(len(paths))
    for i, path in enumerate(paths):
        for rewritten in _rewrites(schema, path.arrows, path.source):
            uf.union(i, index[rewritten])
    return [uf.find(i) for i in range(len(paths))]


# ---------------------------------------------------------------------------
# sigma oracle: quotient of all (seed, path) terms
# ---------------------------------------------------------------------------


class SigmaOracle:
    """classes_at[d] is a list of frozensets of terms (c, r, path-arrows)."""

    def __init__(self, translation: Translation, instance: Instance):
        self.F = translation
        self.I = instance
        D = translation.target
        terms: list[tuple[str, str, tuple[str, ...]]] = []
        for c in translation.source.vertices:
            start = translation.vertex_image(c)
            paths = all_paths(D, start)
            for r in instance.row_set(c):
                for p in paths:
                    terms.append((c, r, p.arrows))
        index = {t: i for i, t in enumerate(terms)}
        uf = _UnionFind(len(terms))
        for i, (c, r, arrows) in enumerate(terms):
            # naturality: walking a translated source arrow equals moving the seed
            for a in translation.source.graph.out_arrows(c):
                image = translation.arrow_image(a.name).arrows
                if arrows[: len(image)] == image:
                    moved = (a.target, instance.column(a.name)[r], arrows[len(image):])
                    uf.union(i, index[moved])
            # target equations at any position
            start = translation.vertex_image(c)
            for rewritten in _rewrites(D, arrows, start):
                uf.union(i, index[(c, r, rewritten)])

        vertex_of_term = [
            path_target(D.graph, Path(translation.vertex_image(c), arrows))
            for (c, _, arrows) in terms
        ]
        self.terms = terms
        self._root = [uf.find(i) for i in range(len(terms))]
        self.classes_at: dict[str, list[frozenset]] = {v: [] for v in D.vertices}
        by_root: dict[int, list[int]] = {}
        for i, root in enumerate(self._root):
            by_root.setdefault(root, []).append(i)
        for root, members in sorted(by_root.items()):
            self.classes_at[vertex_of_term[root]].append(
                frozenset(terms[i] for i in members)
            )


def assert_sigma_matches(translation: Translation, instance: Instance, result) -> None:
    """Engine output must realize exactly the oracle's term partition."""
    oracle = SigmaOracle(translation, instance)

    def engine_element(term: tuple[str, str, tuple[str, ...]]) -> str:
        c, r, arrows = term
        at = result.seed_row[(c, r)]
        for name in arrows:
            at = result.instance.column(name)[at]
        return at

    for d in translation.target.vertices:
        oracle_classes = oracle.classes_at[d]
        assert len(result.instance.row_set(d)) == len(oracle_classes), (
            f"row count mismatch at {d!r}: engine "
            f"{len(result.instance.row_set(d))}, oracle {len(oracle_classes)}"
        )
        for cls in oracle_classes:
            images = {engine_element(t) for t in cls}
            assert len(images) == 1, f"oracle class maps to several engine rows: {cls}"
    # column actions agree: appending an arrow to a term moves its class
    for d in translation.target.vertices:
        for cls in oracle.classes_at[d]:
            term = next(iter(cls))
            row = engine_element(term)
            for arrow in translation.target.graph.out_arrows(d):
                extended = (term[0], term[1], term[2] + (arrow.name,))
                assert result.instance.column(arrow.name)[row] == engine_element(extended)


# ---------------------------------------------------------------------------
# pi oracle: filtered assignments over all comma objects
# ---------------------------------------------------------------------------


class PiOracle:
    def __init__(self, translation: Translation, instance: Instance):
        self.F = translation
        self.I = instance
        D = translation.target
        C = translation.source
        self.objects_at: dict[str, list[tuple[str, int]]] = {}
        self.families_at: dict[str, list[dict]] = {}
        self._paths: dict[str, list[Path]] = {}
        self._roots: dict[str, list[int]] = {}
        for d in D.vertices:
            paths = all_paths(D, d)
            roots = path_partition(D, paths)
            self._paths[d] = paths
            self._roots[d] = roots
            index = {p.arrows: i for i, p in enumerate(paths)}
            class_roots = sorted(set(roots))
            target_of = {
                root: path_target(D.graph, paths[root]) for root in class_roots
            }
            objects = [
                (c, root)
                for c in C.vertices
                for root in class_roots
                if target_of[root] == translation.vertex_image(c)
            ]
            self.objects_at[d] = objects
            obj_index = {o: k for k, o in enumerate(objects)}

            constraints = []
            for a in C.arrows:
                image = translation.arrow_image(a.name).arrows
                for root in class_roots:
                    if target_of[root] != translation.vertex_image(a.source):
                        continue
                    composite = paths[root].arrows + image
                    croot = roots[index[composite]]
                    constraints.append(
                        (obj_index[(a.source, root)], obj_index[(a.target, croot)], a.name)
                    )

            pools = [instance.row_set(c) for c, _ in objects]
            families = []
            for combo in itertools.product(*pools):
                ok = True
                for i, j, arrow in constraints:
                    if instance.column(arrow)[combo[i]] != combo[j]:
                        ok = False
                        break
                if ok:
                    families.append({k: combo[k] for k in range(len(objects))})
            self.families_at[d] = families

    def restrict(self, arrow_name: str, d: str, d2: str, family: dict) -> dict:
        """Family at d restricted along arrow d -> d2."""
        paths_d = self._paths[d]
        roots_d = self._roots[d]
        index_d = {p.arrows: i for i, p in enumerate(paths_d)}
        obj_index_d = {o: k for k, o in enumerate(self.objects_at[d])}
        out = {}
        for k2, (c, root2) in enumerate(self.objects_at[d2]):
            composite = (arrow_name,) + self._paths[d2][root2].arrows
            root = roots_d[index_d[composite]]
            out[k2] = family[obj_index_d[(c, root)]]
        return out


def assert_pi_matches(translation: Translation, instance: Instance, result) -> None:
    """Engine families must biject with oracle families, components and all."""
    oracle = PiOracle(translation, instance)
    D = translation.target
    correspondence: dict[str, dict[int, int]] = {}
    for d in D.vertices:
        data = result.data[d]
        paths = oracle._paths[d]
        roots = oracle._roots[d]
        index = {p.arrows: i for i, p in enumerate(paths)}
        obj_index = {o: k for k, o in enumerate(oracle.objects_at[d])}
        mapping: dict[int, int] = {}
        for k, (c, cls) in enumerate(data.comps):
            rep = data.classes[cls]
            root = roots[index[rep.arrows]]
            key = (c, root)
            assert key in obj_index, f"engine component {key} unknown to oracle at {d!r}"
            assert obj_index[key] not in mapping.values(), (
                f"engine split one comma object into several at {d!r}"
            )
            mapping[k] = obj_index[key]
        assert len(mapping) == len(oracle.objects_at[d]), (
            f"engine comma at {d!r} has {len(mapping)} objects, "
            f"oracle has {len(oracle.objects_at[d])}"
        )
        correspondence[d] = mapping

        engine_families = {
            frozenset((mapping[k], v) for k, v in fam.items()) for fam in data.families
        }
        oracle_families = {frozenset(f.items()) for f in oracle.families_at[d]}
        assert engine_families == oracle_families, f"family sets differ at {d!r}"

    # columns agree under the correspondence
    for arrow in D.arrows:
        d, d2 = arrow.source, arrow.target
        data = result.data[d]
        for fam, rid in zip(data.families, data.row_ids):
            oracle_fam = {correspondence[d][k]: v for k, v in fam.items()}
            expected = oracle.restrict(arrow.name, d, d2, oracle_fam)
            out_rid = result.instance.column(arrow.name)[rid]
            out_fam = dict(
                zip(
                    (correspondence[d2][k] for k in range(len(result.data[d2].comps))),
                    (
                        result.data[d2].families[result.data[d2].row_ids.index(out_rid)][k]
                        for k in range(len(result.data[d2].comps))
                    ),
                )
            )
            assert out_fam == expected, f"column {arrow.name!r} disagrees on {rid!r}"

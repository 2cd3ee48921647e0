from __future__ import annotations

import random

import pytest

from catmigrate.errors import (
    PathBoundInstabilityError,
    SaturationOverflowError,
    SchemaMismatchError,
)
from catmigrate.instances import (
    Instance,
    InstanceMorphism,
    compose_morphisms,
    count_morphisms,
    find_isomorphism,
    identity_morphism,
    morphisms_equal,
    validate_instance,
    validate_morphism,
)
from catmigrate.migration import (
    MigrationLog,
    MigrationPipeline,
    PipelineStep,
    StepKind,
    Translation,
    TranslationEquality,
    UnverifiedEquivalence,
    adjunction_unit_counit,
    check_translation,
    compose_translations,
    delta,
    delta_on_morphism,
    identity_translation,
    pi,
    pi_full,
    pi_on_morphism,
    pi_unit,
    pi_counit,
    run_pipeline,
    sigma,
    sigma_full,
    sigma_on_morphism,
    sigma_unit,
    sigma_counit,
    translations_equal,
)
from catmigrate.schemas import Arrow, Graph, Path, PathEquivalence, Schema

from .generators import rand_instance, rand_translation
from .oracles import assert_pi_matches, assert_sigma_matches


@pytest.fixture(scope="module")
def F(paper_env):
    return paper_env[("translation", "F")]


@pytest.fixture(scope="module")
def I(paper_env):
    return paper_env[("instance", "I")]


@pytest.fixture(scope="module")
def J(paper_env):
    return paper_env[("instance", "J")]


@pytest.fixture(scope="module")
def Feq(paper_env):
    return paper_env[("translation", "Feq")]


# -- translation validation ----------------------------------------------------


def test_paper_translation_is_valid(F):
    assert check_translation(F) == []


def test_equivalence_translation_is_valid(Feq):
    # both composite equations land on the trivial path, which is equal to itself
    assert check_translation(Feq) == []


def test_endpoint_violation_detected(F):
    broken = Translation(
        F.source,
        F.target,
        dict(F.vertex_map),
        {**F.arrow_map, "ssn": Path("SSN", ())},
    )
    report = check_translation(broken)
    assert any("ssn" in item.describe() for item in report)


def test_unverified_equivalence_reported(paper_env):
    # a source equation whose image cannot be proved: two parallel arrows
    # with no target equations
    src = Schema(
        "Csrc",
        Graph(("A", "B"), (Arrow("u", "A", "B"), Arrow("w", "A", "B"))),
        (PathEquivalence(Path("A", ("u",)), Path("A", ("w",))),),
    )
    tgt = Schema("Dtgt", Graph(("X", "Y"), (Arrow("p", "X", "Y"), Arrow("q", "X", "Y"))))
    f = Translation(
        src, tgt, {"A": "X", "B": "Y"}, {"u": Path("X", ("p",)), "w": Path("X", ("q",))}
    )
    report = check_translation(f)
    assert len(report) == 1
    assert isinstance(report[0], UnverifiedEquivalence)


def test_translations_equal_reflexive(F):
    assert translations_equal(F, F) is TranslationEquality.EQUAL


def test_translations_equal_up_to_declared_equivalence(paper_env):
    ceq = paper_env[("schema", "Ceq")]
    loop = Schema("Loop", Graph(("W",), (Arrow("a", "W", "W"),)))
    f = Translation(loop, ceq, {"W": "T1"}, {"a": Path("T1", ("i12", "i21"))})
    g = Translation(loop, ceq, {"W": "T1"}, {"a": Path("T1", ())})
    assert translations_equal(f, g) is TranslationEquality.EQUAL


def test_translations_equal_not_proved_and_different(paper_env):
    plain = Schema("Plain", Graph(("X", "Y"), (Arrow("p", "X", "Y"), Arrow("q", "X", "Y"))))
    loop = Schema("LoopB", Graph(("W", "Z"), (Arrow("a", "W", "Z"),)))
    f = Translation(loop, plain, {"W": "X", "Z": "Y"}, {"a": Path("X", ("p",))})
    g = Translation(loop, plain, {"W": "X", "Z": "Y"}, {"a": Path("X", ("q",))})
    assert translations_equal(f, g) is TranslationEquality.NOT_PROVED
    h = Translation(loop, plain, {"W": "Y", "Z": "Y"}, {"a": Path("Y", ())})
    assert translations_equal(f, h) is TranslationEquality.DIFFERENT


# -- delta ----------------------------------------------------------------------


def test_delta_splits_table_t(F, J, paper_env):
    pulled = delta(F, J)
    assert validate_instance(pulled) == []
    assert pulled.row_set("T1") == ("XF667", "XF891", "XF221")
    assert pulled.row_set("T2") == ("XF667", "XF891", "XF221")
    assert pulled.column("ssn")["XF667"] == "115-234"
    assert pulled.column("first_1")["XF667"] == "Bob"
    assert pulled.column("last_1")["XF667"] == "Smith"
    # leaves verbatim
    for leaf in ("SSN", "First", "Last", "Salary"):
        assert pulled.row_set(leaf) == J.row_set(leaf)
    # cell-for-cell match with the transcribed tables, up to row-id bijection
    expected = paper_env[("instance", "PullbackExpected")]
    assert find_isomorphism(pulled, expected) is not None


def test_delta_identity_translation(J):
    assert delta(identity_translation(J.schema), J) == J


def test_delta_equivalence_pullback_links_are_identities(Feq, J, paper_env):
    pulled = delta(Feq, J)
    assert validate_instance(pulled) == []
    for row in pulled.row_set("T1"):
        assert pulled.column("i12")[row] == row
    for row in pulled.row_set("T2"):
        assert pulled.column("i21")[row] == row
    expected = paper_env[("instance", "EquivPullbackExpected")]
    assert find_isomorphism(pulled, expected) is not None


def test_delta_functoriality(F, J):
    # identity and composition, as value equality
    ident_d = identity_translation(F.target)
    assert delta(compose_translations(F, ident_d), J) == delta(F, J)
    composed = compose_translations(identity_translation(F.source), F)
    assert delta(composed, J) == delta(F, J)


def test_delta_on_morphism(F, J):
    ident = identity_morphism(J)
    image = delta_on_morphism(F, ident)
    assert morphisms_equal(image, identity_morphism(delta(F, J)))
    # an inclusion of one extra T row maps to inclusions on both T1 and T2
    smaller = Instance(
        J.schema,
        {**{v: J.row_set(v) for v in J.schema.vertices}, "T": ("XF667", "XF891")},
        {
            **{a: dict(col) for a, col in J.columns.items()},
            **{
                a.name: {r: J.column(a.name)[r] for r in ("XF667", "XF891")}
                for a in J.schema.graph.out_arrows("T")
            },
        },
    )
    include = InstanceMorphism(
        smaller,
        J,
        {v: {r: r for r in smaller.row_set(v)} for v in J.schema.vertices},
    )
    assert validate_morphism(include) == []
    pulled = delta_on_morphism(F, include)
    assert validate_morphism(pulled) == []
    assert set(pulled.component("T1")) == {"XF667", "XF891"}
    assert set(pulled.component("T2")) == {"XF667", "XF891"}


# -- pi ---------------------------------------------------------------------------


def test_pi_is_the_join(F, I):
    joined = pi(F, I)
    assert validate_instance(joined) == []
    rows = joined.row_set("T")
    assert len(rows) == 2
    cells = {
        tuple(joined.column(a)[r] for a in ("SSN", "First", "Last", "Salary"))
        for r in rows
    }
    assert cells == {
        ("122-988", "Sue", "Smith", "$300"),
        ("198-877", "Alice", "Jones", "$100"),
    }
    # row order is deterministic: Sue's row enumerates first
    assert joined.column("First")[rows[0]] == "Sue"
    for leaf in ("SSN", "First", "Last", "Salary"):
        assert joined.row_set(leaf) == I.row_set(leaf)


def test_pi_identity_translation(I, J):
    assert pi(identity_translation(J.schema), J) == J
    assert pi(identity_translation(I.schema), I) == I


def test_pi_matches_oracle_on_paper_case(F, I):
    assert_pi_matches(F, I, pi_full(F, I))


def test_pi_unstable_bound_raises():
    # a loop arrow makes the comma category at W infinite
    loop = Schema("LoopC", Graph(("W",), (Arrow("a", "W", "W"),)))
    point = Schema("Pt", Graph(("P",), ()))
    f = Translation(point, loop, {"P": "W"}, {})
    instance = Instance(point, {"P": ("x", "y")}, {})
    with pytest.raises(PathBoundInstabilityError) as err:
        pi(f, instance, path_bound=3)
    assert err.value.vertex == "W"


def test_pi_on_morphism_identity_and_merge(F, I):
    image = pi_on_morphism(F, identity_morphism(I))
    assert morphisms_equal(image, identity_morphism(pi(F, I)))


# -- sigma -------------------------------------------------------------------------


def test_sigma_is_the_union_with_skolems(F, I):
    pushed = sigma(F, I)
    assert validate_instance(pushed) == []
    assert pushed.row_set("T") == (
        "T1-001",
        "T1-002",
        "T1-003",
        "T2-A101",
        "T2-A102",
        "T2-A104",
        "T2-A110",
    )
    # the three T1 rows Skolemize their salaries
    assert pushed.column("Salary")["T1-001"] == "T1-001.Salary"
    assert pushed.column("Salary")["T1-002"] == "T1-002.Salary"
    assert pushed.column("Salary")["T1-003"] == "T1-003.Salary"
    # the four T2 rows Skolemize their SSNs
    for row in ("T2-A101", "T2-A102", "T2-A104", "T2-A110"):
        assert pushed.column("SSN")[row] == f"{row}.SSN"
    # known cells survive verbatim
    assert pushed.column("SSN")["T1-001"] == "115-234"
    assert pushed.column("Salary")["T2-A101"] == "$100"
    assert pushed.column("First")["T2-A110"] == "Carl"
    # leaf tables: original values plus the new Skolems
    assert pushed.row_set("Salary") == (
        "$100",
        "$150",
        "$200",
        "$250",
        "$300",
        "T1-001.Salary",
        "T1-002.Salary",
        "T1-003.Salary",
    )
    assert len(pushed.row_set("SSN")) == 5 + 4
    assert pushed.row_set("First") == I.row_set("First")
    assert pushed.row_set("Last") == I.row_set("Last")


def test_sigma_identity_translation(I, J):
    assert sigma(identity_translation(I.schema), I) == I
    assert sigma(identity_translation(J.schema), J) == J


def test_sigma_matches_oracle_on_paper_case(F, I):
    assert_sigma_matches(F, I, sigma_full(F, I))


def test_sigma_nontermination_names_the_vertex():
    # sending a point into a loop: its images under the loop arrow never close
    loop = Schema("LoopD", Graph(("W",), (Arrow("a", "W", "W"),)))
    point = Schema("Pt2", Graph(("P",), ()))
    f = Translation(point, loop, {"P": "W"}, {})
    instance = Instance(point, {"P": ("x",)}, {})
    with pytest.raises(SaturationOverflowError) as err:
        sigma(f, instance, saturation_bound=40)
    assert err.value.vertex == "W"


def test_sigma_on_morphism_inclusion_and_merge(F, I):
    # identity maps to identity
    assert morphisms_equal(
        sigma_on_morphism(F, identity_morphism(I)), identity_morphism(sigma(F, I))
    )
    # dropping one T1 row includes into the full pushout
    rows = {v: I.row_set(v) for v in I.schema.vertices}
    rows["T1"] = ("T1-001", "T1-002")
    columns = {a: dict(col) for a, col in I.columns.items()}
    for a in I.schema.graph.out_arrows("T1"):
        columns[a.name] = {r: I.column(a.name)[r] for r in rows["T1"]}
    smaller = Instance(I.schema, rows, columns)
    include = InstanceMorphism(
        smaller, I, {v: {r: r for r in smaller.row_set(v)} for v in I.schema.vertices}
    )
    image = sigma_on_morphism(F, include)
    assert validate_morphism(image) == []
    assert image.component("T")["T1-001"] == "T1-001"


def test_schema_mismatch_errors(F, I, J):
    with pytest.raises(SchemaMismatchError):
        delta(F, I)
    with pytest.raises(SchemaMismatchError):
        sigma(F, J)
    with pytest.raises(SchemaMismatchError):
        pi(F, J)


# -- adjunction witnesses -------------------------------------------------------


def test_units_counits_identity_translation(I):
    ident = identity_translation(I.schema)
    w = adjunction_unit_counit(ident, I, I)
    for m in (w.unit_sigma, w.counit_sigma, w.unit_pi, w.counit_pi):
        assert morphisms_equal(m, identity_morphism(I))


def test_pi_counit_projects_join_members(F, I):
    eps = pi_counit(F, I)
    assert validate_morphism(eps) == []
    image_t1 = set(eps.component("T1").values())
    assert image_t1 == {"T1-002", "T1-003"}


def test_sigma_counit_collapses_seeds(F, J):
    eps = sigma_counit(F, J)
    assert validate_morphism(eps) == []
    # six seeded classes at T (three per fact table), mapping back pairwise
    assert len(eps.component("T")) == 6
    assert sorted(set(eps.component("T").values())) == ["XF221", "XF667", "XF891"]
    counts = {}
    for value in eps.component("T").values():
        counts[value] = counts.get(value, 0) + 1
    assert set(counts.values()) == {2}


def test_hom_set_bijection_on_truncated_paper_instances(F, paper_env):
    # enumeration is feasible on the small closures of I and J
    i_small = paper_env[("instance", "Ismall")]
    j_small = paper_env[("instance", "Jsmall")]
    pushed = sigma(F, i_small)
    pulled = delta(F, j_small)
    sigma_side = count_morphisms(pushed, j_small)
    delta_side = count_morphisms(i_small, pulled)
    assert sigma_side == delta_side and sigma_side > 0
    limit = pi(F, i_small)
    pi_left = count_morphisms(pulled, i_small)
    pi_right = count_morphisms(j_small, limit)
    assert pi_left == pi_right and pi_right > 0


def test_triangle_identities_on_paper_instances(F, I, J):
    # sigma -| delta: (counit at sigma I) after (sigma of unit) is the identity
    unit = sigma_unit(F, I)
    sigma_of_unit = sigma_on_morphism(F, unit)
    counit_at_sigma = sigma_counit(F, sigma(F, I))
    left = compose_morphisms(sigma_of_unit, counit_at_sigma)
    assert morphisms_equal(left, identity_morphism(sigma(F, I)))
    # ... and (delta of counit) after (unit at delta J) is the identity
    pulled = delta(F, J)
    unit_at_delta = sigma_unit(F, pulled)
    delta_of_counit = delta_on_morphism(F, sigma_counit(F, J))
    right = compose_morphisms(unit_at_delta, delta_of_counit)
    assert morphisms_equal(right, identity_morphism(pulled))
    # delta -| pi: (pi of counit) after (unit at pi I) is the identity
    limit = pi(F, I)
    unit_at_pi = pi_unit(F, limit)
    pi_of_counit = pi_on_morphism(F, pi_counit(F, I))
    top = compose_morphisms(unit_at_pi, pi_of_counit)
    assert morphisms_equal(top, identity_morphism(limit))
    # ... and (counit at delta J) after (delta of unit) is the identity
    delta_of_unit = delta_on_morphism(F, pi_unit(F, J))
    counit_at_delta = pi_counit(F, delta(F, J))
    bottom = compose_morphisms(delta_of_unit, counit_at_delta)
    assert morphisms_equal(bottom, identity_morphism(pulled))


# -- the equivalence round trip ---------------------------------------------------


def test_equivalence_round_trips_are_isomorphisms(Feq, J, paper_env):
    seed = paper_env[("instance", "EquivPullbackExpected")]
    # sigma then delta on the C side
    pushed = sigma(Feq, seed)
    assert validate_instance(pushed) == []
    assert len(pushed.row_set("T")) == 3
    round_c = delta(Feq, pushed)
    assert find_isomorphism(round_c, seed) is not None
    # delta then sigma on the D side
    pulled = delta(Feq, J)
    round_d = sigma(Feq, pulled)
    assert find_isomorphism(round_d, J) is not None


# -- pipelines ----------------------------------------------------------------------


def test_empty_pipeline_returns_start(I):
    assert run_pipeline(MigrationPipeline(()), I) is I


def test_single_delta_step_equals_delta(F, J):
    result = run_pipeline(
        MigrationPipeline((PipelineStep(StepKind.DELTA, translation=F),)), J
    )
    assert result == delta(F, J)


def test_delta_then_sigma_composes_with_counit(F, J):
    result = run_pipeline(
        MigrationPipeline(
            (
                PipelineStep(StepKind.DELTA, translation=F),
                PipelineStep(StepKind.SIGMA, translation=F),
            )
        ),
        J,
    )
    eps = sigma_counit(F, J)
    assert result == eps.source


def test_pipeline_step_mismatch_raises(F, I):
    from catmigrate.errors import PipelineError

    with pytest.raises(PipelineError):
        run_pipeline(
            MigrationPipeline((PipelineStep(StepKind.DELTA, translation=F),)), I
        )


# -- migrations preserve validity on random cases ------------------------------------


def test_migrations_preserve_validity_randomized(paper_env):
    rng = random.Random(31)
    target = paper_env[("schema", "D")]
    for case in range(10):
        f = rand_translation(rng, target, name_prefix=f"t{case}_")
        instance = rand_instance(rng, f.source)
        assert validate_instance(instance) == []
        assert validate_instance(delta(f, rand_instance(rng, target))) == []
        assert validate_instance(sigma(f, instance)) == []
        assert validate_instance(pi(f, instance)) == []


def test_pipeline_with_typed_steps(paper_env):
    from catmigrate.typed import typechange_pi, typechange_sigma

    typed_items = paper_env[("typedinstance", "TypedItems")]
    grouping = paper_env[("morphism", "grouping")]
    result = run_pipeline(
        MigrationPipeline((PipelineStep(StepKind.PI_HAT, type_morphism=grouping),)),
        typed_items,
    )
    direct = typechange_pi(grouping, typed_items)
    assert result.instance == direct.instance
    assert result.typing.components == direct.typing.components
    # typed step on a plain instance is a pipeline error
    from catmigrate.errors import PipelineError

    with pytest.raises(PipelineError):
        run_pipeline(
            MigrationPipeline((PipelineStep(StepKind.SIGMA_HAT, type_morphism=grouping),)),
            typed_items.instance,
        )


def test_sigma_log_records_round_counts(F, I):
    log = MigrationLog()
    sigma(F, I, log=log)
    assert log.bounds["saturation_bound"] == 1000
    assert log.saturation_rounds, "no per-round element counts recorded"
    final = log.saturation_rounds[-1]
    assert final["T"] == 7
    assert final["Salary"] == 8


def test_pi_log_records_unverified_incidents(paper_env):
    # with a zero rewrite budget the composite t.r cannot be placed in the d
    # class: the dropped comma morphism is reported, and the restriction maps
    # then fail loudly rather than silently truncate
    attach = paper_env[("translation", "Attach")]
    values = paper_env[("instance", "Values")]
    log = MigrationLog()
    with pytest.raises(PathBoundInstabilityError):
        pi(attach, values, path_bound=1, budget=0, log=log)
    assert any("no comma morphism" in w for w in log.warnings)
    # an ample budget places every composite: no incidents, correct result
    clean = MigrationLog()
    result = pi(attach, values, path_bound=1, budget=64, log=clean)
    assert clean.warnings == []
    assert len(result.row_set("X")) == 11


def test_pushforwards_on_merging_morphism():
    # merging two rows with equal columns merges their chase classes
    src = Schema("Csm", Graph(("A", "B"), (Arrow("f", "A", "B"),)))
    tgt = Schema("Dsm", Graph(("X", "Y"), (Arrow("g", "X", "Y"),)))
    F = Translation(src, tgt, {"A": "X", "B": "Y"}, {"f": Path("X", ("g",))})
    two = Instance(src, {"A": ("a1", "a2"), "B": ("b",)}, {"f": {"a1": "b", "a2": "b"}})
    one = Instance(src, {"A": ("a",), "B": ("b",)}, {"f": {"a": "b"}})
    m = InstanceMorphism(two, one, {"A": {"a1": "a", "a2": "a"}, "B": {"b": "b"}})
    assert validate_morphism(m) == []
    sigma_image = sigma_on_morphism(F, m)
    assert validate_morphism(sigma_image) == []
    assert sigma_image.component("X")["a1"] == sigma_image.component("X")["a2"]
    pi_image = pi_on_morphism(F, m)
    assert validate_morphism(pi_image) == []
    assert len(set(pi_image.component("X").values())) == 1

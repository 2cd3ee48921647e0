"""catmigrate: schemas as finitely presented categories, instances as
set-valued functors, and the delta/sigma/pi data migration functors."""

from .schemas import (
    Arrow,
    Equivalence,
    Graph,
    Path,
    PathEquivalence,
    Schema,
    compose_paths,
    paths_equivalent,
    trivial_path,
)
from .instances import (
    Instance,
    InstanceMorphism,
    count_morphisms,
    enumerate_morphisms,
    evaluate_path,
    find_isomorphism,
    identity_morphism,
    compose_morphisms,
    instance_fiber_product,
    validate_instance,
    validate_morphism,
)
from .migration import (
    AdjunctionWitnesses,
    MigrationLog,
    MigrationPipeline,
    PipelineStep,
    StepKind,
    Translation,
    TranslationEquality,
    adjunction_unit_counit,
    check_translation,
    compose_translations,
    delta,
    delta_on_morphism,
    identity_translation,
    pi,
    pi_on_morphism,
    run_pipeline,
    sigma,
    sigma_on_morphism,
    translations_equal,
)
from .typed import (
    TypedInstance,
    TypingAuxiliary,
    implied_typing_instance,
    typechange_delta,
    typechange_pi,
    typechange_sigma,
    validate_typed,
)
from .rdf import TripleStore, export_triples, grothendieck, ungrothendieck
from .dsl import Document, parse_document, print_document

__version__ = "0.1.0"

"""Exception types shared across the engine."""
from __future__ import annotations


class EngineError(Exception):
    """Base class for all catmigrate errors."""


class StructuralError(EngineError):
    """A graph, path, schema, or reference is malformed (bad endpoints, unknown names)."""


class CompositionError(EngineError):
    """Path composition attempted across mismatched endpoints."""

    def __init__(self, left_target: str, right_source: str):
        self.left_target = left_target
        self.right_source = right_source
        super().__init__(
            f"cannot compose: left path ends at {left_target!r} "
            f"but right path starts at {right_source!r}"
        )


class UnknownRowError(EngineError):
    """A row id was used that is not a row of the relevant table."""

    def __init__(self, vertex: str, row: str):
        self.vertex = vertex
        self.row = row
        super().__init__(f"no row {row!r} in table {vertex!r}")


class SchemaMismatchError(EngineError):
    """Two values that must live over the same schema (or instance) do not."""


class BoundError(EngineError):
    """Base class for budget/bound failures; carries the offending vertex when known."""

    def __init__(self, message: str, vertex: str | None = None):
        self.vertex = vertex
        super().__init__(message)


class SaturationOverflowError(BoundError):
    """The chase kept generating elements; the colimit is infinite or the bound too low."""


class PathBoundInstabilityError(BoundError):
    """The comma category was not exhausted at the given path bound."""


class EnumerationCapError(BoundError):
    """A morphism enumeration exceeded its size cap."""


class PipelineError(EngineError):
    """A migration pipeline is not well-typed end to end."""


class TypeChangeError(EngineError):
    """A type-change construction received inconsistent input."""


class TripleStoreError(EngineError):
    """A triple store violates typing, functionality, or totality."""

    def __init__(self, message: str, node: str | None = None, predicate: str | None = None):
        self.node = node
        self.predicate = predicate
        super().__init__(message)


class ParseError(EngineError):
    """A positioned diagnostic from the .cat parser."""

    def __init__(
        self,
        message: str,
        line: int,
        column: int,
        expected: tuple[str, ...] = (),
    ):
        self.message = message
        self.line = line
        self.column = column
        self.expected = expected
        detail = f"line {line}, column {column}: {message}"
        if expected:
            detail += " (expected " + " or ".join(sorted(expected)) + ")"
        super().__init__(detail)

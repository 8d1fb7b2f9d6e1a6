"""Exception types and the violation record shared across the engine."""

from __future__ import annotations

from dataclasses import dataclass


class CatmigError(Exception):
    """Base class for every error raised by this package."""


@dataclass(frozen=True)
class Violation:
    """One validation finding.  ``kind`` is a stable machine-readable slug."""

    kind: str
    message: str

    def __str__(self) -> str:
        return f"[{self.kind}] {self.message}"


class ValidationError(CatmigError):
    """Raised with the *full* list of violations found, never just the first."""

    def __init__(self, subject: str, violations):
        self.subject = subject
        self.violations = tuple(violations)
        lines = "\n".join(f"  {v}" for v in self.violations)
        super().__init__(f"{subject}: {len(self.violations)} violation(s)\n{lines}")


class EndpointMismatch(CatmigError):
    """Two paths (or a path and an expected node) do not line up."""


class Unorientable(CatmigError):
    """An equation with identical sides cannot become a rewrite rule."""


class BudgetExceeded(CatmigError):
    """A rewrite-step budget ran out mid-normalization."""


class ParseError(CatmigError):
    def __init__(self, message: str, line: int, col: int):
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}")


class UnresolvedReference(CatmigError):
    """A declaration names a schema/instance/mapping that does not exist."""


class SchemaMismatch(CatmigError):
    """An operation received arguments living over different schemas."""


class NonFunctorialMapping(CatmigError):
    """A migration was asked to run over a mapping proven non-functorial."""


class UndeterminedMapping(CatmigError):
    """A migration over an unverified mapping needs an explicit override."""


class SigmaDivergence(CatmigError):
    """The chase hit its round or element limit without reaching a fixpoint."""


class LiteralCollision(CatmigError):
    """The chase was forced to identify two distinct literals."""


class UnconstrainedAttribute(CatmigError):
    """A migration output needs an attribute value nothing determines."""


class PiInfinite(CatmigError):
    """A comma category could not be enumerated completely within bounds."""


class NonConvergentTheory(CatmigError):
    """An operation that needs canonical normal forms got a partial theory."""


class ElementLimitExceeded(CatmigError):
    """A materialization grew past the configured element limit."""


class HomSearchCapped(CatmigError):
    """A hom enumeration hit its cap, so its count is not trustworthy."""


class HeaderMismatch(CatmigError):
    """A CSV file is missing or its header does not match the schema."""

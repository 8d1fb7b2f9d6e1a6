"""catmig: categorical data migration.

Schemas are finitely presented categories (a typed multigraph plus path
equations), instances are functors into Set (tables with total columns), and
schema mappings are functor presentations.  Data moves along a mapping three
ways: ``delta`` pulls back by pre-composition, ``sigma`` pushes forward
freely via a chase with labeled nulls, and ``pi`` pushes forward by limits
over comma categories.  Every migration is gated on a machine-checked
functoriality verdict, so constraint preservation is earned, not assumed.
"""

from .errors import (
    BudgetExceeded,
    CatmigError,
    ElementLimitExceeded,
    EndpointMismatch,
    HeaderMismatch,
    HomSearchCapped,
    LiteralCollision,
    NonConvergentTheory,
    NonFunctorialMapping,
    ParseError,
    PiInfinite,
    SchemaMismatch,
    SigmaDivergence,
    UnconstrainedAttribute,
    UndeterminedMapping,
    UnresolvedReference,
    ValidationError,
    Unorientable,
    Violation,
)
from .paths import (
    Budget,
    CONVERGENT,
    DEFAULT_BUDGET,
    Edge,
    Graph,
    PARTIAL,
    Path,
    PathEquation,
    PathSet,
    ProofOutcome,
    RewriteRule,
    RewriteStep,
    Theory,
    complete,
    compose,
    enumerate_paths,
    equation_from_text,
    make_theory,
    normalize,
    normalize_with_trace,
    orient,
    path_from_text,
    prove_equal,
    verify_trace,
)
from .schema import BUILTIN_TYPES, Schema, hom_set, validate_schema
from .instance import (
    HomSearch,
    Instance,
    InstanceMorphism,
    ReportEntry,
    ViolationReport,
    check_constraints,
    check_hom,
    compose_homs,
    enumerate_homs,
    eval_path,
    identity_hom,
    iso_check,
    make_hom,
    validate_instance,
)
from .mapping import (
    FunctorialityVerdict,
    Mapping,
    apply_to_path,
    check_functoriality,
    compose_mappings,
    identity_mapping,
    validate_mapping,
)
from .migrate import (
    AdjointnessReport,
    DEFAULT_LIMITS,
    MigrationLimits,
    adjointness_check_pi,
    adjointness_check_sigma,
    delta,
    delta_hom,
    pi,
    sigma,
)
from .source import (
    Library,
    SourceFile,
    instance_to_decl,
    load_file,
    load_text,
    parse_source,
    print_source,
    resolve,
)
from .tabular import TripleSet, export_csv, export_triples, format_triples, import_csv

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

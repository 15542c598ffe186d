"""Natural-language query interfaces generated from database schemas.

The package turns a schema description into a training corpus of synthetic
English question / query-graph pairs, trains a sequence-to-sequence
translator on it, and emits executable SQL, Cypher, or service query
documents from the predicted graphs.
"""

from .schema import (
    AttributeDef,
    ClassDef,
    Relationship,
    SchemaError,
    SchemaGraph,
    import_sql_ddl,
    parse_schema_descriptor,
    schema_stats,
    serialize_schema_descriptor,
)
from .querygraph import (
    Constraint,
    ConstraintOp,
    QueryGraph,
    TargetParseError,
    connect_predicted_classes,
    parse_target,
    query_graph_equal,
    serialize_target,
    validate_query_graph,
)
from .generate import GenParams, generate_bucketed, generate_corpus, generate_query
from .english import TemplateStyle, render_english, sample_rendering

__version__ = "0.1.0"

__all__ = [
    "AttributeDef",
    "ClassDef",
    "Relationship",
    "SchemaError",
    "SchemaGraph",
    "import_sql_ddl",
    "parse_schema_descriptor",
    "schema_stats",
    "serialize_schema_descriptor",
    "Constraint",
    "ConstraintOp",
    "QueryGraph",
    "TargetParseError",
    "connect_predicted_classes",
    "parse_target",
    "query_graph_equal",
    "serialize_target",
    "validate_query_graph",
    "GenParams",
    "generate_bucketed",
    "generate_corpus",
    "generate_query",
    "TemplateStyle",
    "render_english",
    "sample_rendering",
    "__version__",
]

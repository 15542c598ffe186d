"""
One query graph, three dialects: SQL, Cypher, and the service-document
form — plus the reverse direction and the English read-back.
"""

import json
from importlib import resources

from nl2query import emit
from nl2query.querygraph import Constraint, ConstraintOp, QueryGraph, parse_target
from nl2query.schema import parse_schema_descriptor

text = resources.files("nl2query.data").joinpath("graph_tier.json").read_text("utf-8")
g = parse_schema_descriptor(text)

# a 2-class query built by hand: movie titles and director names for long films
q = QueryGraph(
    classes=("movie", "person"),
    reported=(("movie", "title"), ("person", "fullname")),
    constraints=(("movie", "runtime", Constraint(ConstraintOp.GT, "150")),),
    tree_edges=frozenset({g.edge_between("movie", "person")}),
)

print("SQL:")
print(emit.to_sql(q, g))
print("\nCypher:")
print(emit.to_cypher(q, g))
doc = emit.to_service_query(q, g)
print("\nservice document:")
print(json.dumps(doc, indent=2))
print("\nread-back:", emit.paraphrase(q))

# The service document survives the round trip back to a query graph.
back = emit.from_service_query(doc, g)
assert emit.to_service_query(back, g) == doc
print("\nround trip holds")

# Model output is a token string; parse_target rebuilds the graph and
# reconnects the classes through the schema.  Here genre and studio are
# not adjacent, so the tree pulls movie in as the bridge.
tokens = "genre genrename ; studio studioname ; studio founded > @value"
parsed = parse_target(tokens, g)
print("\npredicted tokens:", tokens)
print("classes after reconnection:", parsed.classes)
print(emit.to_sql(parsed, g))

# A placeholder stays a parameter in SQL and becomes $value in Cypher.
print()
print(emit.to_cypher(parsed, g))

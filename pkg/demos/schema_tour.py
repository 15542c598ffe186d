"""
Walk through the schema layer: descriptors, stats, DDL import, adjacency.
"""

from importlib import resources

from nl2query.schema import (
    import_sql_ddl,
    parse_schema_descriptor,
    schema_stats,
    serialize_schema_descriptor,
)

# The package bundles three fixture schemas of increasing size.  Each is a
# JSON descriptor: classes with typed attributes, plus labeled relationships.
for name in ("graph_tier", "relational_tier", "warehouse_tier"):
    text = resources.files("nl2query.data").joinpath(f"{name}.json").read_text("utf-8")
    g = parse_schema_descriptor(text)
    s = schema_stats(g)
    print(f"{name}: {s.class_count} classes, {s.total_attributes} attributes "
          f"({s.unique_attributes} unique names), {s.edge_count} edges")

print()

# the 5-class movie schema in detail
text = resources.files("nl2query.data").joinpath("graph_tier.json").read_text("utf-8")
g = parse_schema_descriptor(text)
for cls in g.classes.values():
    print(f"  {cls.name}: {len(cls.attributes)} attributes, "
          f"e.g. {', '.join(a.name for a in cls.attributes[:3])}")
print("  edges:")
for e in g.relationships:
    print(f"    {e.from_class} --{e.label}--> {e.to_class}")

# neighbors() is what the random walk uses
print("\n  neighbors of movie:", sorted(g.neighbors("movie")))

# Schemas can also come straight from SQL DDL.  Foreign keys become edges.
ddl = """
CREATE TABLE author (id INTEGER PRIMARY KEY, penname TEXT, debutyear INTEGER);
CREATE TABLE book (
    id INTEGER PRIMARY KEY,
    title TEXT,
    pagecount INTEGER,
    author_id INTEGER,
    FOREIGN KEY (author_id) REFERENCES author(id)
);
"""
imported = import_sql_ddl(ddl)
print("\nimported from DDL:", sorted(imported.classes))
print(serialize_schema_descriptor(imported))

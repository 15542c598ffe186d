"""Synthetic English rendering for query graphs.

Each query graph is verbalized through one of six sentence templates.  The
``PER_CLASS`` template walks the classes one by one and describes each
class's attributes and constraints next to the class name; the other five
templates are the global orderings of the three element blocks (attribute
list, class list, constraint list).  Verbs and operator surfaces are drawn
from a synonym table shipped as a plain-text data file so the vocabulary
can be edited or localized without touching code.

Rendering is split into a deterministic core (`render_with_choices`) and
thin sampling wrappers so tests and read-back paraphrases can pin every
lexical choice.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from importlib import resources
from functools import lru_cache
from typing import Mapping

import numpy as np

from .querygraph import ConstraintOp, OP_BY_TOKEN, QueryGraph


class TemplateStyle(enum.Enum):
    """The six sentence templates."""

    PER_CLASS = "per_class"
    ATTR_CLASS_CONSTR = "attr_class_constr"
    ATTR_CONSTR_CLASS = "attr_constr_class"
    CLASS_ATTR_CONSTR = "class_attr_constr"
    CONSTR_ATTR_CLASS = "constr_attr_class"
    CONSTR_CLASS_ATTR = "constr_class_attr"


_BLOCK_ORDER: dict[TemplateStyle, tuple[str, str, str]] = {
    TemplateStyle.ATTR_CLASS_CONSTR: ("attr", "class", "constr"),
    TemplateStyle.ATTR_CONSTR_CLASS: ("attr", "constr", "class"),
    TemplateStyle.CLASS_ATTR_CONSTR: ("class", "attr", "constr"),
    TemplateStyle.CONSTR_ATTR_CLASS: ("constr", "attr", "class"),
    TemplateStyle.CONSTR_CLASS_ATTR: ("constr", "class", "attr"),
}

#: Connectives owned by the templates rather than the synonym table.
CLASS_PREPOSITIONS = ("in", "from")
CONSTRAINT_INTRODUCERS = ("having", "with", "where")
_SEGMENT_JOINER = " and "


class SynonymTableError(ValueError):
    """Raised when a synonym table file violates the format or invariants."""


@dataclass(frozen=True)
class SynonymTable:
    """Verb synonyms plus operator surface forms.

    Every operator must offer at least two surfaces and no surface may be
    shared between operators, so a rendered sentence always identifies its
    operators unambiguously.
    """

    verbs: tuple[str, ...]
    op_surfaces: Mapping[ConstraintOp, tuple[str, ...]]

    def __post_init__(self) -> None:
        if not self.verbs:
            raise SynonymTableError("synonym table defines no verbs")
        seen: dict[str, ConstraintOp] = {}
        for op in ConstraintOp:
            surfaces = self.op_surfaces.get(op, ())
            if len(surfaces) < 2:
                raise SynonymTableError(
                    f"operator {op.value!r} needs at least 2 surfaces, "
                    f"got {len(surfaces)}"
                )
            for surface in surfaces:
                if surface in seen:
                    raise SynonymTableError(
                        f"surface {surface!r} appears under both "
                        f"{seen[surface].value!r} and {op.value!r}"
                    )
                seen[surface] = op

    def op_for_surface(self, surface: str) -> ConstraintOp:
        for op, surfaces in self.op_surfaces.items():
            if surface in surfaces:
                return op
        raise KeyError(surface)

    def all_surfaces(self) -> dict[str, ConstraintOp]:
        return {
            surface: op
            for op, surfaces in self.op_surfaces.items()
            for surface in surfaces
        }


def parse_synonym_table(text: str) -> SynonymTable:
    """Parse the documented table format.

    Lines are grouped under ``[verbs]`` or ``[op TOK]`` headers, one surface
    per line; ``#`` comments and blank lines are skipped.
    """
    verbs: list[str] = []
    surfaces: dict[ConstraintOp, list[str]] = {op: [] for op in ConstraintOp}
    target: list[str] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            header = line[1:-1].strip()
            if header == "verbs":
                target = verbs
            elif header.startswith("op "):
                token = header[3:].strip()
                if token not in OP_BY_TOKEN:
                    raise SynonymTableError(
                        f"line {lineno}: unknown operator token {token!r}"
                    )
                target = surfaces[OP_BY_TOKEN[token]]
            else:
                raise SynonymTableError(f"line {lineno}: unknown section {header!r}")
            continue
        if target is None:
            raise SynonymTableError(f"line {lineno}: surface before any section header")
        target.append(line)
    return SynonymTable(
        verbs=tuple(verbs),
        op_surfaces={op: tuple(listed) for op, listed in surfaces.items()},
    )


@lru_cache(maxsize=1)
def default_synonym_table() -> SynonymTable:
    text = resources.files("nl2query.data").joinpath("synonyms.txt").read_text("utf-8")
    return parse_synonym_table(text)


@dataclass(frozen=True)
class RenderChoices:
    """Every lexical decision a rendering depends on.

    ``op_surfaces`` is aligned with ``q.constraints`` in stored order;
    ``class_order`` is a permutation of ``q.classes``.
    """

    verb: str
    class_preposition: str
    constraint_introducer: str
    op_surfaces: tuple[str, ...]
    class_order: tuple[str, ...]


def sample_choices(
    q: QueryGraph, rng: np.random.Generator, table: SynonymTable | None = None
) -> RenderChoices:
    """Draw choices in a fixed order: verb, preposition, introducer,
    one surface per constraint, then the class permutation."""
    table = table or default_synonym_table()
    verb = table.verbs[int(rng.integers(len(table.verbs)))]
    prep = CLASS_PREPOSITIONS[int(rng.integers(len(CLASS_PREPOSITIONS)))]
    intro = CONSTRAINT_INTRODUCERS[int(rng.integers(len(CONSTRAINT_INTRODUCERS)))]
    picked = tuple(
        table.op_surfaces[constraint.op][
            int(rng.integers(len(table.op_surfaces[constraint.op])))
        ]
        for _, _, constraint in q.constraints
    )
    order = tuple(q.classes[i] for i in rng.permutation(len(q.classes)))
    return RenderChoices(verb, prep, intro, picked, order)


def canonical_choices(q: QueryGraph, table: SynonymTable | None = None) -> RenderChoices:
    """Fixed choices used for deterministic read-back paraphrases."""
    table = table or default_synonym_table()
    picked = tuple(
        table.op_surfaces[constraint.op][0] for _, _, constraint in q.constraints
    )
    return RenderChoices("show", "in", "having", picked, q.classes)


def _attr_list(attrs: list[str]) -> str:
    return ", ".join(attrs)


def _constraint_list(parts: list[str]) -> str:
    return ", ".join(parts)


def render_with_choices(q: QueryGraph, style: TemplateStyle, choices: RenderChoices) -> str:
    """Deterministically render ``q`` with every lexical choice pinned."""
    if sorted(choices.class_order) != sorted(q.classes):
        raise ValueError("class_order must be a permutation of q.classes")
    if len(choices.op_surfaces) != len(q.constraints):
        raise ValueError("need exactly one operator surface per constraint")

    constraint_phrases = {
        idx: f"{attr} {choices.op_surfaces[idx]} {constraint.value}"
        for idx, (_, attr, constraint) in enumerate(q.constraints)
    }

    def attrs_of(cls: str) -> list[str]:
        return [attr for c, attr in q.reported if c == cls]

    def constraints_of(cls: str) -> list[str]:
        return [
            constraint_phrases[idx]
            for idx, (c, _, _) in enumerate(q.constraints)
            if c == cls
        ]

    if style is TemplateStyle.PER_CLASS:
        segments = []
        for cls in choices.class_order:
            bits = []
            attrs = attrs_of(cls)
            constrs = constraints_of(cls)
            if attrs:
                bits.append(f"{choices.verb} {_attr_list(attrs)}")
            if constrs:
                bits.append(f"{choices.constraint_introducer} {_constraint_list(constrs)}")
            bits.append(f"{choices.class_preposition} {cls}")
            segments.append(" ".join(bits))
        return _SEGMENT_JOINER.join(segments)

    flat_attrs = [attr for cls in choices.class_order for attr in attrs_of(cls)]
    flat_constrs = [
        phrase for cls in choices.class_order for phrase in constraints_of(cls)
    ]
    blocks: dict[str, str | None] = {
        "attr": f"{choices.verb} {_attr_list(flat_attrs)}" if flat_attrs else None,
        "class": f"{choices.class_preposition} {', '.join(choices.class_order)}",
        "constr": (
            f"{choices.constraint_introducer} {_constraint_list(flat_constrs)}"
            if flat_constrs
            else None
        ),
    }
    order = _BLOCK_ORDER[style]
    rendered = [blocks[name] for name in order if blocks[name] is not None]
    # A sentence-initial class block takes a comma, as in
    # "from publication, give abstracttext".
    if order[0] == "class" and len(rendered) > 1:
        rendered[0] = rendered[0] + ","
    return " ".join(rendered)


def render_english(
    q: QueryGraph,
    style: TemplateStyle,
    rng: np.random.Generator,
    table: SynonymTable | None = None,
) -> str:
    """Render ``q`` in the given style with randomly sampled word choices."""
    return render_with_choices(q, style, sample_choices(q, rng, table))


def sample_rendering(
    q: QueryGraph, rng: np.random.Generator, table: SynonymTable | None = None
) -> str:
    """Render ``q`` with a uniformly chosen style, then sampled word choices."""
    styles = list(TemplateStyle)
    style = styles[int(rng.integers(len(styles)))]
    return render_english(q, style, rng, table)

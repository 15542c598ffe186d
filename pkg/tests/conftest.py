import json
from importlib import resources

import pytest

from nl2query.checkpoint import build_model
from nl2query.corpus import ParallelCorpus, materialize_records
from nl2query.generate import GenParams, generate_bucketed
from nl2query.schema import SchemaGraph, parse_schema_descriptor
from nl2query.training import train
from nl2query.transformer import ModelConfig


def load_bundled_schema(name: str) -> SchemaGraph:
    text = resources.files("nl2query.data").joinpath(f"{name}.json").read_text("utf-8")
    return parse_schema_descriptor(text)


@pytest.fixture(scope="session")
def graph_schema() -> SchemaGraph:
    """Five-class movie schema with one cycle (graph-database tier)."""
    return load_bundled_schema("graph_tier")


@pytest.fixture(scope="session")
def relational_schema() -> SchemaGraph:
    """Eight-class retail schema whose FK edges form a tree."""
    return load_bundled_schema("relational_tier")


@pytest.fixture(scope="session")
def warehouse_schema() -> SchemaGraph:
    """53-class logistics schema with heavy attribute-name reuse."""
    return load_bundled_schema("warehouse_tier")


@pytest.fixture(scope="session")
def graph_schema_text() -> str:
    return resources.files("nl2query.data").joinpath("graph_tier.json").read_text("utf-8")


OVERFIT_CONFIG = ModelConfig(
    n_layers=2,
    n_heads=2,
    model_dim=64,
    feedforward_dim=128,
    dropout_rate=0.0,
    max_sequence_length=96,
    warmup_steps=100,
    batch_size=10,
    early_stopping_patience=1000,
)


@pytest.fixture(scope="session")
def overfit(graph_schema):
    """(records, checkpoint, model) trained to memorize a 10-record corpus.

    Validation is the training corpus itself, so best-state restore keeps
    the memorizer instead of an early babbling epoch.
    """
    params = GenParams(cap_classes=2, value_mode="placeholder", seed=11)
    pairs = generate_bucketed(graph_schema, params, {1: 6, 2: 4})
    records = materialize_records(pairs, seed=11)
    doubled = tuple(records) + tuple(records)
    pc = ParallelCorpus(doubled, ("train",) * 10 + ("validation",) * 10)
    ckpt = train(pc, OVERFIT_CONFIG, seed=11, max_epochs=300)
    return records, ckpt, build_model(ckpt)

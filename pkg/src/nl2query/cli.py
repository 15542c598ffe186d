"""Command-line entry point orchestrating the full pipeline.

Subcommands mirror the workflow stages: ``schema`` (import/stats),
``corpus gen``, ``dataset split``, ``train``, ``predict``, ``translate``,
``eval``, and ``serve``.  Data goes to files or stdout; progress and
errors go to stderr.  Every subcommand is deterministic given its inputs
and seeds.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys

from . import corpus as corpus_mod
from . import emit, metrics
from .checkpoint import CheckpointError, build_model, load_checkpoint, save_checkpoint
from .decoding import beam_predict, predict_query_graphs
from .english import SynonymTableError
from .generate import GenerationError, GenParams, generate_bucketed, generate_corpus
from .querygraph import TargetParseError, parse_target
from .schema import (
    SchemaError,
    SchemaGraph,
    import_sql_ddl,
    parse_schema_descriptor,
    schema_stats,
    serialize_schema_descriptor,
)
from .training import TrainingDivergedError, train
from .transformer import ModelConfig
from .vocab import VocabularyError, load_pretrained_embeddings, build_vocab

_ERRORS = (
    SchemaError,
    GenerationError,
    corpus_mod.SplitError,
    VocabularyError,
    CheckpointError,
    TrainingDivergedError,
    SynonymTableError,
    emit.EmissionError,
    TargetParseError,
    ValueError,
    OSError,
)

DIALECTS = ("sql", "cypher", "service")


def _load_schema(path: str) -> SchemaGraph:
    return parse_schema_descriptor(pathlib.Path(path).read_text(encoding="utf-8"))


def _emit_dialect(query, schema: SchemaGraph, dialect: str) -> str:
    if dialect == "sql":
        return emit.to_sql(query, schema)
    if dialect == "cypher":
        return emit.to_cypher(query, schema)
    if dialect == "service":
        return json.dumps(emit.to_service_query(query, schema), indent=2)
    raise ValueError(f"unknown dialect {dialect!r}")


def _parse_buckets(text: str) -> dict[int, int]:
    sizes: dict[int, int] = {}
    for part in text.split(","):
        nc, _, count = part.partition("=")
        sizes[int(nc)] = int(count)
    return sizes


# ---------------------------------------------------------------------------
# subcommand bodies
# ---------------------------------------------------------------------------

def _cmd_schema_import(args) -> int:
    if args.ddl:
        schema = import_sql_ddl(pathlib.Path(args.ddl).read_text(encoding="utf-8"))
    else:
        schema = _load_schema(args.descriptor)
    text = serialize_schema_descriptor(schema)
    if args.out:
        pathlib.Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        print(text, end="")
    return 0


def _cmd_schema_stats(args) -> int:
    stats = schema_stats(_load_schema(args.schema))
    print(json.dumps({
        "class_count": stats.class_count,
        "total_attributes": stats.total_attributes,
        "unique_attributes": stats.unique_attributes,
        "edge_count": stats.edge_count,
    }, indent=2))
    return 0


def _cmd_corpus_gen(args) -> int:
    schema = _load_schema(args.schema)
    params = GenParams(
        n_queries=args.n,
        attribute_choice_probability=args.p_attr,
        constraint_choice_probability=args.p_constr,
        graph_traversal_probability=args.p_traverse,
        cap_classes=args.cap,
        value_mode=args.value_mode,
        seed=args.seed,
    )
    if args.buckets:
        pairs = generate_bucketed(schema, params, _parse_buckets(args.buckets))
    else:
        pairs = generate_corpus(schema, params)
    records = corpus_mod.materialize_records(pairs, seed=args.seed)
    with open(args.out, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps({
                "source": record.source,
                "target": record.target,
                "class_count": record.class_count,
            }) + "\n")
    print(f"wrote {len(records)} records to {args.out}", file=sys.stderr)
    return 0


def _read_corpus_jsonl(path: str) -> list[corpus_mod.CorpusRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                doc = json.loads(line)
                records.append(corpus_mod.CorpusRecord(
                    doc["source"], doc["target"], doc["class_count"]
                ))
    return records


def _cmd_dataset_split(args) -> int:
    records = _read_corpus_jsonl(args.corpus)
    pc = corpus_mod.split_dataset(records, seed=args.seed)
    corpus_mod.write_parallel_files(pc, args.out_dir)
    sizes = pc.sizes()
    print(
        f"split {len(records)} records: train {sizes['train']}, "
        f"validation {sizes['validation']}, test {sizes['test']}",
        file=sys.stderr,
    )
    if args.overlap:
        print(json.dumps({
            str(nc): round(fraction, 4)
            for nc, fraction in corpus_mod.overlap_analysis(pc).items()
        }, indent=2))
    return 0


def _cmd_train(args) -> int:
    pc = corpus_mod.read_parallel_files(args.data)
    config = ModelConfig(
        n_layers=args.layers,
        n_heads=args.heads,
        model_dim=args.dim,
        feedforward_dim=args.ff,
        dropout_rate=args.dropout,
        max_sequence_length=args.max_len,
        warmup_steps=args.warmup,
        lr_factor=args.lr_factor,
        batch_size=args.batch_size,
        early_stopping_patience=args.patience,
        label_smoothing=args.label_smoothing,
    )
    pretrained = None
    if args.embeddings:
        source_vocab, _ = build_vocab(pc)
        pretrained, matched = load_pretrained_embeddings(
            args.embeddings, source_vocab, config.model_dim
        )
        print(f"pretrained embeddings matched {matched} tokens", file=sys.stderr)
    ckpt = train(
        pc, config,
        pretrained_embeddings=pretrained,
        seed=args.seed,
        max_epochs=args.max_epochs,
        log=lambda line: print(line, file=sys.stderr),
    )
    save_checkpoint(ckpt, args.out)
    meta = ckpt.metadata
    print(
        f"saved {args.out}: {meta['epochs_trained']} epochs, best validation "
        f"loss {meta['best_validation_loss']:.4f}, "
        f"{meta['wall_clock_minutes']:.2f} minutes",
        file=sys.stderr,
    )
    return 0


def _cmd_predict(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    schema = _load_schema(args.schema)
    result = predict_query_graphs(args.question, ckpt, schema, args.k)
    for rank, candidate in enumerate(result.candidates, start=1):
        print(f"#{rank}  score {candidate.score:.4f}")
        print(f"  reading: {emit.paraphrase(candidate.query)}")
        print(f"  target:  {candidate.target}")
        if args.dialect:
            text = _emit_dialect(candidate.query, schema, args.dialect)
            indented = "\n".join("  " + line for line in text.splitlines())
            print(indented)
    for target, reason in result.failures:
        print(f"unparseable beam: {target!r} ({reason})", file=sys.stderr)
    if not result.candidates:
        print("no parseable candidates", file=sys.stderr)
    return 0


def _cmd_translate(args) -> int:
    schema = _load_schema(args.schema)
    if args.doc == "-":
        doc = json.load(sys.stdin)
    else:
        doc = json.loads(pathlib.Path(args.doc).read_text(encoding="utf-8"))
    query = emit.from_service_query(doc, schema)
    print(_emit_dialect(query, schema, args.dialect))
    return 0


def _cmd_eval(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    schema = _load_schema(args.schema)
    pc = corpus_mod.read_parallel_files(args.data)
    test = pc.split("test")
    if not test:
        raise ValueError("test split is empty")
    model = build_model(ckpt)
    max_k = max(args.k)
    predictions = []
    truths = []
    class_counts = []
    for record in test:
        result = predict_query_graphs(record.source, ckpt, schema, max_k, model=model)
        predictions.append([c.query for c in result.candidates])
        truths.append(parse_target(record.target, schema))
        class_counts.append(record.class_count)
    report = metrics.per_class_count_report(
        predictions, truths, class_counts,
        training_minutes=ckpt.metadata.get("wall_clock_minutes"),
        ks=tuple(args.k),
    )
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        pathlib.Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        print(text)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    app = create_app(
        args.checkpoint, args.schema, predict_timeout_seconds=args.timeout
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nl2query",
        description="Build natural-language query interfaces from schemas.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    schema = sub.add_parser("schema", help="schema descriptor tools")
    schema_sub = schema.add_subparsers(dest="subcommand", required=True)
    imp = schema_sub.add_parser(
        "import", help="import SQL DDL or normalize a descriptor",
        formatter_class=fmt,
    )
    group = imp.add_mutually_exclusive_group(required=True)
    group.add_argument("--ddl", help="SQL DDL file with CREATE TABLE statements")
    group.add_argument("--descriptor", help="existing schema descriptor to normalize")
    imp.add_argument("--out", help="output descriptor path (default: stdout)")
    imp.set_defaults(func=_cmd_schema_import)
    stats = schema_sub.add_parser(
        "stats", help="print class/attribute/edge counts", formatter_class=fmt
    )
    stats.add_argument("--schema", required=True, help="schema descriptor path")
    stats.set_defaults(func=_cmd_schema_stats)

    corpus = sub.add_parser("corpus", help="training corpus generation")
    corpus_sub = corpus.add_subparsers(dest="subcommand", required=True)
    gen = corpus_sub.add_parser(
        "gen", help="random-walk corpus generation", formatter_class=fmt
    )
    gen.add_argument("--schema", required=True, help="schema descriptor path")
    gen.add_argument("--n", type=int, default=1000, help="number of records")
    gen.add_argument("--p-attr", type=float, default=0.25,
                     help="per-attribute report probability")
    gen.add_argument("--p-constr", type=float, default=0.05,
                     help="per-attribute constraint probability")
    gen.add_argument("--p-traverse", type=float, default=0.5,
                     help="probability of walking to a further class")
    gen.add_argument("--cap", type=int, default=3,
                     help="maximum classes per query")
    gen.add_argument("--seed", type=int, default=0, help="generation seed")
    gen.add_argument("--value-mode", choices=("sampled", "placeholder"),
                     default="sampled", help="constraint value rendering")
    gen.add_argument("--buckets",
                     help="explicit class-count bucket sizes, e.g. 1=600,2=300,3=100 "
                          "(default: equal buckets over 1..cap)")
    gen.add_argument("--out", required=True, help="output corpus JSONL path")
    gen.set_defaults(func=_cmd_corpus_gen)

    dataset = sub.add_parser("dataset", help="corpus splitting")
    dataset_sub = dataset.add_subparsers(dest="subcommand", required=True)
    split = dataset_sub.add_parser(
        "split", help="60/20/20 split with longest-query holdout",
        formatter_class=fmt,
    )
    split.add_argument("--corpus", required=True, help="corpus JSONL from `corpus gen`")
    split.add_argument("--seed", type=int, default=0, help="shuffle seed")
    split.add_argument("--out-dir", required=True, help="directory for split files")
    split.add_argument("--overlap", action="store_true",
                       help="print per-class-count train/test overlap")
    split.set_defaults(func=_cmd_dataset_split)

    train_cmd = sub.add_parser(
        "train", help="train the translation model", formatter_class=fmt
    )
    train_cmd.add_argument("--data", required=True, help="split directory")
    train_cmd.add_argument("--out", required=True, help="checkpoint output path")
    train_cmd.add_argument("--layers", type=int, default=2, help="encoder/decoder layers")
    train_cmd.add_argument("--heads", type=int, default=4, help="attention heads")
    train_cmd.add_argument("--dim", type=int, default=128, help="model width")
    train_cmd.add_argument("--ff", type=int, default=512, help="feed-forward width")
    train_cmd.add_argument("--dropout", type=float, default=0.1, help="dropout rate")
    train_cmd.add_argument("--max-len", type=int, default=160,
                           help="maximum sequence length")
    train_cmd.add_argument("--warmup", type=int, default=400,
                           help="learning-rate warmup steps")
    train_cmd.add_argument("--lr-factor", type=float, default=1.0,
                           help="learning-rate scale factor")
    train_cmd.add_argument("--batch-size", type=int, default=64, help="batch size")
    train_cmd.add_argument("--patience", type=int, default=5,
                           help="early-stopping patience in epochs")
    train_cmd.add_argument("--label-smoothing", type=float, default=0.1,
                           help="label smoothing mass")
    train_cmd.add_argument("--max-epochs", type=int, default=100,
                           help="epoch budget")
    train_cmd.add_argument("--seed", type=int, default=0, help="training seed")
    train_cmd.add_argument("--embeddings",
                           help="optional pretrained word-vector file for the encoder")
    train_cmd.set_defaults(func=_cmd_train)

    predict = sub.add_parser(
        "predict", help="translate a question into ranked queries",
        formatter_class=fmt,
    )
    predict.add_argument("--checkpoint", required=True, help="model checkpoint")
    predict.add_argument("--schema", required=True, help="schema descriptor path")
    predict.add_argument("--question", required=True, help="natural-language question")
    predict.add_argument("--k", type=int, choices=(1, 3, 5), default=5,
                         help="number of ranked candidates")
    predict.add_argument("--dialect", choices=DIALECTS,
                         help="also print each candidate in this dialect")
    predict.set_defaults(func=_cmd_predict)

    translate = sub.add_parser(
        "translate", help="emit a query document in a chosen dialect",
        formatter_class=fmt,
    )
    translate.add_argument("--schema", required=True, help="schema descriptor path")
    translate.add_argument("--dialect", choices=DIALECTS, required=True,
                           help="output query language")
    translate.add_argument("--doc", default="-",
                           help="service query document path, '-' for stdin")
    translate.set_defaults(func=_cmd_translate)

    eval_cmd = sub.add_parser(
        "eval", help="score a checkpoint on the test split", formatter_class=fmt
    )
    eval_cmd.add_argument("--checkpoint", required=True, help="model checkpoint")
    eval_cmd.add_argument("--schema", required=True, help="schema descriptor path")
    eval_cmd.add_argument("--data", required=True, help="split directory")
    eval_cmd.add_argument("--k", type=int, nargs="+", default=[1, 3, 5],
                          help="candidate list sizes to score")
    eval_cmd.add_argument("--out", help="write the JSON report here instead of stdout")
    eval_cmd.set_defaults(func=_cmd_eval)

    serve = sub.add_parser(
        "serve", help="run the HTTP prediction service", formatter_class=fmt
    )
    serve.add_argument("--checkpoint", required=True, help="model checkpoint")
    serve.add_argument("--schema", required=True, help="schema descriptor path")
    serve.add_argument("--host", default="127.0.0.1", help="bind address")
    serve.add_argument("--port", type=int, default=8000, help="bind port")
    serve.add_argument(
        "--timeout",
        type=float,
        default=30.0,
        help="per-request prediction timeout in seconds",
    )
    serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

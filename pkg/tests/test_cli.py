import json

import pytest

from nl2query.cli import main


@pytest.fixture()
def schema_path(tmp_path, graph_schema_text):
    p = tmp_path / "schema.json"
    p.write_text(graph_schema_text, encoding="utf-8")
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSchemaCommands:
    def test_stats(self, capsys, schema_path):
        code, out, _ = run(capsys, "schema", "stats", "--schema", schema_path)
        assert code == 0
        stats = json.loads(out)
        assert stats["class_count"] == 5
        assert stats["edge_count"] == 5
        assert stats["total_attributes"] == 70

    def test_import_normalizes_idempotently(self, capsys, tmp_path, schema_path):
        out1 = tmp_path / "norm1.json"
        code, _, err = run(
            capsys, "schema", "import", "--descriptor", schema_path,
            "--out", str(out1),
        )
        assert code == 0
        assert str(out1) in err
        out2 = tmp_path / "norm2.json"
        code, _, _ = run(
            capsys, "schema", "import", "--descriptor", str(out1),
            "--out", str(out2),
        )
        assert code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_import_ddl(self, capsys, tmp_path):
        ddl = tmp_path / "tables.sql"
        ddl.write_text(
            "CREATE TABLE author (id INTEGER PRIMARY KEY, penname TEXT);\n"
            "CREATE TABLE book (id INTEGER, title TEXT, author_id INTEGER,"
            " FOREIGN KEY (author_id) REFERENCES author(id));\n",
            encoding="utf-8",
        )
        code, out, _ = run(capsys, "schema", "import", "--ddl", str(ddl))
        assert code == 0
        doc = json.loads(out)
        names = {c["name"] for c in doc["classes"]}
        assert names == {"author", "book"}

    def test_missing_file_is_an_error_line(self, capsys, tmp_path):
        code, out, err = run(
            capsys, "schema", "stats", "--schema", str(tmp_path / "nope.json")
        )
        assert code == 1
        assert out == ""
        assert err.startswith("error:")


class TestCorpusCommands:
    def test_gen_deterministic(self, capsys, tmp_path, schema_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        for out in (a, b):
            code, _, err = run(
                capsys, "corpus", "gen", "--schema", schema_path,
                "--n", "30", "--cap", "3", "--seed", "7",
                "--value-mode", "placeholder", "--out", str(out),
            )
            assert code == 0
            assert "wrote 30 records" in err
        assert a.read_bytes() == b.read_bytes()

    def test_gen_seed_changes_output(self, capsys, tmp_path, schema_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        for seed, out in (("7", a), ("8", b)):
            run(capsys, "corpus", "gen", "--schema", schema_path,
                "--n", "30", "--seed", seed, "--out", str(out))
        assert a.read_bytes() != b.read_bytes()

    def test_gen_explicit_buckets(self, capsys, tmp_path, schema_path):
        out = tmp_path / "c.jsonl"
        code, _, _ = run(
            capsys, "corpus", "gen", "--schema", schema_path,
            "--n", "20", "--cap", "3", "--buckets", "1=12,2=6,3=2",
            "--out", str(out),
        )
        assert code == 0
        counts = {}
        for line in out.read_text().splitlines():
            nc = json.loads(line)["class_count"]
            counts[nc] = counts.get(nc, 0) + 1
        assert counts == {1: 12, 2: 6, 3: 2}

    def test_gen_indivisible_n_fails(self, capsys, tmp_path, schema_path):
        code, _, err = run(
            capsys, "corpus", "gen", "--schema", schema_path,
            "--n", "10", "--cap", "3", "--out", str(tmp_path / "x.jsonl"),
        )
        assert code == 1
        assert "divisible" in err


class TestSplitCommand:
    def test_split_writes_six_files(self, capsys, tmp_path, schema_path):
        corpus = tmp_path / "c.jsonl"
        run(capsys, "corpus", "gen", "--schema", schema_path,
            "--n", "20", "--cap", "3", "--buckets", "1=12,2=6,3=2",
            "--value-mode", "placeholder", "--out", str(corpus))
        out_dir = tmp_path / "splits"
        code, out, err = run(
            capsys, "dataset", "split", "--corpus", str(corpus),
            "--out-dir", str(out_dir), "--overlap",
        )
        assert code == 0
        assert "train 12, validation 4, test 4" in err
        for name in ("train", "val", "test"):
            src = (out_dir / f"src-{name}.txt").read_text().splitlines()
            tgt = (out_dir / f"tgt-{name}.txt").read_text().splitlines()
            assert len(src) == len(tgt)
        overlap = json.loads(out)
        assert set(overlap) <= {"1", "2", "3"}

    def test_oversized_holdout_fails(self, capsys, tmp_path, schema_path):
        corpus = tmp_path / "c.jsonl"
        run(capsys, "corpus", "gen", "--schema", schema_path,
            "--n", "20", "--cap", "2", "--buckets", "1=10,2=10",
            "--out", str(corpus))
        code, _, err = run(
            capsys, "dataset", "split", "--corpus", str(corpus),
            "--out-dir", str(tmp_path / "s"),
        )
        assert code == 1
        assert err.startswith("error:")


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory, graph_schema_text):
    """corpus gen -> train -> predict/eval via the real argv surface.

    The split directory is handcrafted with train == validation == test so
    a small model can memorize it; an honest 10-record split has nothing
    learnable in validation and early stopping would hand back a babbler.
    """
    root = tmp_path_factory.mktemp("pipeline")
    schema_path = root / "schema.json"
    schema_path.write_text(graph_schema_text, encoding="utf-8")
    corpus = root / "corpus.jsonl"
    splits = root / "splits"
    ckpt = root / "model.ckpt"
    assert main(
        ["corpus", "gen", "--schema", str(schema_path), "--n", "10",
         "--cap", "2", "--buckets", "1=6,2=4", "--seed", "11",
         "--value-mode", "placeholder", "--out", str(corpus)]
    ) == 0
    records = [json.loads(line) for line in corpus.read_text().splitlines()]
    splits.mkdir()
    for name in ("train", "val", "test"):
        (splits / f"src-{name}.txt").write_text(
            "".join(r["source"] + "\n" for r in records), encoding="utf-8"
        )
        (splits / f"tgt-{name}.txt").write_text(
            "".join(r["target"] + "\n" for r in records), encoding="utf-8"
        )
    assert main(
        ["train", "--data", str(splits), "--out", str(ckpt),
         "--layers", "2", "--heads", "2", "--dim", "64", "--ff", "128",
         "--dropout", "0.0", "--max-len", "96", "--warmup", "100",
         "--batch-size", "10", "--patience", "1000",
         "--max-epochs", "300", "--seed", "11"]
    ) == 0
    return schema_path, splits, ckpt


class TestPipeline:

    def test_train_wrote_checkpoint(self, pipeline):
        _, _, ckpt = pipeline
        assert ckpt.read_bytes()[:4] == b"NLQC"

    def test_predict_prints_ranked_candidates(self, capsys, pipeline):
        schema_path, splits, ckpt = pipeline
        question = (splits / "src-train.txt").read_text().splitlines()[0]
        code, out, _ = run(
            capsys, "predict", "--checkpoint", str(ckpt),
            "--schema", str(schema_path),
            "--question", question, "--k", "3",
        )
        assert code == 0
        assert "#1  score " in out
        assert "reading: " in out

    def test_predict_with_dialect(self, capsys, pipeline):
        schema_path, splits, ckpt = pipeline
        question = (splits / "src-train.txt").read_text().splitlines()[0]
        code, out, _ = run(
            capsys, "predict", "--checkpoint", str(ckpt),
            "--schema", str(schema_path),
            "--question", question, "--k", "1",
            "--dialect", "sql",
        )
        assert code == 0
        assert "SELECT" in out

    def test_eval_report(self, capsys, pipeline, tmp_path):
        schema_path, splits, ckpt = pipeline
        report_path = tmp_path / "report.json"
        code, _, err = run(
            capsys, "eval", "--checkpoint", str(ckpt),
            "--schema", str(schema_path), "--data", str(splits),
            "--out", str(report_path),
        )
        assert code == 0
        report = json.loads(report_path.read_text())
        sizes = [row["count"] for row in report["per_class_count"].values()]
        assert sum(sizes) == report["dataset_size"]
        assert set(report["global_accuracy"]) == {"1", "3", "5"}
        # test split == training split here, so the memorizer scores perfectly
        assert report["global_accuracy"]["1"] == 1.0

    def test_corrupt_checkpoint_is_an_error(self, capsys, pipeline, tmp_path):
        schema_path, _, ckpt = pipeline
        bad = tmp_path / "bad.ckpt"
        bad.write_bytes(ckpt.read_bytes()[:64])
        code, _, err = run(
            capsys, "predict", "--checkpoint", str(bad),
            "--schema", str(schema_path), "--question", "show title in movie",
        )
        assert code == 1
        assert err.startswith("error:")


class TestTranslateCommand:
    DOC = {
        "select": ["movie.title"],
        "constraints": [],
        "joins": [],
    }

    def test_from_file(self, capsys, tmp_path, schema_path):
        doc_path = tmp_path / "doc.json"
        doc_path.write_text(json.dumps(self.DOC), encoding="utf-8")
        code, out, _ = run(
            capsys, "translate", "--schema", schema_path,
            "--dialect", "sql", "--doc", str(doc_path),
        )
        assert code == 0
        assert out.strip() == "SELECT movie.title\nFROM movie"

    def test_from_stdin(self, capsys, monkeypatch, schema_path, tmp_path):
        import io

        monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps(self.DOC)))
        code, out, _ = run(
            capsys, "translate", "--schema", schema_path, "--dialect", "cypher"
        )
        assert code == 0
        assert out.strip() == "MATCH (movie:movie)\nRETURN movie.title"

    def test_bad_document_fails_cleanly(self, capsys, tmp_path, schema_path):
        doc_path = tmp_path / "doc.json"
        doc_path.write_text(
            json.dumps({"select": ["ghost.title"], "constraints": [], "joins": []}),
            encoding="utf-8",
        )
        code, _, err = run(
            capsys, "translate", "--schema", schema_path,
            "--dialect", "sql", "--doc", str(doc_path),
        )
        assert code == 1
        assert err.startswith("error:")

    def test_unknown_dialect_rejected_by_parser(self, capsys, schema_path):
        with pytest.raises(SystemExit):
            main(["translate", "--schema", schema_path, "--dialect", "mongo"])

import json
from pathlib import Path

import pytest

from softaspect.cli import main
from softaspect.config import PipelineConfig, load_config, parse_config_text
from softaspect.corpus_io import write_labeled_jsonl
from softaspect.errors import ConfigurationError
from softaspect.synthetic import make_review_corpus


@pytest.fixture
def workspace(tmp_path):
    corpus = make_review_corpus(n_unlabeled=160, n_labeled=40, seed=5)
    docs = [" ".join(s.text for s in corpus.unlabeled[i:i + 3])
            for i in range(0, len(corpus.unlabeled), 3)]
    docs.append("Nothing about the four topics here. Still nothing.")
    (tmp_path / "reviews.txt").write_text("\n".join(docs) + "\n", encoding="utf-8")
    write_labeled_jsonl(corpus.labeled[:20], tmp_path / "dev.jsonl")
    write_labeled_jsonl(corpus.labeled[20:], tmp_path / "test.jsonl")
    write_labeled_jsonl(corpus.labeled, tmp_path / "train.jsonl")
    (tmp_path / "run.cfg").write_text(
        "unlabeled_corpus = reviews.txt\n"
        "labeled_test = test.jsonl\n"
        "labeled_dev = dev.jsonl\n"
        "labeled_train = train.jsonl\n"
        "labeled_format = jsonl\n"
        "artifacts = art\n"
        "dim = 16\nepochs = 10\nmin_count = 1\n"
        "k = 4\nn_init = 2\nseed = 3\n", encoding="utf-8")
    return tmp_path


def run(ws, *args):
    return main(["--config", str(ws / "run.cfg"), *args])


def test_full_pipeline(workspace, capsys):
    ws, art = workspace, workspace / "art"
    assert run(ws, "ingest") == 0
    lines = (art / "sentences.jsonl").read_text().splitlines()
    assert len(lines) == 160
    assert run(ws, "train") == 0
    header = (art / "embeddings.txt").read_text().splitlines()[0].split()
    assert int(header[1]) == 16
    assert run(ws, "cluster") == 0
    assert (art / "termsim.txt").exists() and (art / "clusters.json").exists()
    assert run(ws, "eval") == 0
    metrics = json.loads((art / "metrics.json").read_text())
    for key in ("precision", "recall", "f1", "tp", "fp", "fn", "threshold", "baselines"):
        assert key in metrics
    assert metrics["threshold_tuned_on"] == "dev"
    assert set(metrics["baselines"]) == {"random", "majority"}
    assert json.loads(capsys.readouterr().out.strip().splitlines()[-1])["f1"] == metrics["f1"]

    (ws / "input.txt").write_text("The pasta was fresh and tasty\nWe came back\n", encoding="utf-8")
    assert run(ws, "detect", str(ws / "input.txt"), "-o", str(ws / "out.jsonl")) == 0
    rows = [json.loads(x) for x in (ws / "out.jsonl").read_text().splitlines()]
    assert [r["id"] for r in rows] == ["1", "2"]
    assert all(r["assigned"] for r in rows)

    assert run(ws, "sweep", "alpha", "--values", "0.5,1.0") == 0
    csv_lines = (art / "sweep_alpha.csv").read_text().splitlines()
    assert csv_lines[0] == "param,value,precision,recall,f1" and len(csv_lines) == 3
    assert run(ws, "sweep", "k", "--range", "2:4:2", "-o", str(ws / "k.csv")) == 0
    assert len((ws / "k.csv").read_text().splitlines()) == 3


def test_ingest_idempotent_and_training_reproducible(workspace):
    ws, art = workspace, workspace / "art"
    assert run(ws, "ingest") == 0 and run(ws, "train") == 0
    first = ((art / "sentences.jsonl").read_bytes(), (art / "embeddings.txt").read_bytes())
    assert run(ws, "ingest") == 0 and run(ws, "train") == 0
    assert first == ((art / "sentences.jsonl").read_bytes(), (art / "embeddings.txt").read_bytes())


def test_missing_upstream_stage(workspace, capsys):
    assert run(workspace, "cluster") == 2
    assert "ingest" in capsys.readouterr().err


def test_stale_artifact_rejected(workspace, capsys):
    ws = workspace
    assert run(ws, "ingest") == 0 and run(ws, "train") == 0
    assert main(["--config", str(ws / "run.cfg"), "--seed", "4", "cluster"]) == 2
    assert "stale" in capsys.readouterr().err


def test_empty_corpus_exits_with_usage_error(workspace, capsys):
    (workspace / "reviews.txt").write_text("Nothing relevant. At all.\n", encoding="utf-8")
    assert run(workspace, "ingest") == 2
    assert "nothing to cluster" in capsys.readouterr().err


def test_detect_without_threshold_needs_eval(workspace, capsys):
    ws = workspace
    for stage in ("ingest", "train", "cluster"):
        assert run(ws, stage) == 0
    (ws / "input.txt").write_text("food\n", encoding="utf-8")
    assert run(ws, "detect", str(ws / "input.txt")) == 2
    assert "eval" in capsys.readouterr().err


def test_bad_config_key(tmp_path, capsys):
    (tmp_path / "bad.cfg").write_text("alpah = 0.3\n", encoding="utf-8")
    assert main(["--config", str(tmp_path / "bad.cfg"), "ingest"]) == 2
    assert "alpah" in capsys.readouterr().err


def test_config_defaults_and_parsing(tmp_path):
    cfg = PipelineConfig()
    assert (cfg.dim, cfg.k, cfg.alpha, cfg.kernel_nonzero_limit) == (300, 17, 0.7, 100)
    assert cfg.grid()[:3] == [0.0, 0.01, 0.02] and len(cfg.grid()) == 101
    parsed = parse_config_text("k = 8  # clusters\ntune_on_test = yes\nthreshold = none\n"
                               "lexicon = lex.json\n", base_dir=tmp_path)
    assert parsed.k == 8 and parsed.tune_on_test is True and parsed.threshold is None
    assert Path(parsed.lexicon) == tmp_path / "lex.json"
    with pytest.raises(ConfigurationError):
        parse_config_text("k = many\n")
    with pytest.raises(ConfigurationError):
        parse_config_text("just words\n")
    with pytest.raises(ConfigurationError):
        parse_config_text("alpha = 2\n").validate()
    assert load_config(None) == PipelineConfig()


def test_missing_corpus_exits_with_usage_error(workspace, capsys):
    (workspace / "reviews.txt").unlink()
    assert run(workspace, "train") == 2
    assert "not found" in capsys.readouterr().err

"""Batch command line front end.

Stages communicate through files in the artifact directory.  Every artifact
has a ``<stage>.meta.json`` recording the hash of the settings it was built
from; downstream commands refuse artifacts whose hash no longer matches the
current configuration.

Exit codes: 0 success, 1 internal error, 2 usage or input error.
"""
import argparse
import hashlib
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .clustering import build_cluster_model, load_cluster_model, save_cluster_model
from .config import PipelineConfig, load_config
from .corpus_io import (SentenceFilter, ingest_unlabeled, load_seed_lexicon, parse_labeled_corpus,
                        read_unlabeled, split_sentences, write_unlabeled)
from .detector import DetectorConfig, detect_many, final_scores, write_detections
from .embedding import load_word2vec_text, save_word2vec_text, train_cbow
from .errors import SoftAspectError
from .evaluation import (PipelineContext, majority_baseline, majority_labels, micro_metrics,
                         random_baseline, sweep_alpha, sweep_k, threshold_search,
                         write_metrics_json)
from .preprocess import load_stopwords, tokenize
from .similarity import (ScoreVector, build_term_similarity, load_term_similarity,
                         save_term_similarity)

logger = logging.getLogger("softaspect")

STAGE_KEYS = {
    "ingest": ("unlabeled_corpus", "lexicon"),
    "train": ("unlabeled_corpus", "stopwords", "pretrained_embeddings", "dim", "window",
              "negative", "epochs", "learning_rate", "min_learning_rate", "min_count", "seed"),
    "cluster": ("lexicon", "stopwords", "kernel_exponent", "kernel_threshold",
                "kernel_nonzero_limit", "k", "max_iters", "tolerance", "n_init", "seed"),
    "eval": ("labeled_test", "labeled_dev", "labeled_train", "labeled_format", "alpha",
             "threshold_step", "tune_on_test", "seed"),
}
STAGE_DEPS = {"ingest": (), "train": (), "cluster": ("ingest", "train"), "eval": ("cluster",)}

SENTENCES = "sentences.jsonl"
EMBEDDINGS = "embeddings.txt"
TERMSIM = "termsim.txt"
METRICS = "metrics.json"


class CliError(Exception):
    """Usage or input problem; reported with exit code 2."""


def stage_hash(config: PipelineConfig, stage: str) -> str:
    parts = [config.fingerprint(STAGE_KEYS[stage])]
    parts += [stage_hash(config, dep) for dep in STAGE_DEPS[stage]]
    return hashlib.sha256("|".join(parts).encode()).hexdigest()[:16]


def _meta_path(art: Path, stage):
    return art / f"{stage}.meta.json"


def write_meta(config, stage, **extra):
    art = Path(config.artifacts)
    meta = {"stage": stage, "config_hash": stage_hash(config, stage), "version": __version__}
    meta.update(extra)
    _meta_path(art, stage).write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")


def require_stage(config, stage):
    path = _meta_path(Path(config.artifacts), stage)
    if not path.exists():
        raise CliError(f"missing artifact from stage '{stage}'; run `softaspect {stage}` first")
    meta = json.loads(path.read_text())
    if meta.get("config_hash") != stage_hash(config, stage):
        raise CliError(f"artifact from stage '{stage}' is stale for the current configuration; "
                       f"rerun `softaspect {stage}`")
    return meta


def _require_path(config, key):
    value = getattr(config, key)
    if not value:
        raise CliError(f"config key '{key}' is required for this command")
    if not Path(value).exists():
        raise CliError(f"{key}: file not found: {value}")
    return value


def _lexicon(config):
    return load_seed_lexicon(config.lexicon)


def _stopwords(config):
    return load_stopwords(config.stopwords)


def _labeled(config, key, lexicon):
    path = _require_path(config, key)
    return parse_labeled_corpus(path, config.labeled_format, categories=lexicon.universe)


# -- commands ---------------------------------------------------------------

def cmd_ingest(config, args):
    corpus = _require_path(config, "unlabeled_corpus")
    lexicon = _lexicon(config)
    sentences = ingest_unlabeled(corpus, SentenceFilter.from_lexicon(lexicon))
    if not sentences:
        raise CliError(f"no sentence in {corpus} mentions a category name; nothing to cluster")
    art = Path(config.artifacts)
    write_unlabeled(sentences, art / SENTENCES)
    write_meta(config, "ingest", n_sentences=len(sentences))
    logger.info("wrote %d filtered sentences to %s", len(sentences), art / SENTENCES)


def cmd_train(config, args):
    art = Path(config.artifacts)
    if config.pretrained_embeddings:
        store = load_word2vec_text(_require_path(config, "pretrained_embeddings"))
    else:
        corpus = _require_path(config, "unlabeled_corpus")
        stop = _stopwords(config)
        docs = read_unlabeled(corpus)
        sentences = [tokenize(s, stop, f"{d.id}:{i}")
                     for d in docs for i, s in enumerate(split_sentences(d.text))]
        sentences = [s for s in sentences if s.tokens]
        if not sentences:
            raise CliError(f"no tokens found in {corpus}")
        store = train_cbow(sentences, config.cbow())
    save_word2vec_text(store, art / EMBEDDINGS)
    write_meta(config, "train", vocab_size=len(store), dim=store.dim)
    logger.info("saved %d x %d embeddings to %s", len(store), store.dim, art / EMBEDDINGS)


def _load_embeddings(config):
    require_stage(config, "train")
    return load_word2vec_text(Path(config.artifacts) / EMBEDDINGS)


def _ingested_tokens(config, stop):
    require_stage(config, "ingest")
    return [tokenize(s.text, stop, s.id) for s in read_unlabeled(Path(config.artifacts) / SENTENCES)]


def cmd_cluster(config, args):
    art = Path(config.artifacts)
    lexicon, stop = _lexicon(config), _stopwords(config)
    sentences = _ingested_tokens(config, stop)
    store = _load_embeddings(config)
    S = build_term_similarity(store, config.kernel_exponent, config.kernel_threshold,
                              config.kernel_nonzero_limit)
    save_term_similarity(S, art / TERMSIM)
    model = build_cluster_model(sentences, store, lexicon, S, config.kmeans())
    save_cluster_model(model, art)
    write_meta(config, "cluster", k=model.k, sizes=model.sizes.tolist())
    logger.info("clustered %d sentences into %d clusters", int(model.sizes.sum()), model.k)


def _load_model(config):
    require_stage(config, "cluster")
    art = Path(config.artifacts)
    store = load_word2vec_text(art / EMBEDDINGS)
    S = load_term_similarity(art / TERMSIM)
    return store, S, load_cluster_model(art)


def _read_input_sentences(path):
    """Plain text (one sentence per line) or JSON lines with ``id``/``text``."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("{"):
                obj = json.loads(line)
                out.append((str(obj.get("id", lineno)), obj["text"]))
            else:
                out.append((str(lineno), line))
    return out


def cmd_detect(config, args):
    if not Path(args.input).exists():
        raise CliError(f"input file not found: {args.input}")
    lexicon, stop = _lexicon(config), _stopwords(config)
    store, S, model = _load_model(config)
    threshold = config.threshold
    if threshold is None:
        meta = require_stage(config, "eval")
        threshold = meta["threshold"]
        logger.info("using threshold %.4g tuned by the eval stage", threshold)
    sentences = [tokenize(text, stop, sid) for sid, text in _read_input_sentences(args.input)]
    det_cfg = DetectorConfig(lexicon, alpha=config.alpha, threshold=threshold)
    detections = detect_many(sentences, model, S, det_cfg, store)
    out = Path(args.output) if args.output else Path(config.artifacts) / "detections.jsonl"
    write_detections(detections, out)
    logger.info("wrote %d detections to %s", len(detections), out)


def _scored(sentences, model, S, store, lexicon, alpha):
    scores = final_scores(sentences, model, S, store, lexicon, alpha)
    return [(s.source_id, ScoreVector(lexicon.names, row)) for s, row in zip(sentences, scores)]


def cmd_eval(config, args):
    art = Path(config.artifacts)
    lexicon, stop = _lexicon(config), _stopwords(config)
    store, S, model = _load_model(config)
    test = _labeled(config, "labeled_test", lexicon)
    if not test:
        raise CliError("labeled_test contains no sentences")
    test_tok = [tokenize(s.text, stop, s.id) for s in test]
    fallback = lexicon.fallback_category
    grid = config.grid()
    test_scored = _scored(test_tok, model, S, store, lexicon, config.alpha)
    if config.labeled_dev and not config.tune_on_test:
        dev = _labeled(config, "labeled_dev", lexicon)
        dev_tok = [tokenize(s.text, stop, s.id) for s in dev]
        threshold, _ = threshold_search(_scored(dev_tok, model, S, store, lexicon, config.alpha),
                                        dev, grid, fallback)
        _, metrics = threshold_search(test_scored, test, [threshold], fallback)
        tuned_on = "dev"
    else:
        if not config.tune_on_test:
            logger.warning("no labeled_dev given; tuning the threshold on the test set")
        threshold, metrics = threshold_search(test_scored, test, grid, fallback)
        tuned_on = "test"
    det_cfg = DetectorConfig(lexicon, alpha=config.alpha, threshold=threshold)
    detections = detect_many(test_tok, model, S, det_cfg, store)
    write_detections(detections, art / "eval_detections.jsonl")

    report = metrics.to_json()
    report.update({"threshold": threshold, "threshold_tuned_on": tuned_on, "alpha": config.alpha,
                   "k": model.k, "n_sentences": len(test)})
    baselines = {}
    if config.labeled_train:
        train = _labeled(config, "labeled_train", lexicon)
        baselines["random"] = micro_metrics(random_baseline(train, test, config.seed), test).to_json()
        labels = majority_labels(train, 2)
    else:
        labels = ("food", fallback)
    baselines["majority"] = micro_metrics(majority_baseline(test, labels), test).to_json()
    baselines["majority"]["labels"] = list(labels)
    report["baselines"] = baselines
    write_metrics_json(report, art / METRICS)
    write_meta(config, "eval", threshold=threshold, threshold_tuned_on=tuned_on)
    print(json.dumps({k: report[k] for k in ("precision", "recall", "f1", "threshold")}))


def _parse_values(param, values, range_):
    cast = int if param == "k" else float
    if values:
        out = [cast(v) for v in values.split(",") if v.strip()]
    elif range_:
        try:
            start, stop, step = (float(x) for x in range_.split(":"))
        except ValueError as exc:
            raise CliError("--range must look like start:stop:step") from exc
        n = int(round((stop - start) / step))
        out = [cast(round(start + i * step, 10)) for i in range(n + 1)]
    elif param == "alpha":
        out = [round(0.1 * i, 1) for i in range(11)]
    else:
        out = list(range(1, 31))
    if any(b <= a for a, b in zip(out, out[1:])):
        raise CliError("sweep values must be strictly increasing")
    return out


def cmd_sweep(config, args):
    art = Path(config.artifacts)
    lexicon, stop = _lexicon(config), _stopwords(config)
    values = _parse_values(args.param, args.values, args.range)
    unlabeled = _ingested_tokens(config, stop)
    store = _load_embeddings(config)
    S = build_term_similarity(store, config.kernel_exponent, config.kernel_threshold,
                              config.kernel_nonzero_limit)
    test = _labeled(config, "labeled_test", lexicon)
    evaluate = ([tokenize(s.text, stop, s.id) for s in test], test)
    tune = None
    if config.labeled_dev and not config.tune_on_test:
        dev = _labeled(config, "labeled_dev", lexicon)
        tune = ([tokenize(s.text, stop, s.id) for s in dev], dev)
    ctx = PipelineContext(unlabeled, store, S, lexicon, evaluate, tune, config.kmeans(),
                          config.grid())
    if args.param == "alpha":
        result = sweep_alpha(ctx, values, config.k)
    else:
        result = sweep_k(ctx, values, config.alpha)
    out = Path(args.output) if args.output else art / f"sweep_{args.param}.csv"
    result.write_csv(out)
    best_value, best = result.best()
    logger.info("best %s = %s (f1 %.4f); wrote %s", args.param, best_value, best.f1, out)


COMMANDS = {"ingest": cmd_ingest, "train": cmd_train, "cluster": cmd_cluster,
            "detect": cmd_detect, "eval": cmd_eval, "sweep": cmd_sweep}


def build_parser():
    parser = argparse.ArgumentParser(prog="softaspect", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument("--artifacts", help="artifact directory (overrides the config)")
    parser.add_argument("--seed", type=int, help="random seed (overrides the config)")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--version", action="version", version=f"softaspect {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ingest", help="filter unlabeled reviews into sentences")
    sub.add_parser("train", help="train or load word embeddings")
    sub.add_parser("cluster", help="build the term similarity matrix and cluster model")
    p = sub.add_parser("detect", help="assign categories to input sentences")
    p.add_argument("input", help="text file (one sentence per line) or JSON lines")
    p.add_argument("-o", "--output")
    sub.add_parser("eval", help="tune the threshold and report micro metrics and baselines")
    p = sub.add_parser("sweep", help="alpha or k sensitivity curve as CSV")
    p.add_argument("param", choices=("alpha", "k"))
    g = p.add_mutually_exclusive_group()
    g.add_argument("--values", help="comma separated values")
    g.add_argument("--range", help="start:stop:step (inclusive)")
    p.add_argument("-o", "--output")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config)
        if args.artifacts:
            config = replace(config, artifacts=args.artifacts)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        config.validate()
        Path(config.artifacts).mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](config, args)
    except (CliError, SoftAspectError, FileNotFoundError) as exc:
        print(f"softaspect {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception:  # noqa: BLE001
        logger.exception("internal error")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

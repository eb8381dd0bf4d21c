"""Pipeline configuration in a flat ``key = value`` text format.

Blank lines and ``#`` comments are ignored.  Relative paths are resolved
against the directory of the config file.  Example::

    unlabeled_corpus = data/yelp_reviews.jsonl
    labeled_test     = data/Restaurants_Test_Gold.xml
    k                = 17
    alpha            = 0.7
"""
import hashlib
import json
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

from .clustering import KmeansConfig
from .embedding import CbowConfig
from .errors import ConfigurationError

PATH_KEYS = ("unlabeled_corpus", "labeled_test", "labeled_dev", "labeled_train", "lexicon",
             "stopwords", "pretrained_embeddings")


@dataclass
class PipelineConfig:
    # inputs
    unlabeled_corpus: Optional[str] = None
    labeled_test: Optional[str] = None
    labeled_dev: Optional[str] = None
    labeled_train: Optional[str] = None
    labeled_format: str = "semeval_xml"
    lexicon: Optional[str] = None
    stopwords: Optional[str] = None
    pretrained_embeddings: Optional[str] = None
    artifacts: str = "artifacts"
    # embeddings
    dim: int = 300
    window: int = 5
    negative: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    min_learning_rate: float = 0.0001
    min_count: int = 5
    # term similarity kernel
    kernel_exponent: float = 2.0
    kernel_threshold: float = 0.0
    kernel_nonzero_limit: int = 100
    # clustering
    k: int = 17
    max_iters: int = 300
    tolerance: float = 1e-4
    n_init: int = 10
    # detection and evaluation
    alpha: float = 0.7
    threshold: Optional[float] = None
    threshold_step: float = 0.01
    tune_on_test: bool = False
    seed: int = 0

    def cbow(self) -> CbowConfig:
        return CbowConfig(dim=self.dim, window=self.window, negative_samples=self.negative,
                          epochs=self.epochs, initial_learning_rate=self.learning_rate,
                          min_learning_rate=self.min_learning_rate, min_count=self.min_count,
                          rng_seed=self.seed)

    def kmeans(self, k=None) -> KmeansConfig:
        return KmeansConfig(k=self.k if k is None else k, max_iters=self.max_iters,
                            tolerance=self.tolerance, rng_seed=self.seed, n_init=self.n_init)

    def grid(self):
        n = int(round(1.0 / self.threshold_step))
        return [round(i * self.threshold_step, 10) for i in range(n + 1)]

    def validate(self):
        self.cbow()
        self.kmeans()
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigurationError("alpha must lie in [0, 1]")
        if not 0.0 <= self.kernel_threshold < 1.0:
            raise ConfigurationError("kernel_threshold must lie in [0, 1)")
        if self.kernel_exponent <= 0 or self.kernel_nonzero_limit < 1:
            raise ConfigurationError("kernel_exponent and kernel_nonzero_limit must be positive")
        if not 0.0 < self.threshold_step <= 1.0:
            raise ConfigurationError("threshold_step must lie in (0, 1]")
        if self.labeled_format not in ("semeval_xml", "jsonl"):
            raise ConfigurationError("labeled_format must be semeval_xml or jsonl")
        return self

    def fingerprint(self, keys):
        """Stable hash over the named settings; input files contribute path and size."""
        payload = {}
        for key in sorted(keys):
            value = getattr(self, key)
            if key in PATH_KEYS and value is not None:
                p = Path(value)
                value = [str(p.resolve()), p.stat().st_size if p.exists() else None]
            payload[key] = value
        blob = json.dumps(payload, sort_keys=True, default=str).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]


def _coerce(name, raw, typ):
    raw = raw.strip()
    if typ is bool:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigurationError(f"{name}: expected a boolean, got {raw!r}")
    if raw.lower() in ("", "none", "null"):
        return None
    try:
        return typ(raw)
    except ValueError as exc:
        raise ConfigurationError(f"{name}: cannot parse {raw!r} as {typ.__name__}") from exc


_TYPES = {"dim": int, "window": int, "negative": int, "epochs": int, "min_count": int,
          "kernel_nonzero_limit": int, "k": int, "max_iters": int, "n_init": int, "seed": int,
          "learning_rate": float, "min_learning_rate": float, "kernel_exponent": float,
          "kernel_threshold": float, "tolerance": float, "alpha": float, "threshold": float,
          "threshold_step": float, "tune_on_test": bool}


def parse_config_text(text, base_dir=None) -> PipelineConfig:
    known = {f.name for f in fields(PipelineConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"config line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ConfigurationError(f"config line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw, _TYPES.get(key, str))
    if base_dir is not None:
        for key in PATH_KEYS + ("artifacts",):
            if values.get(key) and not Path(values[key]).is_absolute():
                values[key] = str(Path(base_dir) / values[key])
    return PipelineConfig(**values)


def load_config(path=None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    path = Path(path)
    return parse_config_text(path.read_text(encoding="utf-8"), base_dir=path.parent)

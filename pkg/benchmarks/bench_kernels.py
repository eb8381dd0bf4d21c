"""Time every hot kernel under the numba and numpy backends.

    python benchmarks/bench_kernels.py [--repeat 3] [--scale 1.0]

numba kernels are called once before timing so compilation is excluded.
"""
import argparse
import time

import numpy as np
import scipy.sparse as sp

from softaspect import _accel, kernels
from softaspect.embedding import CbowConfig, EmbeddingStore, Vocabulary, train_cbow
from softaspect.similarity import build_term_similarity
from softaspect.synthetic import make_two_topic_corpus


def cases(scale, rng):
    n_pts, dim = int(20_000 * scale), 100
    points = rng.normal(size=(n_pts, dim))
    centroids = rng.normal(size=(17, dim))
    labels = rng.integers(0, 17, size=n_pts)

    n_vocab = int(3_000 * scale)
    store = EmbeddingStore(Vocabulary(tuple(f"w{i}" for i in range(n_vocab))),
                           rng.normal(size=(n_vocab, 50)))
    S = build_term_similarity(store, nonzero_limit=50)
    bags = sp.random(int(5_000 * scale), n_vocab, density=8 / n_vocab, random_state=rng,
                     format="csr")
    bags.data = np.ceil(bags.data * 2)
    seeds = rng.integers(0, n_vocab, size=20)

    m = 100
    cand_val = -np.sort(-rng.uniform(0, 1, size=(n_vocab, m)), axis=1)
    cand_idx = np.argsort(rng.uniform(size=(n_vocab, n_vocab)), axis=1)[:, :m]

    sentences, _, _ = make_two_topic_corpus(n_sentences=int(2_000 * scale), seed=0, topic_size=200)
    cbow_cfg = CbowConfig(dim=50, epochs=1, min_count=1)

    return {
        "assign_nearest": lambda: kernels.assign_nearest(points, centroids),
        "centroid_sums": lambda: kernels.centroid_sums(points, labels, 17),
        "seed_soft_cosines": lambda: kernels.seed_soft_cosines(bags.indptr, bags.indices,
                                                               bags.data, S.matrix, seeds),
        "select_neighbors": lambda: kernels.select_neighbors(cand_idx, cand_val, 0.0, 50),
        "cbow (1 epoch)": lambda: train_cbow(sentences, cbow_cfg),
    }


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--scale", type=float, default=1.0, help="problem size multiplier")
    args = parser.parse_args()
    backends = [b for b in _accel.BACKENDS if b != "numba" or _accel.HAS_NUMBA]
    results = {}
    for name, fn in cases(args.scale, np.random.default_rng(0)).items():
        for backend in backends:
            previous = _accel.set_backend(backend)
            try:
                fn()
                results[name, backend] = timeit(fn, args.repeat)
            finally:
                _accel.set_backend(previous)

    print(f"{'kernel':22s}" + "".join(f"{b:>12s}" for b in backends) + f"{'speedup':>10s}")
    for name in dict.fromkeys(k for k, _ in results):
        row = [results[name, b] for b in backends]
        speedup = row[-1] / row[0] if len(row) == 2 else 1.0
        print(f"{name:22s}" + "".join(f"{t * 1e3:10.1f}ms" for t in row) + f"{speedup:9.1f}x")


if __name__ == "__main__":
    main()

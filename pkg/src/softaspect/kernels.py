"""Hot numeric kernels.

Each kernel exists twice: an ``_nb`` loop version compiled with numba and an
``_np`` vectorised numpy version.  The public dispatchers at the bottom pick
one according to :func:`softaspect._accel.get_backend`.  Both versions consume
identical inputs (including pre-drawn random numbers), so they agree up to
floating point summation order.
"""
import math

import numpy as np
import scipy.sparse as sp

from ._accel import njit, use_numba


# ---------------------------------------------------------------------------
# CBOW with negative sampling
# ---------------------------------------------------------------------------

@njit
def _cbow_epoch_nb(syn0, syn1neg, tokens, offsets, reduced, negs, window,
                   lr_start, lr_end, words_done, words_total):
    dim = syn0.shape[1]
    n_neg = negs.shape[1]
    h = np.empty(dim)
    neu1e = np.empty(dim)
    loss = 0.0
    for s in range(offsets.shape[0] - 1):
        start = offsets[s]
        end = offsets[s + 1]
        for pos in range(start, end):
            progress = (words_done + pos) / words_total
            lr = lr_start - (lr_start - lr_end) * progress
            if lr < lr_end:
                lr = lr_end
            w = window - reduced[pos]
            lo = max(start, pos - w)
            hi = min(end, pos + w + 1)
            count = 0
            for d in range(dim):
                h[d] = 0.0
                neu1e[d] = 0.0
            for c in range(lo, hi):
                if c == pos:
                    continue
                count += 1
                for d in range(dim):
                    h[d] += syn0[tokens[c], d]
            if count == 0:
                continue
            inv = 1.0 / count
            for d in range(dim):
                h[d] *= inv
            center = tokens[pos]
            for t in range(n_neg + 1):
                if t == 0:
                    target = center
                    label = 1.0
                else:
                    target = negs[pos, t - 1]
                    if target == center:
                        continue
                    label = 0.0
                f = 0.0
                for d in range(dim):
                    f += h[d] * syn1neg[target, d]
                if f >= 0:
                    sig = 1.0 / (1.0 + math.exp(-f))
                else:
                    e = math.exp(f)
                    sig = e / (1.0 + e)
                if label == 1.0:
                    loss -= math.log(max(sig, 1e-300))
                else:
                    loss -= math.log(max(1.0 - sig, 1e-300))
                g = (label - sig) * lr
                for d in range(dim):
                    neu1e[d] += g * syn1neg[target, d]
                    syn1neg[target, d] += g * h[d]
            for c in range(lo, hi):
                if c == pos:
                    continue
                for d in range(dim):
                    syn0[tokens[c], d] += neu1e[d] * inv
    return loss


def _stable_sigmoid(x):
    z = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + z), z / (1.0 + z))


def _sigmoid(f):
    if f >= 0:
        return 1.0 / (1.0 + math.exp(-f))
    e = math.exp(f)
    return e / (1.0 + e)


def _cbow_epoch_np(syn0, syn1neg, tokens, offsets, reduced, negs, window,
                   lr_start, lr_end, words_done, words_total):
    loss = 0.0
    tok = tokens.tolist()
    red = reduced.tolist()
    neg_rows = negs.tolist()
    for s in range(len(offsets) - 1):
        start, end = int(offsets[s]), int(offsets[s + 1])
        for pos in range(start, end):
            lr = max(lr_end, lr_start - (lr_start - lr_end) * (words_done + pos) / words_total)
            w = window - red[pos]
            ctx_words = tok[max(start, pos - w):pos] + tok[pos + 1:min(end, pos + w + 1)]
            if not ctx_words:
                continue
            h = syn0[ctx_words].mean(axis=0)
            center = tok[pos]
            neu1e = np.zeros_like(h)
            # sequential so a repeated negative sees its own earlier update
            for t, target in enumerate([center] + neg_rows[pos]):
                if t and target == center:
                    continue
                label = 1.0 if t == 0 else 0.0
                row = syn1neg[target]
                sig = _sigmoid(float(h @ row))
                loss -= math.log(max(sig if t == 0 else 1.0 - sig, 1e-300))
                g = (label - sig) * lr
                neu1e += g * row
                row += g * h
            np.add.at(syn0, ctx_words, neu1e / len(ctx_words))
    return loss


# ---------------------------------------------------------------------------
# k-means (Lloyd) steps
# ---------------------------------------------------------------------------

@njit
def _assign_nb(points, centroids):
    n, dim = points.shape
    k = centroids.shape[0]
    labels = np.empty(n, dtype=np.int64)
    dist2 = np.empty(n)
    for i in range(n):
        best = np.inf
        best_j = 0
        for j in range(k):
            acc = 0.0
            for d in range(dim):
                diff = points[i, d] - centroids[j, d]
                acc += diff * diff
            if acc < best:
                best = acc
                best_j = j
        labels[i] = best_j
        dist2[i] = best
    return labels, dist2


def _assign_np(points, centroids, chunk=4096):
    n = points.shape[0]
    labels = np.empty(n, dtype=np.int64)
    dist2 = np.empty(n)
    for lo in range(0, n, chunk):
        block = points[lo:lo + chunk]
        diff = block[:, None, :] - centroids[None, :, :]
        d2 = np.einsum("nkd,nkd->nk", diff, diff)
        # argmin returns the first minimum: lowest index on ties
        labels[lo:lo + chunk] = np.argmin(d2, axis=1)
        dist2[lo:lo + chunk] = d2[np.arange(block.shape[0]), labels[lo:lo + chunk]]
    return labels, dist2


@njit
def _centroid_sums_nb(points, labels, k):
    dim = points.shape[1]
    sums = np.zeros((k, dim))
    counts = np.zeros(k, dtype=np.int64)
    for i in range(points.shape[0]):
        j = labels[i]
        counts[j] += 1
        for d in range(dim):
            sums[j, d] += points[i, d]
    return sums, counts


def _centroid_sums_np(points, labels, k):
    sums = np.zeros((k, points.shape[1]))
    np.add.at(sums, labels, points)
    counts = np.bincount(labels, minlength=k).astype(np.int64)
    return sums, counts


# ---------------------------------------------------------------------------
# Soft cosine between sentence bags and single-word seed bags
# ---------------------------------------------------------------------------

@njit
def _seed_soft_cosines_nb(bag_indptr, bag_indices, bag_values,
                          s_indptr, s_indices, s_data, seeds, vocab_size):
    n = bag_indptr.shape[0] - 1
    m = seeds.shape[0]
    out = np.zeros((n, m))
    dense = np.zeros(vocab_size)
    # diagonal value of every seed row
    seed_self = np.zeros(m)
    for q in range(m):
        s = seeds[q]
        if s < 0:
            continue
        for p in range(s_indptr[s], s_indptr[s + 1]):
            if s_indices[p] == s:
                seed_self[q] += s_data[p]
    for i in range(n):
        lo = bag_indptr[i]
        hi = bag_indptr[i + 1]
        if hi == lo:
            continue
        for p in range(lo, hi):
            dense[bag_indices[p]] += bag_values[p]
        quad = 0.0
        for p in range(lo, hi):
            a = bag_indices[p]
            row = 0.0
            for r in range(s_indptr[a], s_indptr[a + 1]):
                row += s_data[r] * dense[s_indices[r]]
            quad += bag_values[p] * row
        if quad > 0.0:
            norm = math.sqrt(quad)
            for q in range(m):
                s = seeds[q]
                if s < 0 or seed_self[q] <= 0.0:
                    continue
                num = 0.0
                for r in range(s_indptr[s], s_indptr[s + 1]):
                    num += s_data[r] * dense[s_indices[r]]
                val = num / (norm * math.sqrt(seed_self[q]))
                if val > 1.0:
                    val = 1.0
                elif val < -1.0:
                    val = -1.0
                out[i, q] = val
        for p in range(lo, hi):
            dense[bag_indices[p]] = 0.0
    return out


def _seed_soft_cosines_np(bag_indptr, bag_indices, bag_values,
                          s_indptr, s_indices, s_data, seeds, vocab_size):
    n = len(bag_indptr) - 1
    m = len(seeds)
    out = np.zeros((n, m))
    if n == 0 or m == 0:
        return out
    S = sp.csr_matrix((s_data, s_indices, s_indptr), shape=(vocab_size, vocab_size))
    X = sp.csr_matrix((bag_values, bag_indices, bag_indptr), shape=(n, vocab_size))
    XS = X @ S
    quad = np.asarray(XS.multiply(X).sum(axis=1)).ravel()
    present = seeds >= 0
    if not present.any():
        return out
    cols = seeds[present]
    num = XS[:, cols].toarray()
    seed_self = S.diagonal()[cols]
    ok_rows = quad > 0
    denom = np.sqrt(np.where(ok_rows, quad, 1.0))[:, None] * np.sqrt(np.where(seed_self > 0, seed_self, 1.0))[None, :]
    vals = np.clip(num / denom, -1.0, 1.0)
    vals[~ok_rows] = 0.0
    vals[:, seed_self <= 0] = 0.0
    out[:, present] = vals
    return out


# ---------------------------------------------------------------------------
# Symmetric capped neighbour selection for the term similarity matrix
# ---------------------------------------------------------------------------

@njit
def _select_neighbors_nb(cand_idx, cand_val, threshold, limit):
    """Greedy symmetric selection, rows in index order.

    Row ``i`` takes its candidates best-first while it and the candidate both
    have fewer than ``limit`` off-diagonal entries.  Pairs already linked from
    an earlier row are not counted twice.
    """
    n, m = cand_idx.shape
    chosen = np.full((n, limit), -1, dtype=np.int64)
    count = np.zeros(n, dtype=np.int64)
    out_i = np.empty(n * limit, dtype=np.int64)
    out_j = np.empty(n * limit, dtype=np.int64)
    out_v = np.empty(n * limit)
    n_out = 0
    for i in range(n):
        for q in range(m):
            j = cand_idx[i, q]
            v = cand_val[i, q]
            if j < 0 or not v > threshold:
                break
            if count[i] >= limit:
                break
            linked = False
            for r in range(count[i]):
                if chosen[i, r] == j:
                    linked = True
                    break
            if linked or count[j] >= limit:
                continue
            chosen[i, count[i]] = j
            count[i] += 1
            chosen[j, count[j]] = i
            count[j] += 1
            out_i[n_out] = min(i, j)
            out_j[n_out] = max(i, j)
            out_v[n_out] = v
            n_out += 1
    return out_i[:n_out], out_j[:n_out], out_v[:n_out]


def _select_neighbors_py(cand_idx, cand_val, threshold, limit):
    n, m = cand_idx.shape
    chosen = [set() for _ in range(n)]
    out_i, out_j, out_v = [], [], []
    for i in range(n):
        for j, v in zip(cand_idx[i].tolist(), cand_val[i].tolist()):
            if j < 0 or not v > threshold or len(chosen[i]) >= limit:
                break
            if j in chosen[i] or len(chosen[j]) >= limit:
                continue
            chosen[i].add(j)
            chosen[j].add(i)
            out_i.append(min(i, j))
            out_j.append(max(i, j))
            out_v.append(v)
    return (np.asarray(out_i, dtype=np.int64), np.asarray(out_j, dtype=np.int64),
            np.asarray(out_v, dtype=np.float64))


# ---------------------------------------------------------------------------
# Dispatchers
# ---------------------------------------------------------------------------

def cbow_epoch(syn0, syn1neg, tokens, offsets, reduced, negs, window,
               lr_start, lr_end, words_done, words_total):
    """Run one CBOW negative-sampling epoch in place; returns the summed loss."""
    fn = _cbow_epoch_nb if use_numba() else _cbow_epoch_np
    return fn(syn0, syn1neg, tokens, offsets, reduced, negs, int(window),
              float(lr_start), float(lr_end), float(words_done), float(words_total))


def assign_nearest(points, centroids):
    """Nearest centroid per point (lowest index on ties) and its squared distance."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    centroids = np.ascontiguousarray(centroids, dtype=np.float64)
    if use_numba():
        return _assign_nb(points, centroids)
    return _assign_np(points, centroids)


def centroid_sums(points, labels, k):
    points = np.ascontiguousarray(points, dtype=np.float64)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    if use_numba():
        return _centroid_sums_nb(points, labels, int(k))
    return _centroid_sums_np(points, labels, int(k))


def seed_soft_cosines(bag_indptr, bag_indices, bag_values, S, seeds):
    """Soft cosine of every bag against every single-word seed bag.

    ``S`` is a full symmetric CSR matrix (diagonal stored).  ``seeds`` holds
    vocabulary indices, ``-1`` for out-of-vocabulary seeds (column of zeros).
    """
    S = S.tocsr()
    args = (
        np.ascontiguousarray(bag_indptr, dtype=np.int64),
        np.ascontiguousarray(bag_indices, dtype=np.int64),
        np.ascontiguousarray(bag_values, dtype=np.float64),
        np.ascontiguousarray(S.indptr, dtype=np.int64),
        np.ascontiguousarray(S.indices, dtype=np.int64),
        np.ascontiguousarray(S.data, dtype=np.float64),
        np.ascontiguousarray(seeds, dtype=np.int64),
        int(S.shape[0]),
    )
    if use_numba():
        return _seed_soft_cosines_nb(*args)
    return _seed_soft_cosines_np(*args)


def select_neighbors(cand_idx, cand_val, threshold, limit):
    """Upper-triangle ``(i, j, value)`` triples of the symmetric capped kernel.

    ``cand_idx``/``cand_val`` hold each row's candidates sorted best-first,
    padded with index ``-1``.
    """
    args = (np.ascontiguousarray(cand_idx, dtype=np.int64),
            np.ascontiguousarray(cand_val, dtype=np.float64), float(threshold), int(limit))
    if use_numba():
        return _select_neighbors_nb(*args)
    return _select_neighbors_py(*args)

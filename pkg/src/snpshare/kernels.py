"""Hot loops, each in a numba and a numpy flavour.

``theta_rows`` reduces one block of rows of the 2m x 2m log-linear
association matrix into per-row statistics without storing the block's
logs. ``min_hamming`` finds, for every query row, the smallest Hamming
distance to a set of reference rows.

The public names dispatch on :data:`snpshare._accel.USE_NUMBA`; the
``*_numba`` / ``*_numpy`` variants are importable for tests and benchmarks.
"""
import numpy as np

from ._accel import USE_NUMBA, njit


@njit(cache=True)
def theta_rows_numba(n11, colsum, n, start, logt, diag, row_sum, pos_off, row_sq):
    b, P = n11.shape
    for r in range(b):
        u = start + r
        su = colsum[u]
        d = logt[n - su] - logt[su]
        s = d
        pos = 0.0
        sq = d * d
        for v in range(P):
            if v == u:
                continue
            c11 = n11[r, v]
            sv = colsum[v]
            t = (logt[sv - c11] + logt[su - c11]
                 - logt[c11] - logt[n - su - sv + c11])
            s += t
            sq += t * t
            if t > 0.0:
                pos += t
        diag[r] = d
        row_sum[r] = s
        pos_off[r] = pos
        row_sq[r] = sq


def theta_rows_numpy(n11, colsum, n, start, logt, diag, row_sum, pos_off, row_sq):
    b, P = n11.shape
    su = colsum[start:start + b][:, None]
    sv = colsum[None, :]
    t = logt[sv - n11] + logt[su - n11] - logt[n11] - logt[n - su - sv + n11]
    rows = np.arange(b)
    d = logt[n - su[:, 0]] - logt[su[:, 0]]
    t[rows, start + rows] = 0.0
    pos_off[:] = np.where(t > 0.0, t, 0.0).sum(axis=1)
    row_sum[:] = t.sum(axis=1) + d
    row_sq[:] = (t * t).sum(axis=1) + d * d
    diag[:] = d


@njit(cache=True)
def _popcount64(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)


@njit(cache=True)
def _min_hamming_packed(q_lo, q_hi, r_lo, r_hi, m, skip_same_index):
    k, w = q_lo.shape
    r = r_lo.shape[0]
    out = np.empty(k, dtype=np.int64)
    for i in range(k):
        best = m + 1
        for j in range(r):
            if skip_same_index and i == j:
                continue
            dist = 0
            for c in range(w):
                dist += _popcount64((q_lo[i, c] ^ r_lo[j, c]) | (q_hi[i, c] ^ r_hi[j, c]))
            if dist < best:
                best = dist
                if best == 0:
                    break
        out[i] = best
    return out


def _pack_planes(x):
    """Two bit planes (one bit per SNP) packed into uint64 words, zero padded."""
    x = x.astype(np.uint8)
    planes = []
    for bit in (0, 1):
        plane = np.packbits((x >> bit) & 1, axis=1, bitorder="little")
        plane = np.pad(plane, ((0, 0), (0, (-plane.shape[1]) % 8)))
        planes.append(np.ascontiguousarray(plane).view(np.uint64))
    return planes


def min_hamming_numba(queries, refs, skip_same_index):
    # genotypes take values 0..3 at most, so two bit planes identify them exactly
    if queries.size and max(queries.max(), refs.max() if refs.size else 0) > 3:
        raise ValueError("packed Hamming kernel expects values in 0..3")
    q_lo, q_hi = _pack_planes(queries)
    r_lo, r_hi = _pack_planes(refs)
    return _min_hamming_packed(q_lo, q_hi, r_lo, r_hi, queries.shape[1], skip_same_index)


def min_hamming_numpy(queries, refs, skip_same_index):
    # mismatches = m - matches; matches accumulate per symbol via one-hot products
    m = queries.shape[1]
    symbols = np.union1d(np.unique(queries), np.unique(refs))
    matches = np.zeros((queries.shape[0], refs.shape[0]), dtype=np.float64)
    for s in symbols:
        matches += (queries == s).astype(np.float64) @ (refs == s).astype(np.float64).T
    dist = m - np.rint(matches).astype(np.int64)
    if skip_same_index:
        idx = np.arange(min(dist.shape))
        dist[idx, idx] = m + 1
    return dist.min(axis=1)


def theta_rows(*args):
    if USE_NUMBA:
        return theta_rows_numba(*args)
    return theta_rows_numpy(*args)


def min_hamming(queries, refs, skip_same_index=False):
    """Minimum Hamming distance from each query row to the reference rows.

    With ``skip_same_index`` the pair (i, i) is ignored, which gives
    leave-one-out distances when ``queries`` and ``refs`` are the same set.
    Returns ``m + 1`` for a query with no eligible reference.
    """
    queries = np.ascontiguousarray(queries, dtype=np.int8)
    refs = np.ascontiguousarray(refs, dtype=np.int8)
    if USE_NUMBA:
        return min_hamming_numba(queries, refs, bool(skip_same_index))
    return min_hamming_numpy(queries, refs, bool(skip_same_index))

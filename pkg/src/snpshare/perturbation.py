"""XOR stage: sample per-bit Bernoulli noise and flip the encoded dataset."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import seeding
from .data import SnpMatrix, decode_values, encode
from .errors import DimensionError


def _fill_columns(out, flip_prob, seed, cols):
    n = out.shape[0]
    for u in cols:
        rng = seeding.stream(seed, seeding.NOISE, u)
        out[:, u] = rng.random(n) < flip_prob[u]


def sample_noise(profile, n, seed, threads=1):
    """Draw an (n, 2m) noise matrix, bit u ~ Bernoulli(flip_prob[u]).

    Column u always comes from its own stream keyed on ``(seed, u)``, so the
    result does not depend on ``threads``.
    """
    flip_prob = np.asarray(getattr(profile, "flip_prob", profile), dtype=np.float64)
    P = flip_prob.shape[0]
    out = np.zeros((n, P), dtype=np.uint8, order="F")
    threads = max(1, int(threads or 1))
    if threads == 1 or P < 2:
        _fill_columns(out, flip_prob, seed, range(P))
        return out
    chunks = np.array_split(np.arange(P), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(lambda c: _fill_columns(out, flip_prob, seed, c), chunks))
    return out


def xor_bits(bits, noise):
    bits = np.asarray(bits, dtype=np.uint8)
    noise = np.asarray(noise, dtype=np.uint8)
    if bits.shape != noise.shape:
        raise DimensionError(f"bit matrix {bits.shape} and noise {noise.shape} differ")
    return np.bitwise_xor(bits, noise)


def perturb(d, profile, seed, threads=1, noise=None):
    """Encode ``d``, XOR with freshly sampled noise and decode back to genotypes."""
    if profile.n_bits != 2 * d.m:
        raise DimensionError(f"profile has {profile.n_bits} bits, dataset needs {2 * d.m}")
    if noise is None:
        noise = sample_noise(profile, d.n, seed, threads=threads)
    return SnpMatrix(decode_values(xor_bits(encode(d), noise)), d.snp_ids)

"""Count restoration: Laplace-noised genotype counts plus 1-D optimal transport.

Each SNP column of the perturbed dataset is moved toward the noisy genotype
distribution of the original. The transport problem on the ordered support
{0, 1, 2} with cost |p - q| is solved exactly by the monotone (north-west
corner) coupling, and ``floor(T[p, q] * n)`` entries holding p are rewritten
to q.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import seeding
from .data import SnpMatrix
from .errors import DimensionError, PreconditionError

COUNT_SENSITIVITY = 2.0
_COST = np.abs(np.subtract.outer(np.arange(3), np.arange(3))).astype(np.float64)
# processing order of off-diagonal cells when a source bucket runs short
MOVE_ORDER = ((0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1))
_MASS_TOL = 1e-9
# guards floor() against products such as 2.9999999999999996
_FLOOR_EPS = 1e-9


@dataclass(frozen=True)
class TransportPlan:
    t: np.ndarray
    source: np.ndarray
    target: np.ndarray

    @property
    def cost(self):
        return float((self.t * _COST).sum())

    def to_dict(self):
        return {"t": self.t.tolist(), "source": self.source.tolist(),
                "target": self.target.tolist(), "cost": self.cost}


def genotype_counts(values):
    """(m, 3) table of genotype counts for every column of an (n, m) array."""
    values = np.asarray(values)
    return np.stack([(values == k).sum(axis=0) for k in range(3)], axis=1).astype(np.int64)


def count_query(d, j):
    if not 0 <= j < d.m:
        raise IndexError(f"SNP index {j} out of range for m={d.m}")
    return np.bincount(d.values[:, j], minlength=3).astype(np.int64)


def laplace_scale(eps_c):
    if not eps_c > 0:
        raise PreconditionError(f"eps_c must be > 0, got {eps_c}")
    return COUNT_SENSITIVITY / eps_c


def laplace_noise(shape, eps_c, seed):
    """Raw Laplace(2 / eps_c) draws; all zeros when eps_c is infinite."""
    scale = laplace_scale(eps_c)
    if scale == 0.0:
        return np.zeros(shape)
    return seeding.stream(seed, seeding.LAPLACE).laplace(0.0, scale, size=shape)


def noisy_counts(d, eps_c, seed):
    """Per-SNP counts plus independent Laplace noise, negatives clamped to 0. Shape (m, 3)."""
    values = d.values if isinstance(d, SnpMatrix) else np.asarray(d)
    raw = genotype_counts(values).astype(np.float64)
    return np.maximum(raw + laplace_noise(raw.shape, eps_c, seed), 0.0)


def normalize(c):
    c = np.asarray(c, dtype=np.float64)
    total = c.sum()
    if not total > 0:
        return np.full(c.shape, 1.0 / c.shape[-1])
    return c / total


def _check_distribution(x, name):
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (3,):
        raise PreconditionError(f"{name} must have 3 entries, got shape {x.shape}")
    if (x < -_MASS_TOL).any() or abs(x.sum() - 1.0) > _MASS_TOL:
        raise PreconditionError(f"{name} is not a probability vector: {x.tolist()}")
    return np.clip(x, 0.0, None)


def ot_plan(source, target):
    """Optimal coupling for cost |p - q| on {0, 1, 2}.

    Mass is matched quantile by quantile: cell (p, q) receives the overlap of
    the CDF intervals of bucket p in ``source`` and bucket q in ``target``.
    """
    a = _check_distribution(source, "source")
    b = _check_distribution(target, "target")
    ca = np.concatenate(([0.0], np.cumsum(a)))
    cb = np.concatenate(([0.0], np.cumsum(b)))
    ca[-1] = cb[-1] = 1.0
    hi = np.minimum.outer(ca[1:], cb[1:])
    lo = np.maximum.outer(ca[:-1], cb[:-1])
    t = np.clip(hi - lo, 0.0, None)
    return TransportPlan(t, a, b)


def cdf_cost(source, target):
    """1-D Wasserstein-1 distance on {0, 1, 2}: sum of absolute CDF gaps."""
    return float(np.abs(np.cumsum(source)[:2] - np.cumsum(target)[:2]).sum())


def apply_plan(values, j, plan, seed):
    """Rewrite column ``j`` of the mutable array ``values`` according to ``plan``.

    For each off-diagonal cell (p, q), in :data:`MOVE_ORDER`, up to
    ``floor(T[p, q] * n)`` rows originally holding p are switched to q. Rows
    are drawn from a seeded shuffle of the p-holders, and no row moves twice.
    Returns the 3x3 matrix of moved counts.
    """
    col = values[:, j]
    n = col.shape[0]
    rng = seeding.stream(seed, seeding.SHUFFLE, j)
    original = col.copy()
    pools = [rng.permutation(np.flatnonzero(original == p)) for p in range(3)]
    used = [0, 0, 0]
    moved = np.zeros((3, 3), dtype=np.int64)
    for p, q in MOVE_ORDER:
        want = int(math.floor(plan.t[p, q] * n + _FLOOR_EPS))
        k = min(want, pools[p].shape[0] - used[p])
        if k <= 0:
            continue
        col[pools[p][used[p]:used[p] + k]] = q
        used[p] += k
        moved[p, q] = k
    return moved


def restore(d_tilde, d_original, eps_c, seed, diagnostics=None):
    """Align every column of ``d_tilde`` with the noisy counts of ``d_original``.

    If ``diagnostics`` is a list, one dict per SNP is appended with the raw,
    noisy, perturbed and achieved counts and the transport plan.
    """
    if d_tilde.shape != d_original.shape:
        raise DimensionError(f"perturbed {d_tilde.shape} and original {d_original.shape} differ")
    target_counts = noisy_counts(d_original, eps_c, seed)
    values = d_tilde.copy_values()
    before = genotype_counts(values)
    for j in range(values.shape[1]):
        plan = ot_plan(normalize(before[j]), normalize(target_counts[j]))
        apply_plan(values, j, plan, seed)
        if diagnostics is not None:
            diagnostics.append({
                "snp": d_original.snp_ids[j],
                "raw_counts": np.bincount(d_original.values[:, j], minlength=3).tolist(),
                "noisy_counts": target_counts[j].tolist(),
                "perturbed_counts": before[j].tolist(),
                "plan": plan.t.tolist(),
                "achieved_counts": np.bincount(values[:, j], minlength=3).tolist(),
            })
    return SnpMatrix(values, d_tilde.snp_ids)

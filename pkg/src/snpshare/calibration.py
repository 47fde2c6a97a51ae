"""Per-bit flip probabilities for the XOR stage.

The association matrix is built from a public reference dataset with a
log-linear model: the diagonal holds each bit's log odds of being 0, the
off-diagonal the log odds ratio between two bits. It is rescaled so its
eigenvalue norm times the query sensitivity equals the stage budget, and each
bit's flip probability follows from its row of the rescaled matrix.

The 2m x 2m matrix is never materialised. Rows are reduced block by block
into the four per-row quantities the flip probabilities need.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from . import kernels
from .data import SnpMatrix, encode
from .errors import DegenerateCalibrationError, InsufficientDataError, PreconditionError

THEOREM_LITERAL = "theorem-literal"
PROOF_POSITIVE_PART = "proof-positive-part"
KAPPA_VARIANTS = (THEOREM_LITERAL, PROOF_POSITIVE_PART)

DEFAULT_ALPHA = 0.5
# target number of float64 cells per block of the joint-count matrix
_BLOCK_CELLS = 1 << 22


@dataclass(frozen=True)
class ThetaRowStats:
    """Row statistics of the unscaled association matrix.

    ``row_sum`` includes the diagonal; ``pos_offdiag_sum`` sums only the
    positive off-diagonal entries; ``row_sq`` is each row's squared l2 mass.
    """

    diag: np.ndarray
    row_sum: np.ndarray
    pos_offdiag_sum: np.ndarray
    row_sq: np.ndarray

    @property
    def size(self):
        return self.diag.shape[0]

    @property
    def frobenius_sq(self):
        return float(math.fsum(self.row_sq))

    @property
    def frobenius(self):
        return math.sqrt(self.frobenius_sq)

    def scaled(self, c):
        return ThetaRowStats(self.diag * c, self.row_sum * c,
                             self.pos_offdiag_sum * c, self.row_sq * (c * c))

    @classmethod
    def from_dense(cls, theta):
        """Row statistics of an explicit symmetric matrix (small inputs, tests)."""
        theta = np.asarray(theta, dtype=np.float64)
        off = theta - np.diag(np.diag(theta))
        return cls(np.diag(theta).copy(), theta.sum(axis=1),
                   np.where(off > 0, off, 0.0).sum(axis=1), (theta * theta).sum(axis=1))


@dataclass(frozen=True)
class NoiseProfile:
    flip_prob: np.ndarray
    kappa: np.ndarray
    lambda_norm: float
    s_f: int
    eps_x: float
    kappa_variant: str = PROOF_POSITIVE_PART
    theta_tilde_frobenius: float = float("nan")
    scale: float = float("nan")
    alpha: float = DEFAULT_ALPHA
    extra: dict = field(default_factory=dict)

    @property
    def n_bits(self):
        return self.flip_prob.shape[0]

    @property
    def half_branch(self):
        """Mask of bits where kappa exceeds the eigenvalue norm (flip prob 1/2)."""
        return self.kappa > self.lambda_norm

    def to_dict(self):
        return {
            "eps_x": self.eps_x,
            "s_f": self.s_f,
            "lambda_norm": self.lambda_norm,
            "sufficient_condition": self.s_f * self.lambda_norm,
            "kappa_variant": self.kappa_variant,
            "alpha": self.alpha,
            "theta_tilde_frobenius": self.theta_tilde_frobenius,
            "scale": self.scale,
            "half_branch_bits": np.flatnonzero(self.half_branch).tolist(),
            "flip_prob": self.flip_prob.tolist(),
            "kappa": self.kappa.tolist(),
            **self.extra,
        }


def sensitivity(m):
    """Bits that can change when one individual is replaced: all 2m of theirs."""
    if m < 1:
        raise PreconditionError(f"m must be >= 1, got {m}")
    return 2 * m


def theta_tilde_stats(ref, alpha=DEFAULT_ALPHA, block_rows=None):
    """Stream the log-linear association matrix of a binarised reference set.

    ``ref`` is either a :class:`SnpMatrix` (encoded here) or an (n, 2m) bit
    array. Every cell count entering a log gets ``alpha`` added first.
    """
    bits = encode(ref) if isinstance(ref, SnpMatrix) else np.asarray(ref, dtype=np.uint8)
    n, P = bits.shape
    if n < 2:
        raise InsufficientDataError(f"reference dataset needs at least 2 rows, got {n}")
    if alpha <= 0:
        raise PreconditionError(f"smoothing alpha must be > 0, got {alpha}")
    colsum = bits.sum(axis=0, dtype=np.int64)
    logt = np.log(np.arange(n + 1, dtype=np.float64) + alpha)
    fbits = bits.astype(np.float64)

    if block_rows is None:
        block_rows = max(1, min(P, _BLOCK_CELLS // max(P, 1)))
    diag = np.empty(P)
    row_sum = np.empty(P)
    pos_off = np.empty(P)
    row_sq = np.empty(P)
    for start in range(0, P, block_rows):
        stop = min(P, start + block_rows)
        n11 = np.rint(fbits[:, start:stop].T @ fbits).astype(np.int64)
        kernels.theta_rows(n11, colsum, n, start, logt, diag[start:stop],
                           row_sum[start:stop], pos_off[start:stop], row_sq[start:stop])
    return ThetaRowStats(diag, row_sum, pos_off, row_sq)


def kappa_from_stats(stats, variant=PROOF_POSITIVE_PART):
    if variant == THEOREM_LITERAL:
        return 2.0 * stats.row_sum - stats.diag
    if variant == PROOF_POSITIVE_PART:
        return stats.diag + 2.0 * stats.pos_offdiag_sum
    raise PreconditionError(f"unknown kappa variant {variant!r}; choose from {KAPPA_VARIANTS}")


def flip_probabilities(kappa, lambda_norm):
    """1/2 where kappa > lambda_norm, else the logistic 1 / (1 + exp(kappa))."""
    kappa = np.asarray(kappa, dtype=np.float64)
    return np.where(kappa > lambda_norm, 0.5, expit(-kappa))


def calibrate(stats, eps_x, m, variant=PROOF_POSITIVE_PART, alpha=DEFAULT_ALPHA):
    """Scale the association matrix to budget ``eps_x`` and derive flip probabilities."""
    if not eps_x > 0:
        raise PreconditionError(f"eps_x must be > 0, got {eps_x}")
    s_f = sensitivity(m)
    if stats.size != s_f:
        raise PreconditionError(f"stats cover {stats.size} bits, expected 2m = {s_f}")
    frob = stats.frobenius
    if not frob > 0 or not math.isfinite(frob):
        raise DegenerateCalibrationError(
            "association matrix has zero (or non-finite) Frobenius norm; "
            "every flip probability would be exactly 1/2")
    c = eps_x / (s_f * frob)
    scaled = stats.scaled(c)
    # symmetric matrix: eigenvalue l2 norm equals the Frobenius norm (= eps_x / s_f)
    lambda_norm = scaled.frobenius
    kappa = kappa_from_stats(scaled, variant)
    return NoiseProfile(
        flip_prob=flip_probabilities(kappa, lambda_norm),
        kappa=kappa,
        lambda_norm=lambda_norm,
        s_f=s_f,
        eps_x=float(eps_x),
        kappa_variant=variant,
        theta_tilde_frobenius=frob,
        scale=c,
        alpha=alpha,
    )


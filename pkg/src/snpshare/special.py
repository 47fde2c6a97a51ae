"""Survival functions for the association tests.

Thin wrappers over scipy.special with domain checks. Log-space variants are
provided because strongly associated SNPs have p-values below the float
range and still need ranking.
"""
import math

import numpy as np
from scipy import special as sc

from .errors import PreconditionError

LOG2 = math.log(2.0)


def chi2_sf(x, df):
    """P(X > x) for X ~ chi-square(df): regularized upper gamma Q(df/2, x/2)."""
    x = np.asarray(x, dtype=np.float64)
    df = np.asarray(df, dtype=np.float64)
    if (x < 0).any() or (df <= 0).any():
        raise PreconditionError("chi2_sf needs x >= 0 and df > 0")
    out = sc.gammaincc(df / 2.0, x / 2.0)
    return float(out) if out.ndim == 0 else out


def chi2_logsf(x, df):
    """log of :func:`chi2_sf`, exact in closed form for df = 1 and df = 2."""
    x = np.asarray(x, dtype=np.float64)
    df = np.broadcast_to(np.asarray(df, dtype=np.float64), x.shape)
    if (x < 0).any() or (df <= 0).any():
        raise PreconditionError("chi2_logsf needs x >= 0 and df > 0")
    out = np.empty(x.shape)
    one, two = df == 1, df == 2
    other = ~(one | two)
    # df=1: sf = 2 * Phi(-sqrt(x)); df=2: sf = exp(-x/2)
    out[one] = LOG2 + sc.log_ndtr(-np.sqrt(x[one]))
    out[two] = -x[two] / 2.0
    if other.any():
        with np.errstate(divide="ignore"):
            out[other] = np.log(sc.gammaincc(df[other] / 2.0, x[other] / 2.0))
    return float(out) if out.ndim == 0 else out


def normal_sf(z):
    """Upper tail of the standard normal, via erfc."""
    z = np.asarray(z, dtype=np.float64)
    out = 0.5 * sc.erfc(z / math.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


def normal_two_sided_logp(z):
    """log P(|Z| > |z|)."""
    z = np.abs(np.asarray(z, dtype=np.float64))
    out = LOG2 + sc.log_ndtr(-z)
    return float(out) if out.ndim == 0 else out

"""Genotype matrices, the 2-bit encoding, CSV I/O and the synthetic generator.

Genotypes count minor alleles and live in {0, 1, 2}. The binary view used by
the XOR stage stores each SNP as two bits: 0 -> 00, 1 -> 01, 2 -> 11. Binary
matrices are plain ``uint8`` numpy arrays of shape (n, 2m).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import seeding
from .errors import DimensionError, FormatError, ParseError, PreconditionError

GENOTYPES = (0, 1, 2)

# genotype -> (first bit, second bit)
_ENCODE_TABLE = np.array([[0, 0], [0, 1], [1, 1]], dtype=np.uint8)


@dataclass(frozen=True, eq=False)
class SnpMatrix:
    """An n x m genotype matrix with one identifier per SNP column.

    ``values`` is stored as a read-only ``int8`` array; use :meth:`copy_values`
    to get a mutable copy.
    """

    values: np.ndarray
    snp_ids: tuple

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.int8, copy=True)
        if vals.ndim != 2:
            raise DimensionError(f"genotype matrix must be 2-D, got shape {vals.shape}")
        n, m = vals.shape
        if n < 1 or m < 1:
            raise DimensionError(f"genotype matrix must be at least 1x1, got {n}x{m}")
        if vals.min() < 0 or vals.max() > 2:
            bad = np.argwhere((vals < 0) | (vals > 2))[0]
            raise ParseError(
                f"genotype {vals[tuple(bad)]} at row {bad[0]}, column {bad[1]} not in {{0,1,2}}",
                row=int(bad[0]), col=int(bad[1]),
            )
        ids = tuple(str(s) for s in self.snp_ids)
        if len(ids) != m:
            raise DimensionError(f"{len(ids)} SNP ids for {m} columns")
        if len(set(ids)) != m:
            raise FormatError("SNP ids must be unique")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "snp_ids", ids)

    @classmethod
    def from_array(cls, values, snp_ids=None):
        values = np.asarray(values)
        if snp_ids is None:
            snp_ids = default_ids(values.shape[1] if values.ndim == 2 else 0)
        return cls(values, snp_ids)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def m(self):
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    def copy_values(self):
        return np.array(self.values, copy=True)

    def with_values(self, values):
        return SnpMatrix(values, self.snp_ids)

    def __eq__(self, other):
        if not isinstance(other, SnpMatrix):
            return NotImplemented
        return self.snp_ids == other.snp_ids and np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"SnpMatrix(n={self.n}, m={self.m})"


def default_ids(m):
    return tuple(f"snp{j}" for j in range(m))


def encode(d):
    """Encode genotypes into an (n, 2m) bit matrix."""
    vals = d.values if isinstance(d, SnpMatrix) else np.asarray(d)
    n, m = vals.shape
    return _ENCODE_TABLE[vals].reshape(n, 2 * m)


def decode_values(bits):
    """Decode an (n, 2m) bit matrix to an int8 genotype array.

    Each pair decodes to its popcount, so the pattern 10 (never produced by
    :func:`encode`, but reachable after XOR noise) maps to 1.
    """
    bits = np.asarray(bits)
    if bits.ndim != 2 or bits.shape[1] % 2:
        raise DimensionError(f"bit matrix needs an even column count, got shape {bits.shape}")
    return (bits[:, 0::2].astype(np.int8) + bits[:, 1::2].astype(np.int8))


def decode(bits, snp_ids=None):
    vals = decode_values(bits)
    return SnpMatrix.from_array(vals, snp_ids)


def read_dataset(path):
    """Read a genotype CSV: header of SNP ids, one row per individual."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r]
    if not body:
        raise FormatError(f"{path}: no data rows")
    m = len(header)
    for i, r in enumerate(body):
        if len(r) != m:
            raise FormatError(f"{path}: row {i} has {len(r)} cells, header has {m}")
    cells = np.char.strip(np.array(body, dtype=str))
    ok = np.isin(cells, ("0", "1", "2"))
    if not ok.all():
        i, j = np.argwhere(~ok)[0]
        what = "missing value" if cells[i, j] == "" else f"invalid genotype {cells[i, j]!r}"
        raise ParseError(f"{path}: {what} at row {i}, column {j} ({header[j]})", row=int(i), col=int(j))
    return SnpMatrix(cells.astype(np.int8), header)


def write_dataset(d, path):
    path = Path(path)
    lines = [",".join(d.snp_ids)]
    lines.extend(",".join(map(str, row)) for row in d.values.tolist())
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def generate_synthetic(n_case, n_control, m, n_assoc=0, maf_shift=0.0, seed=0,
                       maf_range=(0.05, 0.45)):
    """Draw case and control genotype matrices under Hardy-Weinberg sampling.

    Each SNP gets a control MAF from ``maf_range``; genotypes are
    binomial(2, MAF). The first ``n_assoc`` SNPs have the case MAF raised by
    ``maf_shift`` (capped at 0.95), planting known associations.
    """
    if n_case < 1 or n_control < 1 or m < 1:
        raise PreconditionError("n_case, n_control and m must be positive")
    if not 0 <= n_assoc <= m:
        raise PreconditionError(f"n_assoc={n_assoc} must lie in [0, m={m}]")
    if not 0.0 <= maf_shift <= 0.5:
        raise PreconditionError(f"maf_shift={maf_shift} must lie in [0, 0.5]")
    rng = seeding.stream(seed, seeding.SYNTHETIC)
    maf = rng.uniform(maf_range[0], maf_range[1], size=m)
    case_maf = maf.copy()
    case_maf[:n_assoc] = np.minimum(case_maf[:n_assoc] + maf_shift, 0.95)
    case = rng.binomial(2, case_maf, size=(n_case, m))
    control = rng.binomial(2, maf, size=(n_control, m))
    ids = default_ids(m)
    return SnpMatrix(case, ids), SnpMatrix(control, ids)

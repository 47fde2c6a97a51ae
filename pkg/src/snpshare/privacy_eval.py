"""Hamming-distance membership test and data-utility metrics.

The attacker measures a victim's minimum Hamming distance (MHD) to a
reference panel and calls membership when it falls below a threshold chosen
for a 5% false-positive rate on known non-members.

Modes (which panel the victim is compared with, and what calibrates the
threshold):

``shared``      panel = shared dataset; calibration = MHDs of control
                individuals (non-members) to the shared dataset. Default.
``control-loo`` panel = control group; calibration = leave-one-out MHDs
                within the control group.
``case``        panel = control group; calibration = MHDs of shared
                individuals to the control group.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .data import SnpMatrix, encode
from .errors import DimensionError, InsufficientDataError, PreconditionError

MODE_SHARED = "shared"
MODE_CONTROL_LOO = "control-loo"
MODE_CASE = "case"
MODES = (MODE_SHARED, MODE_CONTROL_LOO, MODE_CASE)
DEFAULT_FPR = 0.05


def _rows(x, bits):
    vals = x.values if isinstance(x, SnpMatrix) else np.atleast_2d(np.asarray(x))
    return encode(vals) if bits else vals


def hamming(a, b):
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"rows of length {a.shape} and {b.shape}")
    return int(np.count_nonzero(a != b))


def min_hamming(victims, panel, bits=False, skip_same_index=False):
    """MHD from each victim row to ``panel``; genotype-level unless ``bits``."""
    q = _rows(victims, bits)
    r = _rows(panel, bits)
    if q.shape[1] != r.shape[1]:
        raise DimensionError(f"victim rows have {q.shape[1]} entries, panel has {r.shape[1]}")
    return kernels.min_hamming(q, r, skip_same_index)


def fpr_threshold(calibration_mhd, fpr=DEFAULT_FPR):
    """Largest order statistic with at most ``fpr`` of the calibration MHDs strictly below it."""
    cal = np.sort(np.asarray(calibration_mhd))
    if cal.size == 0:
        raise InsufficientDataError("no calibration distances")
    if not 0 <= fpr < 1:
        raise PreconditionError(f"fpr must lie in [0, 1), got {fpr}")
    k = int(np.floor(fpr * cal.size + 1e-12))
    return int(cal[k])


@dataclass(frozen=True)
class HdtModel:
    threshold: int
    panel: SnpMatrix
    mode: str = MODE_SHARED
    fpr: float = DEFAULT_FPR
    bits: bool = False
    calibration_mhd: np.ndarray = None

    def mhd(self, victims):
        return min_hamming(victims, self.panel, bits=self.bits)

    def to_dict(self):
        cal = self.calibration_mhd
        return {
            "threshold": self.threshold, "mode": self.mode, "fpr": self.fpr,
            "bits": self.bits, "panel_size": self.panel.n,
            "calibration_mhd_quantiles": (
                np.quantile(cal, [0.0, 0.05, 0.5, 0.95, 1.0]).tolist() if cal is not None else None),
        }


def hdt_calibrate(shared, control, fpr=DEFAULT_FPR, mode=MODE_SHARED, bits=False):
    if shared.m != control.m:
        raise DimensionError(f"shared has {shared.m} SNPs, control has {control.m}")
    if control.n < 2:
        raise InsufficientDataError("control group needs at least 2 individuals")
    if mode == MODE_SHARED:
        panel = shared
        cal = min_hamming(control, shared, bits=bits)
    elif mode == MODE_CONTROL_LOO:
        panel = control
        cal = min_hamming(control, control, bits=bits, skip_same_index=True)
    elif mode == MODE_CASE:
        panel = control
        cal = min_hamming(shared, control, bits=bits)
    else:
        raise PreconditionError(f"unknown HDT mode {mode!r}; choose from {MODES}")
    return HdtModel(fpr_threshold(cal, fpr), panel, mode, fpr, bits, cal)


def hdt_attack(model, victim):
    """True when the victim's MHD to the model panel is below the threshold."""
    victim = np.asarray(victim)
    if victim.ndim != 1 or victim.shape[0] != model.panel.m:
        raise DimensionError(f"victim must be a row of {model.panel.m} genotypes")
    return bool(model.mhd(victim[None, :])[0] < model.threshold)


def attack_power(model, members):
    """Recall: fraction of true members flagged as members."""
    if members.n < 1:
        raise PreconditionError("no member rows")
    return float(np.mean(model.mhd(members) < model.threshold))


@dataclass(frozen=True)
class UtilityReport:
    point_error: float
    sample_error: float
    mean_error: float
    variance_error: float

    def to_dict(self):
        return dict(self.__dict__)


def utility_metrics(original, shared):
    if original.shape != shared.shape:
        raise DimensionError(f"datasets differ in shape: {original.shape} vs {shared.shape}")
    a = original.values.astype(np.float64)
    b = shared.values.astype(np.float64)
    size = a.size
    return UtilityReport(
        point_error=float(np.count_nonzero(a != b) / size),
        sample_error=float(np.abs(a - b).sum() / size),
        mean_error=float(abs(a.mean() - b.mean())),
        variance_error=float(abs(a.var() - b.var())),
    )

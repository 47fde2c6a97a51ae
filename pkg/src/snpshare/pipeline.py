"""End-to-end sharing: budget split, the two stages, and experiment sweeps."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from . import gwas, seeding
from .calibration import DEFAULT_ALPHA, PROOF_POSITIVE_PART, calibrate, theta_tilde_stats
from .data import SnpMatrix, generate_synthetic, read_dataset
from .errors import DimensionError, PreconditionError
from .perturbation import perturb
from .privacy_eval import attack_power, hdt_calibrate, utility_metrics
from .restoration import restore

log = logging.getLogger(__name__)

DEFAULT_SPLIT = 0.2


@dataclass(frozen=True)
class PrivacyBudget:
    """Total epsilon split between the XOR stage (``split_x``) and the count stage."""

    eps_total: float
    split_x: float = DEFAULT_SPLIT

    def __post_init__(self):
        if not self.eps_total > 0:
            raise PreconditionError(f"eps_total must be > 0, got {self.eps_total}")
        if not 0 < self.split_x < 1:
            raise PreconditionError(f"split_x must lie in (0, 1), got {self.split_x}")

    @classmethod
    def from_ratio(cls, eps_total, ratio):
        """Budget with eps_x = ratio * eps_c (ratio 0.25 gives the 20/80 split)."""
        return cls(eps_total, ratio / (1.0 + ratio))

    def _parts(self):
        t = self.eps_total
        x = self.split_x * t
        c = t - x
        if x + c != t:
            # c >= t/2 here (for split > 1/2 the subtraction above is exact), so
            # t - c is exact and the pair sums to t in floating point
            x = t - c
        return x, c

    @property
    def eps_x(self):
        return self._parts()[0]

    @property
    def eps_c(self):
        return self._parts()[1]

    def to_dict(self):
        return {"eps_total": self.eps_total, "split_x": self.split_x,
                "eps_x": self.eps_x, "eps_c": self.eps_c,
                "eps_consumed": self.eps_x + self.eps_c}


@dataclass
class SanitizeResult:
    shared: SnpMatrix
    perturbed: SnpMatrix
    profile: object
    budget: PrivacyBudget
    seed: int
    diagnostics: list = field(default=None)
    timings: dict = field(default_factory=dict)

    def report(self):
        return {
            "budget": self.budget.to_dict(),
            "seed": self.seed,
            "n": self.shared.n,
            "m": self.shared.m,
            "noise_profile": self.profile.to_dict(),
            "timings_s": self.timings,
        }


def sanitize_with_report(d, ref, budget, seed, kappa_variant=PROOF_POSITIVE_PART,
                         alpha=DEFAULT_ALPHA, threads=1, diagnostics=False):
    if ref.m != d.m:
        raise DimensionError(f"reference has {ref.m} SNPs, dataset has {d.m}")
    t0 = time.perf_counter()
    stats = theta_tilde_stats(ref, alpha=alpha)
    profile = calibrate(stats, budget.eps_x, d.m, variant=kappa_variant, alpha=alpha)
    t1 = time.perf_counter()
    d_tilde = perturb(d, profile, seed, threads=threads)
    t2 = time.perf_counter()
    diag = [] if diagnostics else None
    shared = restore(d_tilde, d, budget.eps_c, seed, diagnostics=diag)
    t3 = time.perf_counter()
    log.debug("sanitize n=%d m=%d: calibrate %.3fs perturb %.3fs restore %.3fs",
              d.n, d.m, t1 - t0, t2 - t1, t3 - t2)
    return SanitizeResult(shared, d_tilde, profile, budget, seed, diag,
                          {"calibrate": t1 - t0, "perturb": t2 - t1, "restore": t3 - t2})


def sanitize(d, ref, budget, seed, **kwargs):
    """Share ``d`` under (eps_x + eps_c)-DP; ``ref`` is the public reference panel."""
    return sanitize_with_report(d, ref, budget, seed, **kwargs).shared


def mean_ci(samples, level=0.95):
    """Mean and two-sided t-interval; a single sample gives a zero-width interval."""
    x = np.asarray(samples, dtype=np.float64)
    mean = float(x.mean())
    if x.size < 2:
        return mean, mean, mean
    half = float(sps.t.ppf(0.5 + level / 2, x.size - 1) * x.std(ddof=1) / math.sqrt(x.size))
    return mean, mean - half, mean + half


SWEEP_DEFAULTS = {
    "epsilons": [1.5],
    "deltas": [0.0, 0.2, 0.6, 1.0],
    "trials": 5,
    "seed": 0,
    "split": DEFAULT_SPLIT,
    "omega": 0.05,
    "zeta": 0.7,
    "test": gwas.CHI2,
    "threshold": 0.5,
    "kappa_variant": PROOF_POSITIVE_PART,
    "alpha": DEFAULT_ALPHA,
    "hdt_mode": "shared",
    "synthetic": {"n_case": 200, "n_control": 200, "m": 1000, "n_assoc": 50, "maf_shift": 0.25},
    "case": None,
    "control": None,
}


def _load_data(cfg):
    if cfg.get("case") and cfg.get("control"):
        return read_dataset(cfg["case"]), read_dataset(cfg["control"])
    syn = dict(SWEEP_DEFAULTS["synthetic"])
    syn.update(cfg.get("synthetic") or {})
    return generate_synthetic(seed=cfg["seed"], **syn)


def sweep(config, case=None, control=None, threads=1):
    """Evaluate retention, attack power and utility over an (epsilon, delta) grid.

    Each epsilon is sanitised ``trials`` times with derived seeds; every delta
    reuses those runs. Returns a dict with the resolved config and one row per
    grid cell holding means and 95% t-intervals.
    """
    cfg = dict(SWEEP_DEFAULTS)
    cfg.update({k: v for k, v in config.items() if v is not None})
    epsilons = [float(e) for e in cfg["epsilons"]]
    deltas = [float(d) for d in cfg["deltas"]]
    trials = int(cfg["trials"])
    if not epsilons or not deltas or trials < 1:
        raise PreconditionError("sweep needs non-empty epsilon and delta grids and trials >= 1")
    if any(e <= 0 for e in epsilons) or any(d < 0 for d in deltas):
        raise PreconditionError("epsilons must be > 0 and deltas >= 0")
    if case is None or control is None:
        case, control = _load_data(cfg)

    truth = gwas.rank_snps(case, control, cfg["test"])
    findings = {d: gwas.shift_findings(truth, cfg["omega"], d) for d in deltas}
    rows = []
    for eps in epsilons:
        budget = PrivacyBudget(eps, cfg["split"])
        per_delta = {d: [] for d in deltas}
        powers, utils = [], []
        for trial in range(trials):
            seed = seeding.derive_seed(cfg["seed"], seeding.TRIAL, trial)
            res = sanitize_with_report(case, control, budget, seed,
                                       kappa_variant=cfg["kappa_variant"],
                                       alpha=cfg["alpha"], threads=threads)
            shared_rank = gwas.rank_snps(res.shared, control, cfg["test"])
            for d in deltas:
                rep = gwas.validate(findings[d], shared_rank, cfg["omega"], cfg["zeta"],
                                    cfg["threshold"])
                per_delta[d].append(rep.retention_ratio)
            model = hdt_calibrate(res.shared, control, mode=cfg["hdt_mode"])
            powers.append(attack_power(model, case))
            utils.append(utility_metrics(case, res.shared).to_dict())
        power = mean_ci(powers)
        util = {k: mean_ci([u[k] for u in utils]) for k in utils[0]}
        for d in deltas:
            ret = mean_ci(per_delta[d])
            rows.append({
                "epsilon": eps, "delta": d, "trials": trials,
                "retention": {"mean": ret[0], "ci": [ret[1], ret[2]], "samples": per_delta[d]},
                "attack_power": {"mean": power[0], "ci": [power[1], power[2]], "samples": powers},
                "utility": {k: {"mean": v[0], "ci": [v[1], v[2]]} for k, v in util.items()},
            })
    resolved = {k: v for k, v in cfg.items()}
    return {"config": resolved, "rows": rows}

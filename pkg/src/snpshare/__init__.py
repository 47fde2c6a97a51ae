"""Differentially private sharing of SNP genotype datasets.

Stage one flips bits of the 2-bit genotype encoding with calibrated
per-bit probabilities; stage two pulls each SNP's genotype distribution back
toward Laplace-noised counts by 1-D optimal transport. Verifier-side tools
rank SNPs, validate reported findings and audit membership leakage.
"""
from .calibration import NoiseProfile, ThetaRowStats, calibrate, sensitivity, theta_tilde_stats
from .data import SnpMatrix, decode, encode, generate_synthetic, read_dataset, write_dataset
from .errors import SnpShareError
from .gwas import chi_square, contingency, odds_ratio, rank_snps, shift_findings, validate
from .perturbation import perturb, sample_noise
from .pipeline import PrivacyBudget, sanitize, sanitize_with_report, sweep
from .privacy_eval import attack_power, hdt_attack, hdt_calibrate, utility_metrics
from .restoration import count_query, noisy_counts, normalize, ot_plan, restore

__version__ = "0.1.0"

__all__ = [
    "NoiseProfile", "PrivacyBudget", "SnpMatrix", "SnpShareError", "ThetaRowStats",
    "attack_power", "calibrate", "chi_square", "contingency", "count_query", "decode",
    "encode", "generate_synthetic", "hdt_attack", "hdt_calibrate", "noisy_counts",
    "normalize", "odds_ratio", "ot_plan", "perturb", "rank_snps", "read_dataset",
    "restore", "sample_noise", "sanitize", "sanitize_with_report", "sensitivity",
    "shift_findings", "sweep", "theta_tilde_stats", "utility_metrics", "validate",
    "write_dataset",
]

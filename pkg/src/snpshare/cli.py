"""Command-line entry point: ``snpshare <subcommand> [flags]``.

Reports go to stdout (or ``--report``) as JSON. Failures print a JSON error
object on stderr and exit non-zero. ``SNPSHARE_LOG`` sets log verbosity.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import yaml

from . import gwas
from .calibration import DEFAULT_ALPHA, KAPPA_VARIANTS, PROOF_POSITIVE_PART
from .data import generate_synthetic, read_dataset, write_dataset
from .errors import SnpShareError
from .pipeline import DEFAULT_SPLIT, PrivacyBudget, sanitize_with_report, sweep
from .privacy_eval import MODES, attack_power, hdt_calibrate, utility_metrics

EXIT_USAGE = 2
EXIT_FAILURE = 1

# settings that must come from a flag or the config file
_REQUIRED = {
    "gen": ("case_out", "control_out"),
    "sanitize": ("input", "ref", "output", "epsilon"),
    "findings": ("case", "control", "output"),
    "verify": ("shared", "control", "reported", "threshold"),
    "attack": ("shared", "control", "members"),
    "metrics": ("original", "shared"),
}

_TEST_ALIASES = {"chi2": gwas.CHI2, "or": gwas.ODDS_RATIO, "odds_ratio": gwas.ODDS_RATIO}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail("usage", message, EXIT_USAGE)


def _fail(kind, message, code=EXIT_FAILURE):
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    raise SystemExit(code)


def _emit(report, path=None):
    text = json.dumps(report, indent=2, sort_keys=False, default=_jsonable) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _jsonable(obj):
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _load_config(path):
    if not path:
        return {}
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    if not isinstance(data, dict):
        raise SnpShareError(f"config file {path} must hold a key-value mapping")
    return data


def _resolve(args, config, key, default=None):
    """CLI flag wins over the config file, which wins over the default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    return config.get(key, default)


def _flags(args):
    return {k: v for k, v in vars(args).items() if k != "func"}


def _read_reported(path, snp_ids):
    index = {s: j for j, s in enumerate(snp_ids)}
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        name = line.strip()
        if not name:
            continue
        if name not in index:
            raise SnpShareError(f"reported SNP {name!r} not present in shared dataset")
        out.append(index[name])
    return out


def cmd_gen(args, config):
    def get(key, default=None):
        return _resolve(args, config, key, default)

    case, control = generate_synthetic(
        int(get("n_case", 200)), int(get("n_control", 200)), int(get("m", 1000)),
        int(get("n_assoc", 50)), float(get("maf_shift", 0.25)), int(get("seed", 0)))
    write_dataset(case, get("case_out"))
    write_dataset(control, get("control_out"))
    return {"command": "gen", "flags": _flags(args), "case": get("case_out"),
            "control": get("control_out"), "n_case": case.n, "n_control": control.n, "m": case.m}


def cmd_sanitize(args, config):
    d = read_dataset(_resolve(args, config, "input"))
    ref = read_dataset(_resolve(args, config, "ref"))
    epsilon = _resolve(args, config, "epsilon")
    if epsilon is None:
        raise SnpShareError("--epsilon is required (flag or config file)")
    budget = PrivacyBudget(float(epsilon), float(_resolve(args, config, "split", DEFAULT_SPLIT)))
    seed = int(_resolve(args, config, "seed", 0))
    res = sanitize_with_report(
        d, ref, budget, seed,
        kappa_variant=_resolve(args, config, "kappa_variant", PROOF_POSITIVE_PART),
        alpha=float(_resolve(args, config, "alpha", DEFAULT_ALPHA)),
        threads=int(_resolve(args, config, "threads", 1)),
        diagnostics=bool(args.diagnostics))
    write_dataset(res.shared, _resolve(args, config, "output"))
    if args.dump_perturbed:
        write_dataset(res.perturbed, args.dump_perturbed)
    if args.diagnostics:
        with open(args.diagnostics, "w", encoding="utf-8") as fh:
            for rec in res.diagnostics:
                fh.write(json.dumps(rec) + "\n")
    report = res.report()
    report.pop("timings_s")  # keep reports byte-identical across runs
    return {"command": "sanitize", "flags": _flags(args), **report}


def cmd_findings(args, config):
    case = read_dataset(_resolve(args, config, "case"))
    control = read_dataset(_resolve(args, config, "control"))
    test = _TEST_ALIASES[_resolve(args, config, "test", "chi2")]
    ranking = gwas.rank_snps(case, control, test)
    omega = float(_resolve(args, config, "omega", 0.05))
    cols = gwas.shift_findings(ranking, omega, float(_resolve(args, config, "delta", 0.0)))
    Path(_resolve(args, config, "output")).write_text("".join(case.snp_ids[j] + "\n" for j in cols), encoding="utf-8")
    return {"command": "findings", "flags": _flags(args), "n_reported": len(cols),
            "reported": [case.snp_ids[j] for j in cols]}


def cmd_verify(args, config):
    shared = read_dataset(_resolve(args, config, "shared"))
    control = read_dataset(_resolve(args, config, "control"))
    reported = _read_reported(_resolve(args, config, "reported"), shared.snp_ids)
    test = _TEST_ALIASES[_resolve(args, config, "test", "chi2")]
    threshold = _resolve(args, config, "threshold")
    if threshold is None:
        raise SnpShareError("--threshold is required (flag or config file)")
    ranking = gwas.rank_snps(shared, control, test)
    rep = gwas.validate(reported, ranking, float(_resolve(args, config, "omega", 0.05)),
                        float(_resolve(args, config, "zeta", 0.7)), float(threshold))
    ranks = ranking.ranks()
    per_snp = [{"snp": shared.snp_ids[j], "rank": int(ranks[j]) + 1,
                "statistic": float(ranking.statistic[j]), "p_value": float(ranking.p_value[j]),
                "in_window": bool(ranks[j] < rep.window)} for j in reported]
    return {"command": "verify", "flags": _flags(args), "test": test, **rep.to_dict(),
            "reported_snps": per_snp}


def cmd_attack(args, config):
    shared = read_dataset(_resolve(args, config, "shared"))
    control = read_dataset(_resolve(args, config, "control"))
    members = read_dataset(_resolve(args, config, "members"))
    model = hdt_calibrate(shared, control, fpr=float(_resolve(args, config, "fpr", 0.05)),
                          mode=_resolve(args, config, "mode", "shared"),
                          bits=bool(_resolve(args, config, "bits", False)))
    return {"command": "attack", "flags": _flags(args), "model": model.to_dict(),
            "attack_power": attack_power(model, members), "n_members": members.n}


def cmd_metrics(args, config):
    rep = utility_metrics(read_dataset(_resolve(args, config, "original")),
                          read_dataset(_resolve(args, config, "shared")))
    return {"command": "metrics", "flags": _flags(args), **rep.to_dict()}


def cmd_sweep(args, config):
    cfg = dict(config)
    for key in ("epsilons", "deltas", "trials", "seed", "split", "omega", "zeta",
                "threshold", "case", "control", "kappa_variant", "hdt_mode"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if args.test is not None:
        cfg["test"] = _TEST_ALIASES[args.test]
    elif "test" in cfg:
        cfg["test"] = _TEST_ALIASES[cfg["test"]]
    result = sweep(cfg, threads=args.threads or 1)
    return {"command": "sweep", "flags": _flags(args), **result}


def build_parser():
    p = _Parser(prog="snpshare", description="Differentially private SNP dataset sharing")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="YAML/JSON key-value file; flags override it")
        sp.add_argument("--report", help="write the JSON report here instead of stdout")

    g = sub.add_parser("gen", help="synthetic case/control datasets")
    common(g)
    g.add_argument("--n-case", type=int)
    g.add_argument("--n-control", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--n-assoc", type=int)
    g.add_argument("--maf-shift", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--case-out")
    g.add_argument("--control-out")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("sanitize", help="share a dataset under differential privacy")
    common(s)
    s.add_argument("--input")
    s.add_argument("--ref")
    s.add_argument("--epsilon", type=float)
    s.add_argument("--split", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--output")
    s.add_argument("--kappa-variant", choices=KAPPA_VARIANTS)
    s.add_argument("--alpha", type=float)
    s.add_argument("--threads", type=int)
    s.add_argument("--dump-perturbed", help="also write the XOR-only dataset here")
    s.add_argument("--diagnostics", help="per-SNP restoration records as JSON lines")
    s.set_defaults(func=cmd_sanitize)

    f = sub.add_parser("findings", help="top omega*m SNPs, optionally shifted by delta")
    common(f)
    f.add_argument("--case")
    f.add_argument("--control")
    f.add_argument("--omega", type=float)
    f.add_argument("--delta", type=float)
    f.add_argument("--test", choices=sorted(_TEST_ALIASES))
    f.add_argument("--output")
    f.set_defaults(func=cmd_findings)

    v = sub.add_parser("verify", help="SNP retention ratio of reported findings")
    common(v)
    v.add_argument("--shared")
    v.add_argument("--control")
    v.add_argument("--reported", help="file with one SNP id per line")
    v.add_argument("--omega", type=float)
    v.add_argument("--zeta", type=float)
    v.add_argument("--threshold", type=float)
    v.add_argument("--test", choices=sorted(_TEST_ALIASES))
    v.set_defaults(func=cmd_verify)

    a = sub.add_parser("attack", help="Hamming-distance membership inference")
    common(a)
    a.add_argument("--shared")
    a.add_argument("--control")
    a.add_argument("--members", help="true member rows (recall is measured on these)")
    a.add_argument("--fpr", type=float)
    a.add_argument("--mode", choices=MODES)
    a.add_argument("--bits", action="store_true", default=None,
                   help="Hamming distance on encoded bits")
    a.set_defaults(func=cmd_attack)

    mt = sub.add_parser("metrics", help="point/sample/mean/variance errors")
    common(mt)
    mt.add_argument("--original")
    mt.add_argument("--shared")
    mt.set_defaults(func=cmd_metrics)

    w = sub.add_parser("sweep", help="retention / attack / utility over an epsilon x delta grid")
    common(w)
    w.add_argument("--epsilons", type=float, nargs="+")
    w.add_argument("--deltas", type=float, nargs="+")
    w.add_argument("--trials", type=int)
    w.add_argument("--seed", type=int)
    w.add_argument("--split", type=float)
    w.add_argument("--omega", type=float)
    w.add_argument("--zeta", type=float)
    w.add_argument("--threshold", type=float)
    w.add_argument("--test", choices=sorted(_TEST_ALIASES))
    w.add_argument("--case")
    w.add_argument("--control")
    w.add_argument("--kappa-variant", choices=KAPPA_VARIANTS)
    w.add_argument("--hdt-mode", choices=MODES)
    w.add_argument("--threads", type=int)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    level = os.environ.get("SNPSHARE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args.config)
        missing = [k for k in _REQUIRED.get(args.command, ()) if _resolve(args, config, k) is None]
        if missing:
            raise SnpShareError("missing required setting(s): " + ", ".join(missing))
        report = args.func(args, config)
    except (SnpShareError, IndexError) as exc:
        _fail(type(exc).__name__, str(exc))
    except (OSError, yaml.YAMLError) as exc:
        _fail(type(exc).__name__, str(exc))
    _emit(report, args.report)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

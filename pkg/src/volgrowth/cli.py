"""Command line entry point: ``volgrowth {invariants,verify,cohomology,report}``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bundles import check_domination, lyapunov_spectrum
from .cohomology import form_certificate, spectral_split, theorem2_rhs
from .entropy import MeasureSampler, katok_entropy
from .growth import growth_rate_family, integrated_growth
from .harness import CHECKS, EXIT_ERROR, ConfigError, CampaignConfig, run_campaign
from .system import InvalidSystemError, catalog, load_system

INVARIANTS = ("lyapunov", "domination", "integrated", "leaf", "transverse", "entropy")


def _system_from_args(args):
    if args.config:
        return load_system(args.config)
    return catalog(args.system, args.epsilon)


def _emit(payload: dict, as_json: bool):
    if as_json:
        print(json.dumps(payload, indent=2, sort_keys=True))
        return
    for key, value in payload.items():
        print(f"{key:>22}: {value}")


def cmd_invariants(args) -> int:
    f = _system_from_args(args)
    u = args.u if args.u is not None else spectral_split(np.asarray(f.linear_part)).unstable
    seed = args.seed
    wanted = args.estimator or ["lyapunov", "domination", "integrated"]
    ns = range(args.n_min, args.n_max + 1)
    out = {"system": f.describe(), "u": u}
    for name in wanted:
        if name == "lyapunov":
            x = np.random.default_rng(seed).random(f.dimension)
            spec = lyapunov_spectrum(f, x, args.lyapunov_n, seed=seed)
            out["lyapunov"] = {"exponents": spec.exponents.tolist(), "log_det_average": spec.log_det_average}
        elif name == "domination":
            X = np.random.default_rng(seed).random((64, f.dimension))
            dom = check_domination(f, X, u, seed=seed)
            out["domination"] = {"dominated": dom.dominated, "margin": dom.margin, "converged": dom.converged}
        elif name == "integrated":
            est = integrated_growth(f, u, args.samples, ns, seed)
            out["integrated"] = {"rate": est.rate, "residual": est.residual}
        elif name in ("leaf", "transverse"):
            for mode in ("per-disk", "per-n-sup"):
                est = growth_rate_family(f, name, mode, args.disks, ns, seed, u=u)
                out[f"{name}/{mode}"] = {"rate": est.rate, "residual": est.residual}
        elif name == "entropy":
            est = katok_entropy(f, MeasureSampler(N=args.entropy_samples, seed=seed))
            out["entropy"] = {"rate": est.rate, "delta": est.delta}
    _emit(out, args.json)
    return 0


def cmd_cohomology(args) -> int:
    if args.matrix:
        A = np.array(json.loads(args.matrix))
    else:
        A = np.asarray(_system_from_args(args).linear_part)
    split = spectral_split(A)
    u = args.degree if args.degree is not None else split.unstable
    payload = {"matrix": A.tolist(), "unstable": split.unstable, "center": split.center,
               "stable": split.stable, "degree": u}
    if 1 <= u <= A.shape[0]:
        payload["log_spec"] = theorem2_rhs(A, u)
        payload["certificate"] = form_certificate(A, u)
    _emit(payload, args.json)
    return 0


def cmd_verify(args) -> int:
    config = CampaignConfig.load(args.config).with_overrides(seed=args.seed, checks=args.check)
    report = run_campaign(config, args.out, json_out=args.json, csv_out=args.csv)
    for rec in report.checks:
        slack = "" if rec.slack is None else f" slack={rec.slack:+.4f}"
        reason = f" ({rec.reason})" if rec.reason else ""
        print(f"{rec.name:<11} {rec.status.upper():<13}{slack}{reason}")
    if args.out:
        print(f"report written to {Path(args.out) / 'report.json'}")
    return report.exit_code


def cmd_report(args) -> int:
    doc = json.loads(Path(args.path).read_text())
    if args.json:
        print(json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False))
        return doc.get("exit_code", 0)
    print(f"{doc.get('name')}  seed={doc.get('seed')}  version={doc.get('version')}")
    for rec in doc.get("checks", []):
        print(f"\n[{rec['status'].upper()}] {rec['name']}")
        if rec.get("slack") is not None:
            print(f"  slack {rec['slack']:+.4f} (tolerance {rec['tolerance']})")
        if rec.get("reason"):
            print(f"  reason: {rec['reason']}")
        for key, value in rec.get("quantities", {}).items():
            print(f"  {key}: {json.dumps(value, ensure_ascii=False)}")
        for caveat in rec.get("caveats", []):
            print(f"  caveat: {caveat}")
    return doc.get("exit_code", 0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="volgrowth", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def system_args(p):
        p.add_argument("--config", help="JSON system or campaign config")
        p.add_argument("--system", default="cat",
                       choices=["cat", "t3-center", "t3-complex", "perturbed-cat", "perturbed-t3-center"])
        p.add_argument("--epsilon", type=float, default=0.02, help="amplitude for perturbed catalog systems")
        p.add_argument("--json", action=argparse.BooleanOptionalAction, default=False)

    p = sub.add_parser("invariants", help="one-off estimator runs")
    system_args(p)
    p.add_argument("--estimator", action="append", choices=INVARIANTS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-u", type=int, default=None)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--disks", type=int, default=20)
    p.add_argument("--entropy-samples", type=int, default=4000)
    p.add_argument("--lyapunov-n", type=int, default=100000)
    p.add_argument("--n-min", type=int, default=5)
    p.add_argument("--n-max", type=int, default=25)
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("verify", help="run a verification campaign")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="directory for report.json and series/*.csv")
    p.add_argument("--check", action="append", choices=CHECKS)
    p.add_argument("--json", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--csv", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("cohomology", help="exact log spectral radius of the action on H^u")
    system_args(p)
    p.add_argument("--matrix", help="integer matrix as JSON, e.g. '[[2,1],[1,1]]'")
    p.add_argument("--degree", type=int, default=None)
    p.set_defaults(func=cmd_cohomology)

    p = sub.add_parser("report", help="pretty-print a report.json")
    p.add_argument("path")
    p.add_argument("--json", action=argparse.BooleanOptionalAction, default=False)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidSystemError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

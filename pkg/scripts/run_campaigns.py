"""Run every campaign config and write one report directory per config.

    python3 scripts/run_campaigns.py [--configs configs] [--out results]
"""
import argparse
import time
from pathlib import Path

from volgrowth.harness import CampaignConfig, run_campaign


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--configs", default=Path(__file__).resolve().parents[1] / "configs", type=Path)
    ap.add_argument("--out", default=Path("results"), type=Path)
    ap.add_argument("--seed", type=int, default=None, help="override every config's seed")
    args = ap.parse_args()

    worst = 0
    for path in sorted(args.configs.glob("*.json")):
        t = time.perf_counter()
        report = run_campaign(CampaignConfig.load(path).with_overrides(seed=args.seed), args.out / path.stem)
        worst = max(worst, report.exit_code)
        print(f"{path.stem}  ({time.perf_counter() - t:.1f}s)")
        for rec in report.checks:
            slack = "" if rec.slack is None else f"{rec.slack:+.4f}"
            print(f"    {rec.name:<11} {rec.status:<13} {slack}")
    return worst


if __name__ == "__main__":
    raise SystemExit(main())

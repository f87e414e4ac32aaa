"""Five growth estimates on the perturbed cat map across a range of amplitudes.

The unperturbed value log((3+sqrt 5)/2) is printed alongside for reference.
"""
import argparse
import math

from volgrowth.growth import ESTIMATORS, growth_rate_family, integrated_growth
from volgrowth.system import catalog


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", nargs="+", type=float, default=[0.0, 0.01, 0.02, 0.05, 0.1])
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--disks", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    ns = range(5, 26)
    print(f"unperturbed rate {math.log((3 + math.sqrt(5)) / 2):.4f}")
    print("eps    " + "  ".join(f"{name:>20}" for name in ESTIMATORS))
    for eps in args.eps:
        f = catalog("perturbed-cat", eps) if eps else catalog("cat")
        rates = [integrated_growth(f, 1, args.samples, ns, args.seed).rate]
        for family in ("leaf", "transverse"):
            for mode in ("per-disk", "per-n-sup"):
                rates.append(growth_rate_family(f, family, mode, args.disks, ns, args.seed, u=1).rate)
        print(f"{eps:<6} " + "  ".join(f"{r:>20.4f}" for r in rates), flush=True)


if __name__ == "__main__":
    main()

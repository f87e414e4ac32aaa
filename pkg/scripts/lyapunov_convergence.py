"""Lyapunov exponent error against orbit length.

Linear systems are compared with the exact log eigenvalue moduli; perturbed
ones with the value at the longest n (so the last row reads zero by design).
"""
import argparse

import numpy as np

from volgrowth.bundles import lyapunov_spectrum
from volgrowth.cohomology import log_moduli
from volgrowth.system import catalog


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--systems", nargs="+", default=["cat", "t3-complex", "perturbed-cat"])
    ap.add_argument("--lengths", nargs="+", type=int, default=[10**3, 10**4, 10**5, 10**6])
    ap.add_argument("--epsilon", type=float, default=0.05)
    args = ap.parse_args()

    x = np.random.default_rng(0)
    for name in args.systems:
        f = catalog(name, args.epsilon)
        x0 = x.random(f.dimension)
        spectra = {n: lyapunov_spectrum(f, x0, n, seed=1).exponents for n in sorted(args.lengths)}
        if f.is_linear:
            ref, label = np.sort(log_moduli(f.linear_part)), "exact"
        else:
            ref, label = spectra[max(spectra)], f"n={max(spectra)}"
        print(f"{name}  (reference: {label})")
        for n, ex in spectra.items():
            print(f"  n={n:<9} max error {np.abs(ex - ref).max():.2e}  exponents {np.round(ex, 6).tolist()}")


if __name__ == "__main__":
    main()

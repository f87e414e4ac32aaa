"""Reference computations that share no code with the package.

Eigenvalues come from mpmath root finding on a sympy characteristic
polynomial, minors from sympy determinants, orbits and separated sets from
plain Python loops.
"""
from __future__ import annotations

import itertools
import math

import mpmath
import numpy as np
import sympy

mpmath.mp.dps = 50

LOG_GOLDEN_SQ = math.log((3 + math.sqrt(5)) / 2)  # log of the cat map's expanding eigenvalue


def charpoly_coeffs(A) -> list[int]:
    t = sympy.Symbol("t")
    return [int(c) for c in sympy.Matrix(A).charpoly(t).all_coeffs()]


def log_moduli(A) -> np.ndarray:
    """log |eigenvalue| of an integer matrix, descending, 50-digit root finding."""
    roots = mpmath.polyroots(charpoly_coeffs(A), maxsteps=500, extraprec=500)
    return np.array(sorted((float(mpmath.log(abs(r))) for r in roots), reverse=True))


def top_log_sum(A, u: int) -> float:
    return float(log_moduli(A)[:u].sum())


def minors(A, k: int) -> np.ndarray:
    M = sympy.Matrix(A)
    d = M.shape[0]
    subsets = list(itertools.combinations(range(d), k))
    return np.array([[int(M.extract(list(S), list(T)).det()) for T in subsets] for S in subsets], dtype=object)


def torus_dist(x, y) -> float:
    total = 0.0
    for a, b in zip(x, y):
        diff = (a - b) % 1.0
        diff = min(diff, 1.0 - diff)
        total += diff * diff
    return math.sqrt(total)


def linear_orbit(A, x, n: int) -> list[tuple[float, ...]]:
    pts = [tuple(float(v) % 1.0 for v in x)]
    for _ in range(n):
        p = pts[-1]
        pts.append(tuple(sum(A[i][j] * p[j] for j in range(len(p))) % 1.0 for i in range(len(p))))
    return pts


def bowen(A, x, y, n: int) -> float:
    return max(torus_dist(p, q) for p, q in zip(linear_orbit(A, x, n), linear_orbit(A, y, n)))


def greedy_count(points, delta: float, dist) -> int:
    picked = []
    for p in points:
        if all(dist(p, q) > delta for q in picked):
            picked.append(p)
    return len(picked)


def random_unimodular(rng: np.random.Generator, d: int, steps: int = 12) -> np.ndarray:
    """Product of random elementary integer matrices and sign flips: det = +-1."""
    A = np.eye(d, dtype=np.int64)
    for _ in range(steps):
        i, j = rng.choice(d, size=2, replace=False)
        E = np.eye(d, dtype=np.int64)
        E[i, j] = rng.integers(-2, 3)
        A = E @ A
    flips = np.diag(rng.choice([-1, 1], size=d)).astype(np.int64)
    return flips @ A[rng.permutation(d)]

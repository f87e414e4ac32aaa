"""Metric entropy from the growth of (n, delta)-separated sets in a sample.

Counts come from greedy maximal separated subsets of a finite sample, taken in
sample order. A maximal separated set is also spanning, so its size sits
between covering numbers at delta and delta/2. Fits stop once a count passes a
quarter of the sample, since beyond that the sample itself is the bottleneck.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .growth import fit_rate
from .system import canonical, torus_distance

DEFAULT_LADDER = (0.2, 0.1, 0.05, 0.02)
SATURATION_FRACTION = 0.25
MIN_SAMPLES = 100


@dataclass(frozen=True)
class MeasureSampler:
    """Lebesgue samples, optionally pushed forward ``burn_in`` times.

    The pushed-forward sample stands in for a physical measure of a perturbed
    map; nothing here certifies that the limit is ergodic.
    """

    kind: str = "lebesgue"
    N: int = 4000
    seed: int = 0
    burn_in: int = 0

    def __post_init__(self):
        if self.kind not in ("lebesgue", "pushforward"):
            raise ValueError(f"unknown sampler kind {self.kind!r}")
        if self.N < MIN_SAMPLES:
            raise ValueError(f"need at least {MIN_SAMPLES} samples, got {self.N}")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.kind == "lebesgue" and self.burn_in:
            raise ValueError("burn_in only applies to the pushforward sampler")

    def sample(self, f) -> np.ndarray:
        X = np.random.default_rng(self.seed).random((self.N, f.dimension))
        for _ in range(self.burn_in):
            X = f(X)
        return X


@dataclass(frozen=True)
class DeltaRecord:
    delta: float
    series: tuple[tuple[int, float], ...]  # (n, log count) for unsaturated n
    rate: float | None
    residual: float | None
    saturation_n: int | None  # first n whose count passed the guard


@dataclass(frozen=True)
class EntropyEstimate:
    records: tuple[DeltaRecord, ...]
    rate: float
    delta: float  # the delta the rate was read at
    ladder: tuple[float, ...]

    def as_dict(self) -> dict:
        return {"rate": self.rate, "delta": self.delta, "ladder": list(self.ladder),
                "records": [{"delta": r.delta, "rate": r.rate, "residual": r.residual,
                             "saturation_n": r.saturation_n, "series": [list(p) for p in r.series]}
                            for r in self.records]}


def bowen_distance(f, x, y, n: int, cutoff: float | None = None) -> float:
    """max over 0 <= i <= n of the torus distance between f^i x and f^i y.

    With a cutoff the scan stops as soon as the running maximum reaches it and
    that running value (>= cutoff) is returned.
    """
    x = canonical(np.asarray(x, dtype=float))
    y = canonical(np.asarray(y, dtype=float))
    best = torus_distance(x, y)
    for _ in range(n):
        if cutoff is not None and best >= cutoff:
            return best
        x, y = f(x), f(y)
        best = max(best, torus_distance(x, y))
    return best


def orbit_table(f, X, n: int) -> np.ndarray:
    """Orbits of every sample point, shape (n+1, N, d)."""
    X = canonical(np.asarray(X, dtype=float))
    out = np.empty((n + 1,) + X.shape)
    out[0] = X
    for i in range(n):
        out[i + 1] = f(out[i])
    return out


def _max_pairwise(D: np.ndarray, P: np.ndarray, chunk: int = 512):
    """D <- max(D, pairwise torus distances of P), in place, chunked over rows."""
    P = P.astype(np.float32)
    for a in range(0, len(P), chunk):
        sq = np.zeros((min(chunk, len(P) - a), len(P)), dtype=np.float32)
        for k in range(P.shape[1]):
            diff = P[a:a + chunk, None, k] - P[None, :, k]
            diff -= np.round(diff)
            sq += diff * diff
        np.maximum(D[a:a + chunk], np.sqrt(sq), out=D[a:a + chunk])


def greedy_separated(D: np.ndarray, delta: float, cap: int | None = None, start=()) -> np.ndarray:
    """Indices picked in order, skipping anything within ``delta`` of an earlier pick.

    ``start`` is an already separated set that is kept and extended. Stops once
    more than ``cap`` points are selected.
    """
    picked = [int(i) for i in start]
    covered = np.zeros(len(D), dtype=bool)
    if picked:
        covered |= (D[picked] <= delta).any(axis=0)
    for i in range(len(D)):
        if cap is not None and len(picked) > cap:
            break
        if covered[i]:
            continue
        picked.append(i)
        covered |= D[i] <= delta
    return np.array(picked, dtype=int)


def separated_counts(f, X, ns, deltas, cap: int | None = None) -> np.ndarray:
    """Greedy separated-set sizes for every (delta, n); shape (len(deltas), len(ns)).

    The Bowen distance matrix is built incrementally, one iterate at a time.
    Each greedy pass starts from the larger of two sets that are already
    separated for it: the picks for the same delta at the previous n (Bowen
    distances only grow) and the picks for the next larger delta at the same n.
    Counts are therefore monotone in both n and delta, which plain greedy
    counts are not. Counts above ``cap`` are reported as ``cap + 1``; the scan
    stops once every delta is past the cap.
    """
    ns = [int(n) for n in ns]
    if any(n < 0 for n in ns):
        raise ValueError("n must be >= 0")
    if any(not d > 0 for d in deltas):
        raise ValueError("delta must be positive")
    order = np.argsort(-np.asarray(deltas, dtype=float), kind="stable")
    orbits = orbit_table(f, X, max(ns))
    N = orbits.shape[1]
    # float32 halves memory; distances are compared against deltas >= 1e-3
    D = np.zeros((N, N), dtype=np.float32)
    wanted = {n: k for k, n in enumerate(ns)}
    out = np.zeros((len(deltas), len(ns)), dtype=int)
    previous = {j: np.empty(0, dtype=int) for j in order}
    for i in range(max(ns) + 1):
        _max_pairwise(D, orbits[i])
        if i not in wanted:
            continue
        coarser = np.empty(0, dtype=int)
        for j in order:
            start = previous[j] if len(previous[j]) >= len(coarser) else coarser
            picks = greedy_separated(D, deltas[j], cap, start)
            out[j, wanted[i]] = len(picks)
            previous[j] = coarser = picks
        if cap is not None and np.all(out[:, wanted[i]] > cap):
            out[:, wanted[i]:] = cap + 1
            break
    return out


def separated_count(f, points, n: int, delta: float) -> int:
    return int(separated_counts(f, points, [n], [delta])[0, 0])


def katok_entropy(f, sampler: MeasureSampler | None = None, deltas=(0.2, 0.1, 0.05), n_range=range(2, 15),
                  X: np.ndarray | None = None) -> EntropyEstimate:
    """Growth rate of separated counts per delta, read at the smallest usable delta."""
    deltas = tuple(float(d) for d in deltas)
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("delta ladder must be strictly decreasing")
    if X is None:
        X = (sampler or MeasureSampler()).sample(f)
    ns = sorted(set(int(n) for n in n_range))
    cap = int(SATURATION_FRACTION * len(X))
    counts = separated_counts(f, X, ns, deltas, cap)
    records = []
    for delta, row in zip(deltas, counts):
        over = np.flatnonzero(row > cap)
        sat = int(ns[over[0]]) if len(over) else None
        usable = [(n, math.log(c)) for n, c in zip(ns, row) if sat is None or n < sat]
        rate = res = None
        if len(usable) >= 3:
            rate, res = fit_rate(usable)
        records.append(DeltaRecord(delta, tuple(usable), rate, res, sat))
    fitted = [r for r in records if r.rate is not None]
    if not fitted:
        raise ValueError("sample too small for ladder: no delta has 3 unsaturated values of n")
    return EntropyEstimate(tuple(records), fitted[-1].rate, fitted[-1].delta, deltas)

"""Volume growth of unstable disks and of the unstable bundle.

Five rates are estimated here:

* integrated: (1/n) log of the space average of the n-step u-volume expansion
  on E^u, a Monte-Carlo integral accumulated in log space;
* leaf / per-disk and leaf / per-n-sup: growth of iterated disks lying in
  unstable leaves, with the supremum over disks taken after or before the fit;
* transverse / per-disk and transverse / per-n-sup: the same for flat disks
  merely transverse to E^cs.

Disk volumes are integrals over the parameter ball of the tangent-plane volume
expansion of f^n, so no forward mesh is ever built. Sampled maxima over finitely
many disks only bound the true suprema from below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .bundles import (DEFAULT_SETTLE, UNCONVERGED_ANGLE, UnconvergedError, check_domination, splitting_frames,
                      unstable_frames)
from .multilinear import DegeneracyError, Subspace, batched_qr, subspace_angle
from .system import canonical

DEFAULT_WINDOW = (5, 25)
LEAF_TILT_MAX = 1e-6
MAX_NODES = 1_000_000
ESTIMATORS = ("integrated", "leaf/per-disk", "leaf/per-n-sup", "transverse/per-disk", "transverse/per-n-sup")

_GL_ORDER = 4
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)


class PreconditionError(ValueError):
    """An estimator was called on a system or disk that violates its assumptions."""


class RefinementError(RuntimeError):
    """Adaptive quadrature hit the node cap; carries the partial answer."""

    def __init__(self, message: str, partial: np.ndarray, achieved: float):
        super().__init__(message)
        self.partial = partial
        self.achieved = achieved


@dataclass(frozen=True)
class GrowthEstimate:
    estimator: str
    series: tuple[tuple[int, float], ...]
    rate: float
    residual: float
    window: tuple[int, int]
    lower_bound: bool = False  # True when the rate comes from a sampled supremum
    details: dict = field(default_factory=dict, compare=False)

    def as_dict(self) -> dict:
        return {"estimator": self.estimator, "rate": self.rate, "residual": self.residual,
                "window": list(self.window), "lower_bound": self.lower_bound,
                "series": [[n, v] for n, v in self.series], **self.details}


def fit_rate(series, window=None) -> tuple[float, float]:
    """Least-squares slope of log value against n inside ``window``, and the
    largest absolute deviation from the fitted line there."""
    pts = np.asarray(list(series), dtype=float).reshape(-1, 2)
    if window is not None:
        lo, hi = window
        pts = pts[(pts[:, 0] >= lo) & (pts[:, 0] <= hi)]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points in the fit window, got {len(pts)}")
    n, y = pts[:, 0], pts[:, 1]
    slope, intercept = np.polyfit(n, y, 1)
    return float(slope), float(np.abs(slope * n + intercept - y).max())


def _window_for(ns, window) -> tuple[int, int]:
    lo, hi = window if window is not None else DEFAULT_WINDOW
    lo, hi = max(lo, min(ns)), min(hi, max(ns))
    if sum(lo <= n <= hi for n in ns) < 3:
        raise ValueError(f"fit window {window} leaves fewer than 3 of the requested n values")
    return int(lo), int(hi)


def push_volumes(f, X, Q, steps: int):
    """Push frames ``Q`` (N, d, u) along the orbits of ``X`` for ``steps`` iterates.

    Returns ``(history, X_end, Q_end)`` where ``history[:, k]`` is the log of the
    k-step u-volume expansion; column 0 is zero.
    """
    X = np.asarray(X, dtype=float)
    Q = np.asarray(Q, dtype=float)
    hist = np.zeros((X.shape[0], steps + 1))
    if Q.shape[-1] == 1:
        # a single vector: its norm is the whole volume factor
        v = Q[..., 0]
        for k in range(steps):
            v = np.einsum("nij,nj->ni", f.jacobian(X), v)
            norm = np.linalg.norm(v, axis=-1)
            if not np.all(norm > 0) or not np.all(np.isfinite(norm)):
                raise DegeneracyError(f"tangent vector collapsed after {k} iterates")
            v = v / norm[:, None]
            hist[:, k + 1] = hist[:, k] + np.log(norm)
            X = f(X)
        return hist, X, v[..., None]
    for k in range(steps):
        try:
            Q, R = batched_qr(f.jacobian(X) @ Q)
        except DegeneracyError as exc:
            raise DegeneracyError(f"tangent plane collapsed after {k} iterates") from exc
        hist[:, k + 1] = hist[:, k] + np.log(np.abs(np.diagonal(R, axis1=-2, axis2=-1))).sum(-1)
        X = f(X)
    return hist, X, Q


def cocycle_push(f, x, F, n: int):
    """``(log volume, f^n x, frame at f^n x)`` for one point; splitting a run in
    two pieces with this reproduces the single run."""
    Q = F.frame if isinstance(F, Subspace) else np.asarray(F, dtype=float)
    if Q.ndim == 1:
        Q = Q[:, None]
    Q, _ = batched_qr(Q)
    hist, xn, Qn = push_volumes(f, canonical(np.asarray(x, dtype=float))[None], Q[None], n)
    return float(hist[0, -1]), xn[0], Qn[0]


def log_cocycle_volume(f, x, F, n: int) -> float:
    """log of the factor by which Df^n(x) scales u-volume on the plane F."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return cocycle_push(f, x, F, n)[0]


def _require_domination(f, u: int, seed: int, n_check: int = 32):
    X = np.random.default_rng(seed).random((n_check, f.dimension))
    dom = check_domination(f, X, u, seed=seed)
    if not dom.dominated:
        raise PreconditionError(f"no dominated splitting with u={u} (margin {dom.margin:.6g})")
    return dom


def integrated_growth(f, u: int, N_samples: int = 2000, n_range=range(5, 26), seed: int = 0,
                      window=None, n_settle: int = DEFAULT_SETTLE, check: bool = True) -> GrowthEstimate:
    """Rate of (1/n) log of the Lebesgue average of the n-step volume expansion on E^u."""
    ns = sorted(set(int(n) for n in n_range))
    if N_samples < 1 or not ns or ns[0] < 0:
        raise ValueError("need N_samples >= 1 and a non-empty range of n >= 0")
    win = _window_for(ns, window)
    if check:
        _require_domination(f, u, seed)
    rng = np.random.default_rng(seed)
    X = rng.random((N_samples, f.dimension))
    Q, residual, base = unstable_frames(f, X, u, n_settle, seed + 1)
    bad = residual > UNCONVERGED_ANGLE
    if bad.mean() > 0.01:
        i = int(np.argmax(bad))
        raise UnconvergedError(f"E^u unsettled at {int(bad.sum())} of {N_samples} samples, e.g. {base[i].tolist()}",
                               point=base[i], residual=float(residual[i]))
    hist, _, _ = push_volumes(f, base, Q, ns[-1])
    series = tuple((n, float(logsumexp(hist[:, n]) - math.log(N_samples))) for n in ns)
    rate, res = fit_rate(series, win)
    return GrowthEstimate("integrated", series, rate, res, win,
                          details={"samples": N_samples, "unconverged_samples": int(bad.sum()),
                                   "max_bundle_residual": float(residual.max())})


# --- parameterized disks ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DiskSpec:
    """A flat u-disk ``y + radius * frame @ s`` (|s| <= 1) pushed ``depth`` times.

    For a leaf disk ``y`` is a pre-image of the centre and the pushed disk
    approximates a piece of unstable leaf; ``radius`` is then the parameter
    radius at the pre-image. Transverse disks have depth zero.
    """

    center: np.ndarray
    frame: np.ndarray
    radius: float
    family: str
    tilt: float
    origin: np.ndarray | None = None
    depth: int = 0

    def __post_init__(self):
        if self.family not in ("leaf", "transverse"):
            raise ValueError(f"unknown disk family {self.family!r}")
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")
        Q = np.asarray(self.frame, dtype=float)
        Q = Q[:, None] if Q.ndim == 1 else Q
        object.__setattr__(self, "frame", Subspace(Q).frame)
        object.__setattr__(self, "center", canonical(np.asarray(self.center, dtype=float)))
        if self.origin is None:
            object.__setattr__(self, "origin", self.center)

    @property
    def rank(self) -> int:
        return self.frame.shape[1]


def ball_volume(u: int, r: float = 1.0) -> float:
    return math.pi ** (u / 2) / math.gamma(u / 2 + 1) * r ** u


class _Rule:
    """Tensor Gauss-Legendre rule on boxes of parameter space, mapped to the unit ball."""

    def __init__(self, u: int):
        if u not in (1, 2):
            raise PreconditionError("disk quadrature supports u = 1 or 2")
        self.u = u
        grids = np.meshgrid(*([_GL_NODES] * u), indexing="ij")
        self.ref_nodes = np.stack([g.ravel() for g in grids], axis=-1)
        self.ref_weights = np.prod(np.meshgrid(*([_GL_WEIGHTS] * u), indexing="ij"), axis=0).ravel()

    def initial_boxes(self) -> np.ndarray:
        if self.u == 1:
            edges = np.linspace(-1.0, 1.0, 5)
            return np.stack([edges[:-1], edges[1:]], axis=-1)[:, None, :]
        rho = np.linspace(0.0, 1.0, 3)
        phi = np.linspace(0.0, 2 * math.pi, 5)
        return np.array([[[rho[i], rho[i + 1]], [phi[j], phi[j + 1]]] for i in range(2) for j in range(4)])

    def nodes(self, box: np.ndarray):
        """Parameter points in the unit ball and log weights for one box (u, 2)."""
        lo, hi = box[:, 0], box[:, 1]
        half = (hi - lo) / 2
        t = lo + half * (self.ref_nodes + 1)
        w = self.ref_weights * np.prod(half)
        if self.u == 1:
            return t, np.log(w)
        rho, phi = t[:, 0], t[:, 1]
        s = np.stack([rho * np.cos(phi), rho * np.sin(phi)], axis=-1)
        return s, np.log(w * rho)

    def split(self, box: np.ndarray) -> list[np.ndarray]:
        mid = box.mean(axis=1)
        out = []
        for corner in np.ndindex(*([2] * self.u)):
            child = box.copy()
            for k, c in enumerate(corner):
                child[k, 1 - c] = mid[k]
            out.append(child)
        return out


class ParamDisk:
    """A disk plus the adaptive quadrature state used to integrate over it.

    Each leaf box holds a coarse rule and a fine rule (the coarse rule on its
    2^u halves). Refining a box promotes its fine rules to the children's coarse
    rules, so evaluated nodes are never thrown away. Node histories (log volume
    expansion for every depth so far) are cached and extended on demand.

    Nodes live in equal-size sets, one per rule application, stored
    contiguously; a box refers to its sets by index.
    """

    def __init__(self, f, spec: DiskSpec, max_nodes: int = MAX_NODES):
        self.f = f
        self.spec = spec
        self.rule = _Rule(spec.rank)
        self.set_size = len(self.rule.ref_weights)
        self.max_nodes = max_nodes
        self._logw = np.empty(0)
        self._hist = np.empty((0, 1))
        self._x = np.empty((0, f.dimension))
        self._Q = np.empty((0, f.dimension, spec.rank))
        boxes = list(self.rule.initial_boxes())
        coarse = self._add_sets(boxes)
        fine = self._add_sets([c for b in boxes for c in self.rule.split(b)]).reshape(len(boxes), -1)
        self.boxes = list(zip(boxes, coarse, fine))

    @property
    def node_count(self) -> int:
        return len(self._logw)

    @property
    def depth(self) -> int:
        return self._hist.shape[1] - 1

    def weights(self) -> np.ndarray:
        """Weights of the accepted (fine) rule over the unit ball, scaled by radius^u."""
        sets = np.concatenate([fine for _, _, fine in self.boxes])
        idx = (sets[:, None] * self.set_size + np.arange(self.set_size)).ravel()
        return np.exp(self._logw[idx]) * self.spec.radius ** self.spec.rank

    def _add_sets(self, boxes) -> np.ndarray:
        """Evaluate the rule on each box (new nodes pushed to the current depth); returns set ids."""
        pts = [self.rule.nodes(b) for b in boxes]
        s = np.concatenate([p for p, _ in pts])
        if self.node_count + len(s) > self.max_nodes:
            raise _CapReached
        first = self.node_count // self.set_size
        spec = self.spec
        x = spec.origin + spec.radius * s @ spec.frame.T
        Q = np.broadcast_to(spec.frame, (len(s),) + spec.frame.shape)
        hist, xe, Qe = push_volumes(self.f, canonical(x), Q, self.depth)
        self._logw = np.concatenate([self._logw] + [w for _, w in pts])
        self._hist = np.concatenate([self._hist, hist])
        self._x = np.concatenate([self._x, xe])
        self._Q = np.concatenate([self._Q, Qe])
        return np.arange(first, first + len(boxes))

    def extend(self, depth: int):
        """Advance every cached node so histories reach ``depth`` iterates."""
        extra = depth - self.depth
        if extra <= 0:
            return
        hist, self._x, self._Q = push_volumes(self.f, self._x, self._Q, extra)
        self._hist = np.concatenate([self._hist, self._hist[:, -1:] + hist[:, 1:]], axis=1)

    def log_volumes(self, ns, tol: float = 1e-2) -> np.ndarray:
        """log vol(f^n(D)) for each n, refined until the error estimate is below ``tol``.

        The error of a box is |fine - coarse|. For deep iterates the integrand
        oscillates faster than any affordable grid, so box errors behave like
        independent sampling errors; they are therefore combined by root sum of
        squares rather than added.
        """
        ns = np.asarray(ns, dtype=int)
        if np.any(ns < 0):
            raise ValueError("n must be >= 0")
        cols = ns + self.spec.depth
        self.extend(int(cols.max()))
        log_r = self.spec.rank * math.log(self.spec.radius)
        while True:
            terms = (self._logw[:, None] + self._hist[:, cols]).reshape(-1, self.set_size, len(cols))
            set_logs = logsumexp(terms, axis=1)
            coarse = set_logs[np.array([c for _, c, _ in self.boxes])]
            fine = logsumexp(set_logs[np.array([fs for _, _, fs in self.boxes])], axis=1)
            total = logsumexp(fine, axis=0)
            rel = np.abs(np.exp(fine - total) - np.exp(coarse - total))
            err = np.sqrt((rel ** 2).sum(axis=0))
            achieved = float(err.max())
            if achieved <= tol:
                return total + log_r
            score = rel.max(axis=1)
            chosen = score > tol / math.sqrt(len(self.boxes))
            if not chosen.any():
                chosen[np.argmax(score)] = True
            parents = [b for b, pick in zip(self.boxes, chosen) if pick]
            children = [(child, half) for box, _, fs in parents for child, half in zip(self.rule.split(box), fs)]
            try:
                fine_sets = self._add_sets([g for child, _ in children for g in self.rule.split(child)])
            except _CapReached:
                raise RefinementError(f"refinement cap of {self.max_nodes} nodes reached "
                                      f"(achieved relative error {achieved:.3g})",
                                      partial=total + log_r, achieved=achieved) from None
            fine_sets = fine_sets.reshape(len(children), -1)
            self.boxes = [b for b, pick in zip(self.boxes, chosen) if not pick]
            self.boxes += [(child, half, fs) for (child, half), fs in zip(children, fine_sets)]


class _CapReached(Exception):
    pass


def disk_log_volumes(f, disk, ns, tol: float = 1e-2) -> np.ndarray:
    pd = disk if isinstance(disk, ParamDisk) else ParamDisk(f, disk)
    return pd.log_volumes(ns, tol)


def disk_volume(f, disk, n: int, tol: float = 1e-2) -> float:
    """u-volume of f^n(D)."""
    return float(np.exp(disk_log_volumes(f, disk, [n], tol)[0]))


def _flat_disk(f, x, frame, r, family, tilt) -> DiskSpec:
    return DiskSpec(center=x, frame=frame, radius=r, family=family, tilt=tilt)


def make_leaf_disk(f, x, u: int, r: float = 1.0, m_converge: int = 20, n_settle: int = DEFAULT_SETTLE,
                   seed: int = 0, tol: float = 1e-2, check: bool = False) -> ParamDisk:
    """Approximate the radius-r disk of the unstable leaf through x.

    A flat disk tangent to E^u at f^{-m}(x) is pushed m times; contraction of
    cones around E^u makes the image tangent to E^u to high accuracy. Its
    parameter radius is then tuned so that the pushed disk has the u-volume of
    a flat r-ball.
    """
    if not r > 0:
        raise PreconditionError("leaf disk radius must be positive")
    if not f.has_inverse:
        raise PreconditionError("leaf disks need an inverse map")
    if check:
        _require_domination(f, u, seed)
    x = canonical(np.asarray(x, dtype=float))
    finv = f.inverse()
    y = x
    for _ in range(m_converge):
        y = finv(y)
    Qs, res, _ = unstable_frames(f, y[None], u, n_settle, seed)
    if res[0] > UNCONVERGED_ANGLE:
        raise UnconvergedError("E^u unsettled at leaf-disk pre-image", point=y, residual=float(res[0]))
    log_expansion, center, Q_center = cocycle_push(f, y, Qs[0], m_converge)
    eu = unstable_frames(f, center[None], u, n_settle, seed + 1)[0][0]
    tilt = subspace_angle(Q_center, eu)
    target = ball_volume(u, r)
    # exact for linear maps; otherwise one correction from the measured volume
    r0 = r * math.exp(-log_expansion / u)
    for attempt in range(2):
        spec = DiskSpec(center=center, frame=Qs[0], radius=r0, family="leaf", tilt=tilt, origin=y,
                        depth=m_converge)
        pd = ParamDisk(f, spec)
        vol = float(np.exp(pd.log_volumes([0], tol)[0]))
        if attempt or abs(vol / target - 1) < 1e-9:
            break
        r0 *= (target / vol) ** (1 / u)
    return pd


def cone_delta(f, u: int, n_points: int = 1000, seed: int = 0, n_settle: int = DEFAULT_SETTLE) -> float:
    """Half the smallest angle between E^u and E^cs over a random sample."""
    X = np.random.default_rng(seed).random((n_points, f.dimension))
    Eu, Ecs, _, _ = splitting_frames(f, X, u, n_settle, seed + 1)
    cos_min_angle = np.linalg.svd(np.swapaxes(Eu, -1, -2) @ Ecs, compute_uv=False)[:, 0]
    return float(np.arccos(np.clip(cos_min_angle, -1.0, 1.0)).min() / 2)


def make_transverse_disk(f, x, u: int, tilt: float, r: float, rng: np.random.Generator,
                         n_settle: int = DEFAULT_SETTLE) -> ParamDisk:
    """Flat disk at x whose tangent plane makes angle ``tilt`` with E^u, turning toward E^cs."""
    x = canonical(np.asarray(x, dtype=float))
    seed = int(rng.integers(2 ** 31))
    Eu, Ecs, _, base = splitting_frames(f, x[None], u, n_settle, seed)
    Eu, Ecs = Eu[0], Ecs[0]
    c = Ecs @ rng.standard_normal(Ecs.shape[1])
    w = c - Eu @ (Eu.T @ c)
    w /= np.linalg.norm(w)
    frame = Eu.copy()
    frame[:, 0] = math.cos(tilt) * Eu[:, 0] + math.sin(tilt) * w
    return ParamDisk(f, _flat_disk(f, base[0], frame, r, "transverse", tilt))


@dataclass(frozen=True, eq=False)
class DiskFamilySeries:
    family: str
    ns: tuple[int, ...]
    log_volumes: np.ndarray  # (K, len(ns))
    disks: tuple[DiskSpec, ...]
    delta_cone: float | None = None


def disk_family_series(f, family: str, u: int, K_disks: int = 50, n_range=range(5, 26), seed: int = 0,
                       r: float = 1.0, r_min: float = 0.5, m_converge: int = 20, tol: float = 1e-2,
                       delta_cone: float | None = None, check: bool = True) -> DiskFamilySeries:
    """Log volumes of K sampled disks of one family at every n; shared by both sup modes."""
    if K_disks < 1:
        raise PreconditionError("need at least one disk")
    if family not in ("leaf", "transverse"):
        raise ValueError(f"unknown disk family {family!r}")
    ns = sorted(set(int(n) for n in n_range))
    if check:
        _require_domination(f, u, seed)
    rng = np.random.default_rng(seed)
    centers = rng.random((K_disks, f.dimension))
    logs, specs = [], []
    if family == "transverse" and delta_cone is None:
        delta_cone = cone_delta(f, u, seed=seed + 7)
    for k in range(K_disks):
        if family == "leaf":
            pd = make_leaf_disk(f, centers[k], u, r, m_converge, seed=seed + 11 + k, tol=tol)
            if pd.spec.tilt >= LEAF_TILT_MAX:
                raise PreconditionError(f"leaf disk tilt {pd.spec.tilt:.3g} is not below {LEAF_TILT_MAX}")
        else:
            tilt = rng.uniform(0.0, delta_cone)
            radius = rng.uniform(r_min, 1.0)
            pd = make_transverse_disk(f, centers[k], u, tilt, radius, rng)
        logs.append(pd.log_volumes(ns, tol))
        specs.append(pd.spec)
    return DiskFamilySeries(family, tuple(ns), np.array(logs), tuple(specs), delta_cone)


def family_estimate(data: DiskFamilySeries, mode: str, window=None) -> GrowthEstimate:
    win = _window_for(data.ns, window)
    details = {"disks": len(data.disks)}
    if data.delta_cone is not None:
        details["delta_cone"] = data.delta_cone
    if mode == "per-disk":
        fits = [fit_rate(zip(data.ns, row), win) for row in data.log_volumes]
        best = int(np.argmax([rate for rate, _ in fits]))
        rate, res = fits[best]
        series = tuple(zip(data.ns, data.log_volumes[best].tolist()))
        details["per_disk_rates"] = [rate for rate, _ in fits]
    elif mode == "per-n-sup":
        series = tuple(zip(data.ns, data.log_volumes.max(axis=0).tolist()))
        rate, res = fit_rate(series, win)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return GrowthEstimate(f"{data.family}/{mode}", series, rate, res, win, lower_bound=True, details=details)


def growth_rate_family(f, family: str, mode: str, K_disks: int = 50, n_range=range(5, 26), seed: int = 0,
                       u: int | None = None, window=None, **kwargs) -> GrowthEstimate:
    if mode not in ("per-disk", "per-n-sup"):
        raise ValueError(f"unknown mode {mode!r}")
    u = _unstable_rank(f) if u is None else u
    data = disk_family_series(f, family, u, K_disks, n_range, seed, **kwargs)
    return family_estimate(data, mode, window)


def _unstable_rank(f) -> int:
    moduli = np.abs(np.linalg.eigvals(np.asarray(f.linear_part, dtype=float)))
    return int((moduli > 1 + 1e-9).sum())


@dataclass(frozen=True)
class BoundaryRatio:
    series: tuple[tuple[int, float], ...]  # (n, perimeter / area), not logged
    decay_exponent: float  # minus the fitted slope of log ratio
    residual: float
    window: tuple[int, int]


def _log_boundary_lengths(f, spec: DiskSpec, cols: np.ndarray, tol: float, max_nodes: int = 1 << 16):
    """log length of f^k of the boundary circle for each depth in ``cols``, via periodic trapezoid."""
    prev = None
    M = 64
    while True:
        phi = 2 * math.pi * np.arange(M) / M
        s = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        tangent = spec.radius * np.stack([-np.sin(phi), np.cos(phi)], axis=-1) @ spec.frame.T
        x = canonical(spec.origin + spec.radius * s @ spec.frame.T)
        norm0 = np.linalg.norm(tangent, axis=-1)
        hist, _, _ = push_volumes(f, x, (tangent / norm0[:, None])[:, :, None], int(cols.max()))
        logs = logsumexp(np.log(norm0)[:, None] + hist[:, cols], axis=0) + math.log(2 * math.pi / M)
        if prev is not None and np.abs(np.expm1(logs - prev)).max() <= tol:
            return logs
        if 2 * M > max_nodes:
            raise RefinementError("boundary quadrature did not converge", partial=logs,
                                  achieved=float(np.abs(np.expm1(logs - prev)).max()))
        prev, M = logs, 2 * M


def boundary_ratio(f, disk, n_range=range(5, 21), tol: float = 1e-3, window=None) -> BoundaryRatio:
    """Perimeter of f^n(boundary D) over area of f^n(D), and its exponential decay rate."""
    pd = disk if isinstance(disk, ParamDisk) else ParamDisk(f, disk)
    if pd.spec.rank < 2:
        raise PreconditionError("boundary ratio needs u >= 2: for u = 1 the boundary is two points")
    if pd.spec.rank > 2:
        raise PreconditionError("boundary ratio is implemented for u = 2 disks")
    ns = sorted(set(int(n) for n in n_range))
    win = _window_for(ns, window if window is not None else (min(ns), max(ns)))
    area = pd.log_volumes(ns, tol)
    cols = np.asarray(ns) + pd.spec.depth
    perim = _log_boundary_lengths(f, pd.spec, cols, tol)
    log_ratio = perim - area
    slope, res = fit_rate(zip(ns, log_ratio.tolist()), win)
    return BoundaryRatio(tuple(zip(ns, np.exp(log_ratio).tolist())), -slope, res, win)

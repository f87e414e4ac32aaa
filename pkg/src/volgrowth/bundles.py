"""Dominated splitting E^cs + E^u along orbits and Lyapunov exponents.

E^u is found by pushing a random u-frame forward along the derivative cocycle
from a point far in the past. E^cs is the orthogonal complement of the
dominant u-plane of the transposed cocycle run backwards from a point far in
the future: if v is in E^cs(x) and w is orthogonal to E^cs(f(x)), then
Df(x)^T w is orthogonal to E^cs(x). This route needs no inverse map, and E^cs
is attracting for it, so errors shrink instead of blowing up.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .multilinear import (DegeneracyError, Subspace, batched_qr, batched_subspace_angle,
                          orthogonal_complement)
from ._kernels import lyapunov_orbit
from .system import TorusMap, canonical

UNCONVERGED_ANGLE = 1e-6
DEFAULT_SETTLE = 60


class UnconvergedError(RuntimeError):
    """A splitting estimate did not settle; ``point`` names the offending base point."""

    def __init__(self, message: str, point=None, residual: float | None = None):
        super().__init__(message)
        self.point = point
        self.residual = residual


@dataclass(frozen=True, eq=False)
class FrameEstimate:
    """A bundle estimate at one base point.

    ``residual`` is the angle between the estimates obtained with ``settle_steps``
    and ``settle_steps - 1`` steps from the same seed frame.
    """

    subspace: Subspace
    base_point: np.ndarray
    settle_steps: int
    residual: float

    @property
    def converged(self) -> bool:
        return self.residual <= UNCONVERGED_ANGLE


@dataclass(frozen=True, eq=False)
class SplittingEstimate:
    base_point: np.ndarray
    unstable: Subspace
    center_stable: Subspace
    settle_steps: int
    residual: float

    @property
    def converged(self) -> bool:
        return self.residual <= UNCONVERGED_ANGLE


@dataclass(frozen=True, eq=False)
class LyapunovSpectrum:
    exponents: np.ndarray  # ascending, with multiplicity
    n: int
    base_point: np.ndarray
    log_det_average: float  # (1/n) sum log|det Df| over the same window

    def __iter__(self):
        return iter(self.exponents)


@dataclass(frozen=True)
class Domination:
    dominated: bool
    margin: float  # min over the sample of conorm(Df|E^u) / norm(Df|E^cs)
    literal_margin: float  # min of norm(Df|E^u) / conorm(Df|E^cs): the weaker displayed form
    converged: bool
    worst_point: tuple[float, ...]


def _random_frames(rng: np.random.Generator, n: int, d: int, k: int) -> np.ndarray:
    Q, _ = batched_qr(rng.standard_normal((n, d, k)))
    return Q


def _as_batch(x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    return (x[None, :], True) if x.ndim == 1 else (x, False)


def _check_rank(f, u: int):
    d = f.dimension
    if not 1 <= u < d:
        raise ValueError(f"need 1 <= u < d, got u={u}, d={d}")


def unstable_frames(f, X, u: int, n_settle: int = DEFAULT_SETTLE, seed: int = 0):
    """E^u frames at a batch of points.

    Returns ``(frames, residuals, base_points)`` with shapes ``(N, d, u)``,
    ``(N,)``, ``(N, d)``. With an inverse available the frames sit at ``X``;
    otherwise a seed frame is pushed forward from ``X`` and the frames sit at
    ``f^n_settle(X)``, which is returned as the base point.
    """
    _check_rank(f, u)
    if n_settle < 1:
        raise ValueError("n_settle must be >= 1")
    X = canonical(np.asarray(X, dtype=float))
    N, d = X.shape
    seed_frame = _random_frames(np.random.default_rng(seed), N, d, u)
    if f.has_inverse:
        finv = f.inverse()
        path = [X]
        for _ in range(n_settle):
            path.append(finv(path[-1]))
        path.reverse()  # path[0] = f^{-n} X, path[-1] = X
        base = X
    else:
        path = [X]
        for _ in range(n_settle):
            path.append(f(path[-1]))
        base = path[-1]
    Q, lag = seed_frame, None
    for k in range(n_settle):
        if k == 1:
            lag = seed_frame
        J = f.jacobian(path[k])
        Q, _ = batched_qr(J @ Q)
        if lag is not None:
            lag, _ = batched_qr(J @ lag)
    residual = batched_subspace_angle(Q, lag) if lag is not None else np.full(N, np.pi / 2)
    return Q, residual, base


def _adjoint_dominant(f, path: list[np.ndarray], u: int, rng: np.random.Generator, keep: int | None = None):
    """Run the transposed cocycle backwards along ``path``.

    Returns the u-frames at ``path[0]`` (plus a lagged copy for the residual), or
    the list of frames at ``path[0..keep]`` when ``keep`` is given.
    """
    N, d = path[0].shape
    seed_frame = _random_frames(rng, N, d, u)
    W, lag = seed_frame, None
    n = len(path) - 1
    stored = [None] * (keep + 1) if keep is not None else None
    for k in range(n - 1, -1, -1):
        if k == n - 2:
            lag = seed_frame
        JT = np.swapaxes(f.jacobian(path[k]), -1, -2)
        W, _ = batched_qr(JT @ W)
        if lag is not None:
            lag, _ = batched_qr(JT @ lag)
        if stored is not None and k <= keep:
            stored[k] = W
    residual = batched_subspace_angle(W, lag) if lag is not None else np.full(N, np.pi / 2)
    return W, residual, stored


def cs_frames(f, X, u: int, n_settle: int = DEFAULT_SETTLE, seed: int = 0):
    """E^cs frames ``(N, d, d-u)`` at ``X`` plus residual angles."""
    _check_rank(f, u)
    if n_settle < 2:
        raise ValueError("n_settle must be >= 2")
    X = canonical(np.asarray(X, dtype=float))
    path = [X]
    for _ in range(n_settle):
        path.append(f(path[-1]))
    W, residual, _ = _adjoint_dominant(f, path, u, np.random.default_rng(seed))
    return orthogonal_complement(W), residual


def estimate_unstable(f, x, u: int, n_settle: int = DEFAULT_SETTLE, seed: int = 0) -> FrameEstimate:
    X, _ = _as_batch(x)
    Q, res, base = unstable_frames(f, X[:1], u, n_settle, seed)
    return FrameEstimate(Subspace(Q[0]), base[0], n_settle, float(res[0]))


def estimate_cs(f, x, u: int, n_settle: int = DEFAULT_SETTLE, seed: int = 0) -> FrameEstimate:
    X, _ = _as_batch(x)
    C, res = cs_frames(f, X[:1], u, n_settle, seed)
    return FrameEstimate(Subspace(C[0]), canonical(X[0]), n_settle, float(res[0]))


def estimate_splitting(f, x, u: int, n_settle: int = DEFAULT_SETTLE, seed: int = 0) -> SplittingEstimate:
    eu = estimate_unstable(f, x, u, n_settle, seed)
    ecs = estimate_cs(f, eu.base_point, u, n_settle, seed + 1)
    return SplittingEstimate(eu.base_point, eu.subspace, ecs.subspace, n_settle, max(eu.residual, ecs.residual))


def splitting_frames(f, X, u: int, n_settle: int = DEFAULT_SETTLE, seed: int = 0):
    """Batched splitting: ``(Eu, Ecs, residual, base)``."""
    Eu, res_u, base = unstable_frames(f, X, u, n_settle, seed)
    Ecs, res_cs = cs_frames(f, base, u, n_settle, seed + 1)
    return Eu, Ecs, np.maximum(res_u, res_cs), base


def check_domination(f, sample, u: int, n_settle: int = DEFAULT_SETTLE, seed: int = 0) -> Domination:
    """Pointwise gap test: weakest expansion on E^u against strongest on E^cs.

    A margin at or below one is a failure whatever the state of the splitting
    estimates. A margin above one only counts when every estimate converged;
    otherwise :class:`UnconvergedError` names the first unsettled point.
    """
    X, _ = _as_batch(sample)
    Eu, Ecs, residual, base = splitting_frames(f, X, u, n_settle, seed)
    J = f.jacobian(base)
    su = np.linalg.svd(J @ Eu, compute_uv=False)
    scs = np.linalg.svd(J @ Ecs, compute_uv=False)
    ratio = su[:, -1] / scs[:, 0]
    literal = su[:, 0] / scs[:, -1]
    worst = int(np.argmin(ratio))
    margin = float(ratio[worst])
    converged = bool(np.all(residual <= UNCONVERGED_ANGLE))
    if margin > 1.0 and not converged:
        bad = int(np.argmax(residual > UNCONVERGED_ANGLE))
        raise UnconvergedError(f"splitting did not settle at point {base[bad].tolist()}",
                               point=base[bad], residual=float(residual[bad]))
    return Domination(margin > 1.0, margin, float(literal.min()), converged, tuple(base[worst].tolist()))


def _renorm_block(A: np.ndarray, max_cond: float = 1e8, cap: int = 64) -> int:
    """Longest power of A whose condition number stays below ``max_cond``."""
    P = np.eye(A.shape[0])
    for m in range(1, cap + 1):
        P = A @ P
        if not np.all(np.isfinite(P)) or np.linalg.cond(P) > max_cond:
            return max(m - 1, 1)
    return cap


def lyapunov_spectrum(f, x, n: int, n_settle: int = 50, seed: int = 0,
                      renorm_every: int | None = None) -> LyapunovSpectrum:
    """QR (Benettin) estimate of all Lyapunov exponents along the orbit of ``x``.

    The first ``n_settle`` steps only align the frame; exponents are averages
    of log R_ii over the next ``n`` steps. For constant cocycles the QR step is
    taken once per block of ``renorm_every`` iterates (a matrix power with
    bounded condition number), which gives the same R factors in far fewer
    factorizations.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    x0 = canonical(np.asarray(x, dtype=float))
    d = f.dimension
    rng = np.random.default_rng(seed)
    Q, _ = batched_qr(rng.standard_normal((d, d)))
    sums = np.zeros(d)
    logdet = 0.0
    if f.is_linear:
        A = np.asarray(f.linear_part, dtype=float)
        m = renorm_every or _renorm_block(A)
        Am = np.linalg.matrix_power(A, m)
        for _ in range(max(n_settle // m, 1)):
            Q, _ = batched_qr(Am @ Q)
        blocks, rest = divmod(n, m)
        # signs of R do not matter for log|R_ii|, so the raw factorization is enough here
        for _ in range(blocks):
            Q, R = np.linalg.qr(Am @ Q)
            sums += np.log(np.abs(R.diagonal()))
        if rest:
            Q, R = np.linalg.qr(np.linalg.matrix_power(A, rest) @ Q)
            sums += np.log(np.abs(R.diagonal()))
        logdet = float(np.log(abs(np.linalg.det(A))))
    elif isinstance(f, TorusMap) and not f.inverted and renorm_every is None:
        sums, logdet = lyapunov_orbit(f._A, f._K2pi, f._phase, f._amp_T, f._outer, x0, Q, n_settle, n)
        return LyapunovSpectrum(np.sort(sums), n, x0, float(logdet))
    else:
        m = renorm_every or 1
        xi = x0
        for _ in range(n_settle):
            Q, _ = batched_qr(f.jacobian(xi) @ Q)
            xi = f(xi)
        P = np.eye(d)
        ldet = 0.0
        for i in range(n):
            J = f.jacobian(xi)
            ldet += np.log(abs(np.linalg.det(J)))
            P = J @ P
            xi = f(xi)
            if (i + 1) % m == 0 or i == n - 1:
                Q, R = np.linalg.qr(P @ Q)
                sums += np.log(np.abs(R.diagonal()))
                P = np.eye(d)
        logdet = ldet / n
    return LyapunovSpectrum(np.sort(sums / n), n, x0, logdet)


def cs_frames_along_orbit(f, X, u: int, n: int, n_settle: int = DEFAULT_SETTLE, seed: int = 0):
    """E^cs frames at ``f^k(X)`` for k = 0..n, each from at least ``n_settle`` steps of lookahead.

    Returns ``(path, frames, residual)``: ``path[k]`` and ``frames[k]`` are
    ``(N, d)`` and ``(N, d, d-u)``; ``residual`` refers to k = 0.
    """
    X = canonical(np.asarray(X, dtype=float))
    path = [X]
    for _ in range(n + n_settle):
        path.append(f(path[-1]))
    _, residual, stored = _adjoint_dominant(f, path, u, np.random.default_rng(seed), keep=n)
    return path[:n + 1], [orthogonal_complement(W) for W in stored], residual


def cs_top_exponents(f, X, n: int, u: int, n_settle: int = DEFAULT_SETTLE, seed: int = 0):
    """Per-point finite-time rate (1/n) log ||Df^n restricted to E^cs||.

    The n-step restriction is the product of the one-step maps between the
    E^cs frames along the orbit (each frame re-estimated from the future, so
    the repelling direction never contaminates it). The running product is
    renormalized every step and its scale kept in log space.
    """
    _check_rank(f, u)
    if n < 1:
        raise ValueError("n must be >= 1")
    X, _ = _as_batch(X)
    path, frames, residual = cs_frames_along_orbit(f, X, u, n, n_settle, seed)
    N = X.shape[0]
    c = f.dimension - u
    P = np.broadcast_to(np.eye(c), (N, c, c)).copy()
    logscale = np.zeros(N)
    for k in range(n):
        M = np.swapaxes(frames[k + 1], -1, -2) @ f.jacobian(path[k]) @ frames[k]
        P = M @ P
        s = np.linalg.norm(P, axis=(-2, -1))
        if np.any(s == 0) or not np.all(np.isfinite(s)):
            raise DegeneracyError("center-stable cocycle degenerated")
        P /= s[:, None, None]
        logscale += np.log(s)
    top = np.linalg.svd(P, compute_uv=False)[:, 0]
    return (logscale + np.log(top)) / n, residual


def cs_top_exponent(f, x, n: int, u: int, n_settle: int = DEFAULT_SETTLE, seed: int = 0) -> float:
    rates, residual = cs_top_exponents(f, np.asarray(x, dtype=float)[None, :], n, u, n_settle, seed)
    if residual[0] > UNCONVERGED_ANGLE:
        raise UnconvergedError("center-stable bundle did not settle", point=np.asarray(x), residual=float(residual[0]))
    return float(rates[0])

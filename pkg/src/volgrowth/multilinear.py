"""Small dense linear algebra: QR with a sign convention, exterior powers,
restricted norms and Grassmannian operations.

Batched helpers (``batched_*``) take stacks with leading axes and are what the
estimators use in their inner loops.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .system import integer_det

RANK_TOL = 1e-13
ORTHO_TOL = 1e-10


class DegeneracyError(ArithmeticError):
    """A frame lost rank (for example a disk tangent plane collapsed)."""


class ConvergenceError(ArithmeticError):
    def __init__(self, message: str, best: float | None = None):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True, eq=False)
class Subspace:
    """A k-plane in R^d stored as an orthonormal d x k frame."""

    frame: np.ndarray

    def __post_init__(self):
        Q = np.asarray(self.frame, dtype=float)
        if Q.ndim == 1:
            Q = Q[:, None]
        object.__setattr__(self, "frame", Q)
        err = np.abs(Q.T @ Q - np.eye(Q.shape[1])).max() if Q.size else 0.0
        if err > ORTHO_TOL:
            raise ValueError(f"frame is not orthonormal (error {err:.2e})")

    @classmethod
    def span(cls, *vectors) -> "Subspace":
        M = np.column_stack([np.asarray(v, dtype=float) for v in vectors])
        Q, _ = qr(M)
        return cls(Q)

    @property
    def ambient(self) -> int:
        return self.frame.shape[0]

    @property
    def rank(self) -> int:
        return self.frame.shape[1]

    def complement(self) -> "Subspace":
        return Subspace(orthogonal_complement(self.frame))


def _frame(F) -> np.ndarray:
    return F.frame if isinstance(F, Subspace) else np.asarray(F, dtype=float)


def qr(M) -> tuple[np.ndarray, np.ndarray]:
    """Reduced QR with strictly positive diagonal in R.

    Raises DegeneracyError when M is numerically rank deficient.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[-1] <= RANK_TOL * s[0]:
        raise DegeneracyError(f"rank-deficient frame (singular values {s})")
    Q, R = np.linalg.qr(M)
    sign = np.where(np.diag(R) < 0, -1.0, 1.0)
    return Q * sign, R * sign[:, None]


def batched_qr(M: np.ndarray, check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """QR of a stack ``(..., d, k)`` with positive diagonal.

    The rank check compares the extreme |R_ii| only, which is cheap and enough to
    catch collapsing frames inside cocycle loops.
    """
    Q, R = np.linalg.qr(M)
    diag = np.diagonal(R, axis1=-2, axis2=-1)
    sign = np.where(diag < 0, -1.0, 1.0)
    Q = Q * sign[..., None, :]
    R = R * sign[..., :, None]
    if check:
        ad = np.abs(diag)
        if np.any(ad.min(axis=-1) <= RANK_TOL * ad.max(axis=-1)) or not np.all(np.isfinite(ad)):
            raise DegeneracyError("frame collapsed during cocycle propagation")
    return Q, R


def orthogonal_complement(Q: np.ndarray) -> np.ndarray:
    """Orthonormal frame(s) of the complement of span(Q); works on stacks."""
    d, k = Q.shape[-2], Q.shape[-1]
    full, _ = np.linalg.qr(Q, mode="complete")
    return full[..., :, k:d]


def exterior_power(A, k: int) -> "ExteriorMatrix":
    """Matrix of k x k minors of A, rows and columns in lexicographic k-subset order.

    Integer input gives exact integer minors.
    """
    arr = np.asarray(A)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("exterior_power needs a square matrix")
    d = arr.shape[0]
    if not 1 <= k <= d:
        raise ValueError(f"degree {k} out of range 1..{d}")
    subsets = list(itertools.combinations(range(d), k))
    exact = arr.dtype.kind in "iu" or arr.dtype == object
    if exact:
        ints = np.array(arr, dtype=object)
        entries = np.array([[integer_det(ints[np.ix_(S, T)]) for T in subsets] for S in subsets], dtype=object)
        if all(abs(int(v)) < 2 ** 62 for v in entries.flat):
            entries = entries.astype(np.int64)
    else:
        af = arr.astype(float)
        rows = np.array(subsets)
        sub = af[rows[:, None, :, None], rows[None, :, None, :]]
        # exactly singular minors make LAPACK's LU divide by zero on the way to det = 0
        with np.errstate(divide="ignore"):
            entries = np.linalg.det(sub)
    return ExteriorMatrix(d, k, tuple(subsets), entries)


@dataclass(frozen=True, eq=False)
class ExteriorMatrix:
    source_dimension: int
    degree: int
    subsets: tuple[tuple[int, ...], ...]
    entries: np.ndarray

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    @property
    def size(self) -> int:
        return len(self.subsets)


def restricted_expansion(A, F) -> float:
    """Operator norm of A restricted to the subspace F."""
    return float(np.linalg.norm(np.asarray(A, dtype=float) @ _frame(F), ord=2))


def conorm(A, F) -> float:
    """Minimal expansion of A on F (smallest singular value of A Q_F)."""
    return float(np.linalg.svd(np.asarray(A, dtype=float) @ _frame(F), compute_uv=False)[-1])


def volume_expansion(A, F) -> float:
    """Factor by which A scales u-dimensional volume on F: sqrt det of the image Gram matrix."""
    image = np.asarray(A, dtype=float) @ _frame(F)
    s = np.linalg.svd(image, compute_uv=False)
    if s[-1] <= RANK_TOL * max(s[0], 1.0):
        raise DegeneracyError("image of the subspace is degenerate")
    return float(np.prod(s))


def push_subspace(A, F) -> Subspace:
    image = np.asarray(A, dtype=float) @ _frame(F)
    Q, R = qr(image)
    # Householder leaves an absolute error of order eps in every entry of Q; taking
    # image @ R^-1 keeps tiny components relatively accurate, unless R is so badly
    # conditioned that the result drifts from orthonormal.
    Q2 = solve_triangular(R, image.T, trans="T", lower=False).T
    if np.abs(Q2.T @ Q2 - np.eye(Q2.shape[1])).max() <= 1e-13:
        Q = Q2
    return Subspace(Q)


def principal_angles(F, G) -> np.ndarray:
    """Principal angles between span F and span G, ascending."""
    s = np.linalg.svd(_frame(F).T @ _frame(G), compute_uv=False)
    return np.sort(np.arccos(np.clip(s, -1.0, 1.0)))


def subspace_angle(F, G) -> float:
    """Largest principal angle between equal-rank subspaces, in [0, pi/2]."""
    QF, QG = _frame(F), _frame(G)
    if QF.shape[1] != QG.shape[1]:
        raise ValueError(f"rank mismatch: {QF.shape[1]} vs {QG.shape[1]}")
    s = np.linalg.svd(QF.T @ QG, compute_uv=False)
    smin = min(float(s.min()), 1.0)
    # arccos is ill-conditioned near 1; recover small angles from the sine instead
    if smin > 0.9:
        resid = QG - QF @ (QF.T @ QG)
        return float(np.arcsin(min(np.linalg.norm(resid, ord=2), 1.0)))
    return float(np.arccos(max(smin, 0.0)))


def batched_subspace_angle(QF: np.ndarray, QG: np.ndarray) -> np.ndarray:
    """Largest principal angle for stacks of equal-rank frames."""
    resid = QG - QF @ (np.swapaxes(QF, -1, -2) @ QG)
    s = np.linalg.svd(resid, compute_uv=False)[..., 0]
    return np.arcsin(np.clip(s, 0.0, 1.0))


def spectral_radius(A, tol: float = 1e-12, max_iter: int = 20000, seed: int = 0) -> float:
    """Largest eigenvalue modulus via block power iteration.

    Starts with a single vector (power iteration with a Rayleigh quotient). When
    the residual stalls, for example because the dominant eigenvalues form a
    complex pair or a Jordan block, the block is widened; Ritz values of the
    small projected matrix then resolve the dominant cluster. A block as wide as
    the matrix is exact.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("spectral_radius needs a square matrix")
    n = A.shape[0]
    if n == 0:
        return 0.0
    scale = np.abs(A).max()
    if scale == 0.0:
        return 0.0
    A = A / scale
    rng = np.random.default_rng(seed)
    p = 1
    iters = 0
    best = None
    while True:
        Q, _ = np.linalg.qr(rng.standard_normal((n, p)))
        budget = 200 + 40 * n
        rho_prev = None
        stable = 0
        for _ in range(budget):
            iters += 1
            Z = A @ Q
            if not np.any(Z):
                return 0.0
            H = Q.T @ Z
            ritz = np.linalg.eigvals(H) if p > 1 else H.ravel()
            rho = float(np.abs(ritz).max())
            best = rho
            resid = np.linalg.norm(Z - Q @ H) / max(np.linalg.norm(H), 1e-300)
            if p == n:
                return rho * scale
            if rho_prev is not None and abs(rho - rho_prev) <= tol * max(rho, 1e-300) and resid < 1e-10:
                stable += 1
                if stable >= 3:
                    return rho * scale
            else:
                stable = 0
            rho_prev = rho
            Qn, R = np.linalg.qr(Z)
            if np.abs(np.diag(R)).min() <= 1e-14 * np.abs(np.diag(R)).max():
                # invariant subspace of lower dimension reached: refresh the missing columns
                Qn, _ = np.linalg.qr(Z + 1e-8 * rng.standard_normal(Z.shape))
            Q = Qn
            if iters >= max_iter:
                raise ConvergenceError("spectral radius did not converge", best=None if best is None
                                       else best * scale)
        p = min(n, 2 * p)

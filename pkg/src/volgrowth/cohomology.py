"""Action of a toral automorphism on real cohomology.

H^u(T^d, R) is the u-th exterior power of H^1 = R^d, and x -> A x acts on it by
the u x u minors of A^T. Transposing does not change the spectrum, so the log
spectral radius is the same under either convention.

Eigenvalue moduli of integer matrices are computed from the exact
characteristic polynomial, split into square-free factors first. Unimodular
matrices very often have repeated eigenvalues on the unit circle (Jordan
blocks), where floating-point eigensolvers and power iteration lose half or
more of their digits; roots of square-free factors are simple and stay accurate.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .multilinear import exterior_power
from .system import InvalidSystemError, _integer_matrix, integer_det

MODULUS_TOL = 1e-9
CROSS_CHECK_TOL = 1e-8


def charpoly(M) -> list[int]:
    """Exact characteristic polynomial det(tI - M) of an integer matrix, leading coefficient first.

    Faddeev-LeVerrier recursion; every division is exact over the integers.
    """
    M = np.array(_integer_matrix(M), dtype=object)
    n = M.shape[0]
    coeffs = [1]
    K = np.zeros((n, n), dtype=object)
    identity = np.eye(n, dtype=int).astype(object)
    for k in range(1, n + 1):
        K = M.dot(K) + coeffs[-1] * identity
        coeffs.append(-int(np.trace(M.dot(K))) // k)
    return coeffs


def _trim(p):
    i = 0
    while i < len(p) - 1 and p[i] == 0:
        i += 1
    return p[i:]


def _divmod(p, q):
    p = [Fraction(c) for c in p]
    q = [Fraction(c) for c in _trim(q)]
    out = []
    while len(p) >= len(q):
        c = p[0] / q[0]
        out.append(c)
        p = [a - c * b for a, b in zip(p, q + [0] * (len(p) - len(q)))][1:]
    return out or [Fraction(0)], _trim(p or [Fraction(0)])


def _monic(p):
    p = _trim(p)
    return [Fraction(c) / p[0] for c in p]


def _gcd(p, q):
    p, q = _monic(p), _trim(q)
    while any(q):
        p, q = q, _divmod(p, q)[1]
    return _monic(p)


def _derivative(p):
    n = len(p) - 1
    return [c * (n - i) for i, c in enumerate(p[:-1])] or [0]


def squarefree_factors(p) -> list[tuple[list[Fraction], int]]:
    """Yun's algorithm: p = prod q_i^i with each q_i square-free; returns (q_i, i) for non-constant q_i."""
    p = _monic(p)
    out = []
    a = _gcd(p, _derivative(p))
    b = _divmod(p, a)[0]
    c = _divmod(_derivative(p), a)[0]
    i = 1
    while len(b) > 1:
        d = [x - y for x, y in zip(c, [0] * (len(c) - len(_derivative(b))) + _derivative(b))]
        a = _gcd(b, d)
        if len(a) > 1:
            out.append((a, i))
        b = _divmod(b, a)[0]
        c = _divmod(d, a)[0]
        i += 1
    return out


def integer_eigen_moduli(M) -> np.ndarray:
    """|eigenvalues| of an integer matrix with multiplicity, descending."""
    moduli = []
    for q, mult in squarefree_factors(charpoly(M)):
        roots = np.roots([float(c) for c in q]) if len(q) > 1 else []
        moduli.extend(np.repeat(np.abs(roots), mult))
    return np.sort(np.array(moduli, dtype=float))[::-1]


@dataclass(frozen=True, eq=False)
class CohomologyAction:
    matrix: np.ndarray  # the integer matrix A
    degree: int
    action: np.ndarray  # exact minors of A^T, C(d,u) x C(d,u)
    log_spec: float

    def as_dict(self) -> dict:
        return {"matrix": self.matrix.tolist(), "degree": self.degree,
                "action": np.asarray(self.action).tolist(), "log_spec": self.log_spec}


@dataclass(frozen=True)
class SpectralSplit:
    unstable: int
    center: int
    stable: int


def _unimodular(A) -> np.ndarray:
    A = _integer_matrix(A)
    det = integer_det(A)
    if abs(det) != 1:
        raise InvalidSystemError("det_not_unit", f"|det A| = {abs(det)}; need a unimodular matrix", det=det)
    return A


def induced_action(A, u: int) -> CohomologyAction:
    A = _unimodular(A)
    d = A.shape[0]
    if not 1 <= u <= d:
        raise ValueError(f"degree u={u} outside 1..{d}")
    action = np.asarray(exterior_power(A.T, u))
    rho = integer_eigen_moduli(action)[0]
    return CohomologyAction(A, u, action, math.log(rho))


def log_moduli(A) -> np.ndarray:
    """log |eigenvalue| of an integer matrix with multiplicity, descending."""
    return np.log(integer_eigen_moduli(A))


def spectral_split(A) -> SpectralSplit:
    """Counts of eigenvalue moduli above, at (within 1e-9) and below one."""
    moduli = integer_eigen_moduli(_unimodular(A))
    up = int((moduli > 1 + MODULUS_TOL).sum())
    down = int((moduli < 1 - MODULUS_TOL).sum())
    return SpectralSplit(up, len(moduli) - up - down, down)


def unstable_dimension(A) -> int:
    return spectral_split(A).unstable


def theorem2_rhs(A, u: int | None = None) -> float:
    """log spectral radius of the action on H^u; the common value of the volume growth rates.

    Cross-checked against the sum of the u largest log eigenvalue moduli.
    """
    split = spectral_split(A)
    if u is None:
        u = split.unstable
    elif u != split.unstable:
        warnings.warn(f"u={u} differs from the unstable dimension {split.unstable}", stacklevel=2)
    value = induced_action(A, u).log_spec
    direct = float(log_moduli(A)[:u].sum())
    if abs(value - direct) > CROSS_CHECK_TOL * max(1.0, abs(direct)):
        raise ArithmeticError(f"spectral radius {value} disagrees with eigenvalue sum {direct}")
    return value


def form_certificate(A, u: int | None = None) -> dict:
    """Whether a constant u-form dual to the unstable eigenplane is dominant.

    That holds when the u-th largest modulus strictly exceeds the (u+1)-th, so
    that the product of the top u moduli beats every other u-fold product.
    """
    A = _unimodular(A)
    logs = log_moduli(A)
    u = spectral_split(A).unstable if u is None else u
    if not 1 <= u < len(logs):
        return {"degree": u, "holds": False, "gap": None, "reason": "no proper unstable subspace"}
    gap = float(logs[u - 1] - logs[u])
    return {"degree": u, "holds": gap > MODULUS_TOL, "gap": gap}

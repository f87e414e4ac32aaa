"""Toral maps: linear automorphisms of T^d and trigonometric perturbations of them.

Points are numpy arrays whose last axis has length ``d``; every routine here
broadcasts over leading axes, so a batch of samples is just an ``(N, d)`` array.
Canonical coordinates live in ``[0, 1)``. A "lift" is the unreduced image in
``R^d``, used when lengths inside one disk must not wrap.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DEFAULT_BUDGET = 0.5
NEWTON_TOL = 1e-12
NEWTON_MAX_STEPS = 50


class InvalidSystemError(ValueError):
    """A system definition that does not describe a diffeomorphism of T^d.

    ``code`` is a short machine-readable tag, ``details`` carries the offending
    numbers (for instance the computed C^1 bound when a budget is exceeded).
    """

    def __init__(self, code: str, message: str, **details):
        super().__init__(message)
        self.code = code
        self.details = details

    def as_dict(self) -> dict:
        return {"error": self.code, "message": str(self), **self.details}


@dataclass(frozen=True)
class Mode:
    """One term ``amplitude * sin(2*pi*<k, x> + phase)`` added to coordinate ``target``."""

    amplitude: float
    target: int
    k: tuple[int, ...]
    phase: float = 0.0

    def c1_bound(self) -> float:
        return abs(self.amplitude) * 2.0 * math.pi * math.sqrt(sum(int(q) ** 2 for q in self.k))


def _integer_matrix(A) -> np.ndarray:
    arr = np.asarray(A)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise InvalidSystemError("not_square", f"matrix must be square, got shape {arr.shape}")
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or not np.array_equal(arr, np.round(arr)):
            raise InvalidSystemError("non_integer", "matrix entries must be integers")
    elif arr.dtype.kind not in "iu":
        try:
            arr = np.array(arr, dtype=float)
        except (TypeError, ValueError):
            raise InvalidSystemError("non_integer", "matrix entries must be integers") from None
        return _integer_matrix(arr)
    return np.array(np.round(arr), dtype=np.int64)


def integer_det(A) -> int:
    """Exact determinant of an integer matrix (fraction-free Bareiss elimination)."""
    M = [[int(v) for v in row] for row in np.asarray(A).tolist()]
    n = len(M)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k] != 0), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def integer_inverse(A) -> np.ndarray:
    """Inverse of a unimodular integer matrix, exact (adjugate over the integers)."""
    A = _integer_matrix(A)
    n = A.shape[0]
    det = integer_det(A)
    if abs(det) != 1:
        raise InvalidSystemError("det_not_unit", f"|det A| = {abs(det)}, expected 1", det=det)
    if n == 1:
        return np.array([[det]], dtype=np.int64)
    adj = np.empty((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(A, i, axis=0), j, axis=1)
            adj[j, i] = (-1) ** (i + j) * integer_det(minor)
    return adj * det


@dataclass(frozen=True, eq=False)
class TorusMap:
    """A diffeomorphism ``x -> A x + sum(mode terms) mod 1`` of the torus T^d.

    Instances are immutable. Build them with :func:`make_linear_toral` or
    :func:`make_perturbed_toral`; ``inverted=True`` marks the inverse map of the
    stored forward data (see :meth:`inverse`).
    """

    matrix: np.ndarray
    modes: tuple[Mode, ...] = ()
    budget: float = DEFAULT_BUDGET
    newton_inverse: bool = True
    inverted: bool = False
    _inv_matrix: np.ndarray = field(default=None, repr=False)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def kind(self) -> str:
        return "perturbed-linear" if self.modes else "linear"

    @property
    def is_linear(self) -> bool:
        return not self.modes

    @property
    def has_inverse(self) -> bool:
        return self.is_linear or self.newton_inverse

    @property
    def c1_bound(self) -> float:
        """Upper bound on the C^1 distance to the linear part."""
        return float(sum(m.c1_bound() for m in self.modes))

    @property
    def linear_part(self) -> np.ndarray:
        """Integer matrix of the linear part of this map (inverse matrix when inverted)."""
        return self._inv_matrix if self.inverted else self.matrix

    def inverse(self) -> "TorusMap":
        if not self.has_inverse:
            raise InvalidSystemError("no_inverse", "inverse requested but Newton inverse is disabled")
        return TorusMap(self.matrix, self.modes, self.budget, self.newton_inverse,
                        not self.inverted, self._inv_matrix)

    def __post_init__(self):
        # float copies of the forward data for the inner loops
        d = self.matrix.shape[0]
        K = np.array([m.k for m in self.modes], dtype=float).reshape(-1, d)
        T = np.zeros((len(self.modes), d))
        for i, m in enumerate(self.modes):
            T[i, m.target] = 1.0
        object.__setattr__(self, "_A", self.matrix.astype(float))
        object.__setattr__(self, "_AT", self.matrix.T.astype(float).copy())
        object.__setattr__(self, "_K2pi", 2.0 * math.pi * K)
        object.__setattr__(self, "_phase", np.array([m.phase for m in self.modes], dtype=float))
        object.__setattr__(self, "_amp_T", np.array([m.amplitude for m in self.modes])[:, None] * T)
        object.__setattr__(self, "_outer", np.einsum("mi,mj->mij", 2.0 * math.pi * self._amp_T, K))

    # forward data, ignoring `inverted`
    def _forward_lift(self, x: np.ndarray) -> np.ndarray:
        y = x @ self._AT
        if self.modes:
            y += np.sin(x @ self._K2pi.T + self._phase) @ self._amp_T
        return y

    def _forward_jacobian(self, x: np.ndarray) -> np.ndarray:
        if not self.modes:
            return np.broadcast_to(self._A, x.shape[:-1] + self._A.shape).copy()
        c = np.cos(x @ self._K2pi.T + self._phase)
        d = self._A.shape[0]
        return self._A + (c @ self._outer.reshape(len(self.modes), d * d)).reshape(c.shape[:-1] + (d, d))

    def _newton_preimage(self, x: np.ndarray) -> np.ndarray:
        """Solve forward(y) = x mod 1, starting from the linear inverse."""
        y = x @ self._inv_matrix.T.astype(float)
        if self.is_linear:
            return y
        for _ in range(NEWTON_MAX_STEPS):
            r = self._forward_lift(y) - x
            r -= np.round(r)
            err = np.abs(r).max(axis=-1)
            if np.all(err < NEWTON_TOL):
                return y
            step = np.linalg.solve(self._forward_jacobian(y), r[..., None])[..., 0]
            t = np.ones(err.shape)
            for _ in range(30):
                trial = y - t[..., None] * step
                rt = self._forward_lift(trial) - x
                rt -= np.round(rt)
                worse = np.abs(rt).max(axis=-1) > err
                if not np.any(worse):
                    break
                t = np.where(worse, 0.5 * t, t)
            y = y - t[..., None] * step
        r = self._forward_lift(y) - x
        r -= np.round(r)
        err = float(np.abs(r).max())
        if err >= NEWTON_TOL:
            raise InvalidSystemError("newton_failed", f"Newton inverse did not converge (residual {err:.3e})",
                                     residual=err)
        return y

    def lift(self, x) -> np.ndarray:
        """Unreduced image of ``x`` in R^d."""
        x = np.asarray(x, dtype=float)
        return self._newton_preimage(x) if self.inverted else self._forward_lift(x)

    def __call__(self, x) -> np.ndarray:
        return canonical(self.lift(x))

    def jacobian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.inverted:
            return self._forward_jacobian(x)
        if self.is_linear:
            return np.broadcast_to(self._inv_matrix.astype(float), x.shape[:-1] + self.matrix.shape).copy()
        return np.linalg.inv(self._forward_jacobian(self._newton_preimage(x)))

    def describe(self) -> dict:
        return {
            "dimension": self.dimension,
            "kind": self.kind,
            "matrix": self.matrix.tolist(),
            "modes": [{"amplitude": m.amplitude, "target": m.target, "k": list(m.k), "phase": m.phase}
                      for m in self.modes],
            "budget": self.budget,
            "inverted": self.inverted,
            "c1_bound": self.c1_bound,
        }


@dataclass(frozen=True, eq=False)
class ConstantCocycle:
    """A fixed real matrix acting as the derivative over an identity base map.

    Exercises the cocycle machinery on matrices that are not torus
    automorphisms (``diag(3, 1)``, ``diag(2, 0.5)`` and so on). Points are
    left where they are.
    """

    matrix: np.ndarray
    inverted: bool = False

    def __post_init__(self):
        M = np.array(self.matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise InvalidSystemError("not_square", f"matrix must be square, got shape {M.shape}")
        object.__setattr__(self, "matrix", M)

    dimension = property(lambda self: self.matrix.shape[0])
    kind = "constant-cocycle"
    is_linear = True
    has_inverse = True
    modes = ()

    @property
    def linear_part(self) -> np.ndarray:
        return np.linalg.inv(self.matrix) if self.inverted else self.matrix

    def inverse(self) -> "ConstantCocycle":
        return ConstantCocycle(self.matrix, not self.inverted)

    def lift(self, x) -> np.ndarray:
        return np.array(x, dtype=float)

    def __call__(self, x) -> np.ndarray:
        return canonical(np.asarray(x, dtype=float))

    def jacobian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.linear_part, x.shape[:-1] + self.matrix.shape).copy()

    def describe(self) -> dict:
        return {"dimension": self.dimension, "kind": self.kind, "matrix": self.matrix.tolist(),
                "inverted": self.inverted}


def canonical(x) -> np.ndarray:
    """Representative of ``x`` mod 1 in ``[0, 1)``."""
    y = np.mod(x, 1.0)
    # np.mod returns 1.0 for tiny negative inputs
    y[y >= 1.0] = 0.0
    return y


def make_linear_toral(A) -> TorusMap:
    A = _integer_matrix(A)
    det = integer_det(A)
    if abs(det) != 1:
        raise InvalidSystemError("det_not_unit", f"|det A| = {abs(det)}; not a diffeomorphism of the torus",
                                 det=det)
    return TorusMap(A, (), DEFAULT_BUDGET, True, False, integer_inverse(A))


def make_perturbed_toral(A, modes, budget: float = DEFAULT_BUDGET, newton_inverse: bool = True) -> TorusMap:
    """Linear automorphism plus a finite sum of sine modes.

    Each mode adds ``amplitude * sin(2*pi*<k, x> + phase)`` to one coordinate.
    The sum of ``|amplitude| * 2*pi * |k|`` bounds the C^1 distance to the
    linear map and must stay strictly below ``budget``.
    """
    base = make_linear_toral(A)
    d = base.dimension
    parsed = []
    for m in modes:
        if not isinstance(m, Mode):
            m = Mode(float(m["amplitude"]), int(m["target"]), tuple(int(q) for q in m["k"]),
                     float(m.get("phase", 0.0)))
        if not 0 <= m.target < d or len(m.k) != d:
            raise InvalidSystemError("bad_mode", f"mode {m} does not fit dimension {d}")
        if m.amplitude != 0.0:
            parsed.append(Mode(float(m.amplitude), int(m.target), tuple(int(q) for q in m.k), float(m.phase)))
    bound = float(sum(m.c1_bound() for m in parsed))
    if not budget > 0:
        raise InvalidSystemError("bad_budget", "budget must be positive", budget=budget)
    if bound >= budget:
        raise InvalidSystemError("budget_exceeded",
                                 f"C^1 perturbation bound {bound:.4f} is not below budget {budget}",
                                 c1_bound=bound, budget=budget)
    return TorusMap(base.matrix, tuple(parsed), float(budget), bool(newton_inverse), False, base._inv_matrix)


def evaluate(f: TorusMap, x, lift: bool = False) -> np.ndarray:
    return f.lift(x) if lift else f(x)


def jacobian(f: TorusMap, x) -> np.ndarray:
    return f.jacobian(x)


def orbit(f: TorusMap, x, n: int) -> np.ndarray:
    """Points ``x, f(x), ..., f^n(x)`` stacked on a new leading axis."""
    x = canonical(np.asarray(x, dtype=float))
    out = np.empty((n + 1,) + x.shape)
    out[0] = x
    for i in range(n):
        out[i + 1] = f(out[i])
    return out


def wrap(delta) -> np.ndarray:
    """Coordinatewise minimal representative of a difference, in [-0.5, 0.5]."""
    delta = np.asarray(delta, dtype=float)
    return delta - np.round(delta)


def torus_distance(x, y) -> np.ndarray | float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise ValueError("points of different dimension")
    dist = np.sqrt(np.sum(wrap(x - y) ** 2, axis=-1))
    return float(dist) if np.ndim(dist) == 0 else dist


def system_from_config(cfg: dict) -> TorusMap:
    """Build a map from the JSON system document.

    ``{"dimension": d, "matrix": [[...]], "modes": [...], "budget": b}``; ``modes``
    and ``budget`` are optional, ``newton_inverse`` defaults to true.
    """
    if not isinstance(cfg, dict) or "matrix" not in cfg:
        raise InvalidSystemError("schema", "system config must be an object with a 'matrix' field")
    try:
        A = np.array(cfg["matrix"], dtype=float)
    except (TypeError, ValueError):
        raise InvalidSystemError("non_integer", "matrix entries must be integers") from None
    if "dimension" in cfg and (A.ndim != 2 or cfg["dimension"] != A.shape[0]):
        raise InvalidSystemError("dimension_mismatch",
                                 f"dimension {cfg['dimension']} does not match matrix shape {A.shape}")
    modes = cfg.get("modes") or []
    try:
        parsed = [Mode(float(m["amplitude"]), int(m["target"]), tuple(int(q) for q in m["k"]),
                       float(m.get("phase", 0.0))) for m in modes]
    except (KeyError, TypeError, ValueError):
        raise InvalidSystemError("bad_mode", "each mode needs amplitude, target, k (phase optional)") from None
    if not parsed:
        return make_linear_toral(A)
    return make_perturbed_toral(A, parsed, float(cfg.get("budget", DEFAULT_BUDGET)),
                                bool(cfg.get("newton_inverse", True)))


def load_system(path: str | Path) -> TorusMap:
    cfg = json.loads(Path(path).read_text())
    return system_from_config(cfg.get("system", cfg))


CAT_MAP = ((2, 1), (1, 1))
T3_CENTER = ((2, 1, 0), (1, 1, 0), (0, 0, 1))
# inverse of the companion matrix of x^3 - x^2 - 1: a complex unstable pair
T3_COMPLEX = ((0, 1, 0), (-1, 0, 1), (1, 0, 0))


def catalog(name: str, epsilon: float = 0.0) -> TorusMap:
    """Named test systems; ``perturbed-cat`` takes the sine amplitude ``epsilon``."""
    if name == "cat":
        return make_linear_toral(CAT_MAP)
    if name == "t3-center":
        return make_linear_toral(T3_CENTER)
    if name == "t3-complex":
        return make_linear_toral(T3_COMPLEX)
    if name == "perturbed-cat":
        return make_perturbed_toral(CAT_MAP, [Mode(epsilon, 0, (1, 0), 0.0)])
    if name == "perturbed-t3-center":
        return make_perturbed_toral(T3_CENTER, [Mode(epsilon, 0, (1, 0, 0), 0.0)])
    raise KeyError(name)

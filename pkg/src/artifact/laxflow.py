"""Lax flows on GL(n) solved by factorization, with an RK4 oracle.

Splitting convention. A matrix ``X`` is written ``X = X_+ - X_-`` with
``X_+ = upper(X) + diag(X)/2`` and ``X_- = -(lower(X) + diag(X)/2)``.
At group level ``g = g_-^{-1} g_+`` with ``g_-`` lower and ``g_+`` upper
triangular and ``diag(g_-) diag(g_+) = 1``. If ``g = L D U`` with unit
triangular ``L``, ``U`` then ``g_+ = D^(1/2) U`` and ``g_- = D^(-1/2) L^(-1)``.

With the trace pairing the gradient ``D_+ - D_-`` of an invariant function
equals ``D_h`` itself, where ``tr(D_h(g) X) = d/dt h(g exp(tX))`` at ``t = 0``.
The flow ``dL/dt = phi(M) L - L M`` with ``M = (D_h(L))_+`` (or ``_-``) is
solved by ``L(t) = phi(g_pm(t)) L(0) g_pm(t)^(-1)`` where
``g(t) = exp(t D_h(L(0)))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sl

from .spinalg import DomainError


class FactorizationError(DomainError):
    """A leading principal minor vanishes, so ``g = g_-^{-1} g_+`` does not exist."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message if t is None else f"{message} (at t={t:g})")
        self.t = t


class StepControlError(RuntimeError):
    pass


MINOR_TOL = 1e-12


def plus_part(x: np.ndarray) -> np.ndarray:
    return np.triu(x, 1) + np.diag(np.diag(x)) / 2


def minus_part(x: np.ndarray) -> np.ndarray:
    return -(np.tril(x, -1) + np.diag(np.diag(x)) / 2)


# twists ---------------------------------------------------------------------

@dataclass(frozen=True)
class Twist:
    """Automorphism ``phi`` of GL(n).

    kind ``"identity"``; ``"diagonal"`` with ``phi(g) = Delta g Delta^(-1)``;
    ``"chevalley"`` with ``phi(g) = J g^(-T) J``, ``J`` the reversal
    permutation; ``"permutation"`` with ``phi(g) = P g P^T``. Only twists that
    preserve the triangular splitting are accepted.
    """

    kind: str = "identity"
    delta: tuple | None = None
    perm: tuple | None = None

    def group(self, g: np.ndarray) -> np.ndarray:
        n = len(g)
        if self.kind == "identity":
            return g
        if self.kind == "diagonal":
            d = np.asarray(self.delta)
            return (d[:, None] * g) / d[None, :]
        if self.kind == "chevalley":
            return np.linalg.inv(g).T[::-1, ::-1]
        if self.kind == "permutation":
            p = np.eye(n)[list(self.perm)]
            return p @ g @ p.T
        raise ValueError(f"unknown twist kind {self.kind!r}")

    def algebra(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "chevalley":
            return -x.T[::-1, ::-1]
        return self.group(x)

    def check(self, n: int) -> None:
        """Raise unless ``phi`` maps upper / lower / diagonal generators into themselves."""
        if self.kind == "diagonal" and (self.delta is None or len(self.delta) != n or 0 in self.delta):
            raise ValueError("diagonal twist needs n nonzero entries")
        if self.kind == "permutation" and (self.perm is None or sorted(self.perm) != list(range(n))):
            raise ValueError("permutation twist needs a permutation of range(n)")
        for i in range(n):
            for j in range(n):
                e = np.zeros((n, n))
                e[i, j] = 1.0
                img = self.algebra(e)
                if i < j:
                    ok = np.allclose(np.tril(img), 0)
                elif i > j:
                    ok = np.allclose(np.triu(img), 0)
                else:
                    ok = np.allclose(img, np.diag(np.diag(img)))
                if not ok:
                    raise ValueError(f"twist {self.kind!r} does not preserve the triangular splitting")


# hamiltonians ---------------------------------------------------------------

def _chevalley_core(g: np.ndarray) -> np.ndarray:
    w = g[::-1]
    return np.linalg.solve(w.T, w)


def invariant_core(g: np.ndarray, twist: Twist) -> np.ndarray:
    """Matrix ``C(g)`` whose ordinary conjugacy class is a twisted-conjugation invariant."""
    if twist.kind in ("identity", "permutation"):
        return g
    if twist.kind == "diagonal":
        return g / np.asarray(twist.delta)[:, None]
    if twist.kind == "chevalley":
        return _chevalley_core(g)
    raise ValueError(twist.kind)


def hamiltonian_value(g: np.ndarray, k: int, twist: Twist = Twist()) -> complex:
    """``h_k(g) = tr(C(g)^k) / k``, invariant under ``g -> phi(g1) g g1^(-1)``."""
    c = invariant_core(np.asarray(g), twist)
    return np.trace(np.linalg.matrix_power(c, k)) / k


def gradient(L: np.ndarray, k: int = 2, twist: Twist = Twist()) -> np.ndarray:
    """``D_h(L)`` for ``h = h_k``: ``tr(D X) = d/dt h(L exp(tX))``.

    Untwisted this is ``L^k``, which commutes with ``L``.
    """
    L = np.asarray(L)
    if k < 1:
        raise ValueError("k must be positive")
    if abs(np.linalg.det(L)) < MINOR_TOL:
        raise DomainError("L is singular")
    c = invariant_core(L, twist)
    ck = np.linalg.matrix_power(c, k)
    if twist.kind in ("identity", "permutation", "diagonal"):
        return ck
    # C = w^-T w with w = J L; dC = -w^-T X^T w + C X
    w = L[::-1]
    ckm1 = np.linalg.matrix_power(c, k - 1)
    return ck - np.linalg.solve(w, ckm1.T @ w.T)


@dataclass
class LaxSystem:
    L0: np.ndarray
    k: int = 2
    twist: Twist = field(default_factory=Twist)

    def __post_init__(self):
        self.L0 = np.asarray(self.L0)
        if self.L0.ndim != 2 or self.L0.shape[0] != self.L0.shape[1]:
            raise ValueError("L0 must be square")
        if abs(np.linalg.det(self.L0)) < MINOR_TOL:
            raise DomainError("L0 must be invertible")
        self.twist.check(self.n)

    @property
    def n(self) -> int:
        return self.L0.shape[0]

    def hamiltonian(self, L: np.ndarray) -> complex:
        return hamiltonian_value(L, self.k, self.twist)


# factorization --------------------------------------------------------------

@dataclass(frozen=True)
class FactorizationResult:
    g_minus: np.ndarray
    g_plus: np.ndarray
    residual: float


def factorize(g: np.ndarray, t: float | None = None, tol: float = MINOR_TOL) -> FactorizationResult:
    """``g = g_-^{-1} g_+`` by Gaussian elimination without pivoting.

    The pivots ``D`` are split as ``D^(1/2)`` between the two factors. For
    real input with positive pivots the factors are real.
    """
    g = np.asarray(g)
    n = len(g)
    dtype = np.result_type(g.dtype, float)
    u = g.astype(dtype, copy=True)
    lower = np.eye(n, dtype=dtype)
    scale = max(np.abs(g).max(), 1.0)
    for j in range(n):
        piv = u[j, j]
        if abs(piv) < tol * scale:
            raise FactorizationError(f"leading minor {j + 1} vanishes", t)
        lower[j + 1:, j] = u[j + 1:, j] / piv
        u[j + 1:, :] -= np.outer(lower[j + 1:, j], u[j])
    d = np.diag(u).copy()
    if np.isrealobj(d) and np.all(d > 0):
        root = np.sqrt(d)
    else:
        root = np.sqrt(d.astype(complex))
    unit_upper = u / d[:, None]
    g_plus = root[:, None] * unit_upper
    g_minus = np.linalg.solve(lower, np.eye(n)) / root[:, None]
    residual = float(np.abs(np.linalg.solve(g_minus, g_plus) - g).max())
    return FactorizationResult(g_minus, g_plus, residual)


def lax_solve_by_factorization(sys: LaxSystem, times: Sequence[float], branch: str = "+",
                               return_factors: bool = False):
    """``L(t) = phi(g_pm(t)) L0 g_pm(t)^(-1)`` with ``g(t) = exp(t D_h(L0))``."""
    grad = gradient(sys.L0, sys.k, sys.twist)
    out, factors = [], []
    for t in times:
        fr = factorize(sl.expm(t * grad), t=t)
        gb = fr.g_plus if branch == "+" else fr.g_minus
        out.append(sys.twist.group(gb) @ sys.L0 @ np.linalg.inv(gb))
        factors.append(fr)
    out = np.array(out)
    return (out, factors) if return_factors else out


# ODE oracle -----------------------------------------------------------------

def lax_rhs(L: np.ndarray, k: int, twist: Twist = Twist(), branch: str = "+") -> np.ndarray:
    grad = gradient(L, k, twist)
    m = plus_part(grad) if branch == "+" else minus_part(grad)
    return twist.algebra(m) @ L - L @ m


def _rk4(f: Callable, y0: np.ndarray, t_end: float, n_steps: int) -> np.ndarray:
    h = t_end / n_steps
    y = y0
    for _ in range(n_steps):
        k1 = f(y)
        k2 = f(y + h / 2 * k1)
        k3 = f(y + h / 2 * k2)
        k4 = f(y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def lax_ode_reference(sys: LaxSystem, t_end: float, step: float = 0.05, tol: float = 1e-8,
                      max_halvings: int = 10, branch: str = "+", L0: np.ndarray | None = None) -> np.ndarray:
    """Integrate ``dL/dt = phi(M) L - L M`` by RK4, halving the step until
    successive answers agree to ``tol`` (max-entry)."""
    y0 = sys.L0 if L0 is None else np.asarray(L0)
    if t_end == 0:
        return y0.copy()
    f = lambda y: lax_rhs(y, sys.k, sys.twist, branch)
    n = max(1, int(np.ceil(abs(t_end) / step)))
    with np.errstate(all="ignore"):
        prev = _rk4(f, y0, t_end, n)
        for _ in range(max_halvings):
            n *= 2
            cur = _rk4(f, y0, t_end, n)
            if np.all(np.isfinite(cur)) and np.abs(cur - prev).max() < tol:
                return cur
            prev = cur
    raise StepControlError(f"RK4 did not converge to {tol} after {max_halvings} halvings")


def flow_line_residual(L0: np.ndarray, fr: FactorizationResult, twist: Twist = Twist()) -> float:
    """``phi(g_+) L0 g_+^(-1) - phi(g_-) L0 g_-^(-1)``, max-entry."""
    a = twist.group(fr.g_plus) @ L0 @ np.linalg.inv(fr.g_plus)
    b = twist.group(fr.g_minus) @ L0 @ np.linalg.inv(fr.g_minus)
    return float(np.abs(a - b).max())


def random_lax_matrix(n: int, rng: np.random.Generator, scale: float = 0.4) -> np.ndarray:
    """Identity plus a small random real matrix: invertible and factorizable for moderate t."""
    return np.eye(n) + scale * rng.standard_normal((n, n))


def sample_lax_system(n: int, k: int, rng: np.random.Generator, twist: Twist = Twist(),
                      t_max: float = 1.0, scale: float = 0.3, bound: float = 5.0,
                      max_tries: int = 100) -> LaxSystem:
    """Random system whose factorization path stays away from vanishing minors.

    Draws ``L0 = 1 + scale * N(0, 1)`` until ``max |L(t)|`` over a grid on
    ``[0, t_max]`` stays below ``bound``; near a vanishing minor the flow
    becomes arbitrarily large and the RK4 oracle stiff.
    """
    grid = np.linspace(0.0, t_max, 21)
    for _ in range(max_tries):
        sys = LaxSystem(random_lax_matrix(n, rng, scale), k, twist)
        try:
            path = lax_solve_by_factorization(sys, grid)
        except FactorizationError:
            continue
        if np.abs(path).max() < bound:
            return sys
    raise RuntimeError("no well-conditioned system found")

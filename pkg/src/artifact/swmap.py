"""Semiclassical Seiberg-Witten map for Poisson structures.

Conventions (all indices are matrix indices, products are matrix products):

* ``{f, g} = theta^{ij} d_i f d_j g``;
* the Moser vector field of a one-form ``a`` is ``X^j = theta_t^{ji} a_i``;
* ``f_{ij} = d_i a_j - d_j a_i`` and ``d_t theta_t = -theta_t f theta_t``, so
  ``theta_t = theta (1 + t f theta)^{-1}``;
* ``Phi`` is the time-one flow of ``X``. It pushes ``theta`` forward to
  ``theta' = theta_1``, i.e. ``J theta J^T = theta' o Phi``, and
  ``rho*_a(g) = g o Phi``.

Polynomial data live in :class:`PolyField` (a sympy array in ``x0, x1, ...``).
Flows are integrated numerically; the gauge parameter ``lambda~`` is available
both as a truncated exact polynomial and as the flow average
``lambda~(x) = int_0^1 lambda(phi_s(x)) ds``, which is what its series sums to.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import sympy as sp

from .spinalg import DomainError

T = sp.Symbol("t")
HBAR = sp.Symbol("hbar")
MAX_LAMBDA_ORDER = 4
SERIES_CUTOFF = 1e-16


class SingularFlowError(DomainError):
    """``1 + t f theta`` became singular or the flow left every bounded region."""


def coords(dim: int) -> tuple:
    return sp.symbols(f"x0:{dim}", real=True)


# polynomial fields ----------------------------------------------------------

@dataclass
class PolyField:
    """Polynomial tensor field on ``R^dim``.

    ``expr`` is a sympy ``Array`` of shape ``()`` (function), ``(d,)``
    (one-form or vector) or ``(d, d)`` (bivector or two-form). With
    ``exact=True`` float coefficients are converted to rationals.
    """

    dim: int
    expr: sp.Array
    antisymmetric: bool = False
    exact: bool = True
    params: tuple = ()

    def __post_init__(self):
        conv = (lambda z: sp.nsimplify(sp.expand(z), rational=True)) if self.exact else (
            lambda z: sp.expand(sp.sympify(z)).evalf())
        e = sp.Array(self.expr)
        e = e.applyfunc(conv) if e.shape else sp.Array(conv(e[()]))
        self.expr = e
        if any(s != self.dim for s in e.shape):
            raise ValueError("every tensor slot must have length dim")
        free = set().union(*(sp.sympify(z).free_symbols for z in self._flat()))
        extra = free - set(coords(self.dim)) - set(self.params)
        if extra:
            raise ValueError(f"unexpected symbols {extra}")
        if self.antisymmetric:
            m = sp.Matrix(e.tolist())
            if (m + m.T).applyfunc(sp.expand) != sp.zeros(self.dim):
                raise ValueError("antisymmetric field is not antisymmetric")

    # constructors
    @classmethod
    def function(cls, dim, expr, exact=True):
        return cls(dim, sp.Array(sp.sympify(expr)), exact=exact)

    @classmethod
    def one_form(cls, dim, comps, exact=True):
        return cls(dim, sp.Array([sp.sympify(c) for c in comps]), exact=exact)

    @classmethod
    def bivector(cls, dim, upper: dict, exact=True):
        """Antisymmetric field from ``{(i, j): expr}`` with ``i < j``."""
        m = sp.zeros(dim)
        for (i, j), v in upper.items():
            if not i < j:
                raise ValueError("give entries with i < j")
            m[i, j] = sp.sympify(v)
            m[j, i] = -sp.sympify(v)
        return cls(dim, sp.Array(m.tolist()), antisymmetric=True, exact=exact)

    @classmethod
    def parse(cls, dim, spec, kind: str, exact=True):
        """Build from strings: ``kind`` is ``function``, ``one_form`` or ``bivector``.

        For a bivector, ``spec`` maps ``"i,j"`` (``i < j``) to an expression.
        """
        if kind == "function":
            return cls.function(dim, sp.sympify(spec, locals=_locals(dim)), exact)
        if kind == "one_form":
            return cls.one_form(dim, [sp.sympify(s, locals=_locals(dim)) for s in spec], exact)
        if kind == "bivector":
            upper = {tuple(int(k) for k in key.split(",")): sp.sympify(v, locals=_locals(dim))
                     for key, v in spec.items()}
            return cls.bivector(dim, upper, exact)
        raise ValueError(f"unknown kind {kind!r}")

    # algebra
    @property
    def x(self):
        return coords(self.dim)

    @property
    def shape(self):
        return self.expr.shape

    def _flat(self):
        return list(sp.flatten(self.expr)) if self.expr.shape else [self.expr[()]]

    def matrix(self) -> sp.Matrix:
        return sp.Matrix(self.expr.tolist())

    def scalar(self) -> sp.Expr:
        return self.expr[()]

    def grad(self) -> "PolyField":
        """Derivative index appended last."""
        d = sp.derive_by_array(self.expr if self.expr.shape else self.scalar(), self.x)
        if self.expr.shape:
            d = sp.permutedims(d, list(range(1, len(self.shape) + 1)) + [0])
        return PolyField(self.dim, d, exact=self.exact, params=self.params)

    def scaled(self, c) -> "PolyField":
        params = tuple(set(self.params) | sp.sympify(c).free_symbols)
        return PolyField(self.dim, self.expr * c, self.antisymmetric, self.exact, params)

    def __add__(self, other: "PolyField") -> "PolyField":
        return PolyField(self.dim, self.expr + other.expr, self.antisymmetric and other.antisymmetric,
                         self.exact and other.exact, tuple(set(self.params) | set(other.params)))

    def is_zero(self) -> bool:
        return all(sp.expand(z) == 0 for z in self._flat())

    # numerics
    @cached_property
    def _evaluator(self):
        entries = self._flat()
        shape = tuple(self.shape)
        const = np.zeros(len(entries))
        live = [k for k, z in enumerate(entries) if sp.sympify(z).free_symbols]
        for k, z in enumerate(entries):
            if k not in live:
                const[k] = float(z)
        fn = sp.lambdify(self.x, [entries[k] for k in live], "numpy") if live else None

        def ev(points):
            pts = np.atleast_2d(np.asarray(points, dtype=float))
            out = np.tile(const, (len(pts), 1))
            if fn is not None:
                out[:, live] = np.array(fn(*pts.T), dtype=float).T
            return out.reshape((len(pts),) + shape)

        return ev

    def __call__(self, points) -> np.ndarray:
        """Evaluate at an ``(m, d)`` array of points; returns ``(m, *shape)``."""
        return self._evaluator(points)


def _locals(dim):
    return {str(s): s for s in coords(dim)}


def field_strength(a: PolyField) -> PolyField:
    """``f_{ij} = d_i a_j - d_j a_i``."""
    g = a.grad().matrix()  # g[i, k] = d_k a_i
    return PolyField(a.dim, sp.Array((g.T - g).tolist()), antisymmetric=True, exact=a.exact, params=a.params)


def exact_differential(lam: PolyField) -> PolyField:
    return PolyField(lam.dim, lam.grad().expr, exact=lam.exact, params=lam.params)


def poisson_bracket(theta: PolyField, f: sp.Expr, g: sp.Expr) -> sp.Expr:
    x = theta.x
    th = theta.matrix()
    return sp.expand(sum(th[i, j] * sp.diff(f, x[i]) * sp.diff(g, x[j])
                         for i in range(theta.dim) for j in range(theta.dim) if th[i, j] != 0))


def schouten_exact(theta: PolyField) -> sp.Array:
    """``S^{ijk} = theta^{il} d_l theta^{jk} + cyclic``; zero iff ``theta`` is Poisson."""
    d, x, th = theta.dim, theta.x, theta.matrix()
    s = sp.MutableDenseNDimArray.zeros(d, d, d)
    for i, j, k in itertools.product(range(d), repeat=3):
        s[i, j, k] = sp.expand(sum(th[i, l] * sp.diff(th[j, k], x[l]) + th[j, l] * sp.diff(th[k, i], x[l])
                                   + th[k, l] * sp.diff(th[i, j], x[l]) for l in range(d)))
    return sp.Array(s)


def is_poisson(theta: PolyField) -> bool:
    return all(z == 0 for z in sp.flatten(schouten_exact(theta)))


# theta_t ---------------------------------------------------------------------

def _theta_t_matrix(th: np.ndarray, f: np.ndarray, t: float) -> tuple:
    d = th.shape[-1]
    m = np.eye(d) + t * f @ th
    det = np.linalg.det(m)
    if np.any(np.abs(det) < 1e-12) or not np.all(np.isfinite(det)):
        raise SingularFlowError(f"1 + t f theta is singular at t={t}")
    minv = np.linalg.inv(m)
    return th @ minv, minv


def theta_t(theta: PolyField, f: PolyField, t: float, x) -> np.ndarray:
    """``theta(x) (1 + t f(x) theta(x))^{-1}`` at one point."""
    th, ff = theta(x)[0], f(x)[0]
    return _theta_t_matrix(th, ff, t)[0]


def theta_t_ode(theta: PolyField, f: PolyField, t: float, x, steps: int = 64, tol: float = 1e-13,
                max_doublings: int = 8) -> np.ndarray:
    """RK4 solution of ``d_t theta_t = -theta_t f theta_t`` at one point (independent check)."""
    th0, ff = theta(x)[0], f(x)[0]

    def run(n):
        y, h = th0.copy(), t / n
        rhs = lambda y: -y @ ff @ y  # noqa: E731
        for _ in range(n):
            k1 = rhs(y)
            k2 = rhs(y + h / 2 * k1)
            k3 = rhs(y + h / 2 * k2)
            k4 = rhs(y + h * k3)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        return y

    prev = run(steps)
    for _ in range(max_doublings):
        steps *= 2
        cur = run(steps)
        if np.abs(cur - prev).max() < tol:
            return cur
        prev = cur
    return prev


def schouten_fd(theta_fn, x, h: float = 1e-3) -> float:
    """Largest ``|S^{ijk}|`` with derivatives from a fourth-order central stencil.

    ``theta_fn`` maps a point to a ``(d, d)`` matrix.
    """
    x = np.asarray(x, dtype=float)
    d = len(x)
    th = theta_fn(x)
    dth = np.zeros((d, d, d))  # [j, k, l] = d_l theta^{jk}
    for l in range(d):
        e = np.zeros(d)
        e[l] = h
        dth[:, :, l] = (-theta_fn(x + 2 * e) + 8 * theta_fn(x + e) - 8 * theta_fn(x - e)
                        + theta_fn(x - 2 * e)) / (12 * h)
    s = (np.einsum("il,jkl->ijk", th, dth) + np.einsum("jl,kil->ijk", th, dth)
         + np.einsum("kl,ijl->ijk", th, dth))
    return float(np.abs(s).max())


# Moser flow ------------------------------------------------------------------

@dataclass
class FlowResult:
    points: np.ndarray          # (m, d) images
    jacobian: np.ndarray        # (m, d, d)
    lam_tilde: np.ndarray | None
    lam_tilde_grad: np.ndarray | None
    steps: int
    error_estimate: float


@dataclass
class MoserFlow:
    """Non-autonomous flow of ``X_t^j = theta_t^{ji} a_i`` from ``t0`` to ``t1``.

    With ``lam`` given, the flow also accumulates ``int lam(phi_s) ds`` and
    its gradient, i.e. ``lambda~`` and ``d lambda~`` at the start points.
    """

    theta: PolyField
    a: PolyField
    lam: PolyField | None = None
    steps: int = 64
    tol: float = 1e-11
    max_doublings: int = 5

    def __post_init__(self):
        if self.theta.dim != self.a.dim:
            raise ValueError("dimension mismatch")
        self.f = field_strength(self.a)
        self._th, self._dth = self.theta, self.theta.grad()
        self._f, self._df = self.f, self.f.grad()
        self._a, self._da = self.a, self.a.grad()
        if self.lam is not None:
            self._lam, self._dlam = self.lam, self.lam.grad()

    @property
    def dim(self):
        return self.theta.dim

    def theta_t_and_grad(self, t: float, pts: np.ndarray):
        """``theta_t`` and ``d_k theta_t`` (shape ``(m, k, d, d)``) at points."""
        th, dth = self._th(pts), np.moveaxis(self._dth(pts), -1, 1)
        f, df = self._f(pts), np.moveaxis(self._df(pts), -1, 1)
        tht, minv = _theta_t_matrix(th, f, t)
        term = t * (df @ th[:, None] + f[:, None] @ dth)
        dtht = dth @ minv[:, None] - tht[:, None] @ term @ minv[:, None]
        return tht, dtht

    def field(self, t: float, pts: np.ndarray):
        """``X`` and its Jacobian ``DX[m, j, k] = d_k X^j``."""
        tht, dtht = self.theta_t_and_grad(t, pts)
        a, da = self._a(pts), self._da(pts)
        x = np.einsum("mji,mi->mj", tht, a)
        dx = np.einsum("mkji,mi->mjk", dtht, a) + np.einsum("mji,mik->mjk", tht, da)
        return x, dx

    def _rhs(self, t, state):
        x, jac = state[0], state[1]
        v, dv = self.field(t, x)
        out = [v, dv @ jac]
        if self.lam is not None:
            out += [self._lam(x), np.einsum("mkj,mk->mj", jac, self._dlam(x))]
        return out

    def _run(self, pts, t0, t1, n):
        m, d = pts.shape
        state = [pts.copy(), np.broadcast_to(np.eye(d), (m, d, d)).copy()]
        if self.lam is not None:
            state += [np.zeros(m), np.zeros((m, d))]
        h = (t1 - t0) / n
        t = t0
        with np.errstate(over="raise", invalid="raise"):
            try:
                for _ in range(n):
                    k1 = self._rhs(t, state)
                    k2 = self._rhs(t + h / 2, [s + h / 2 * k for s, k in zip(state, k1)])
                    k3 = self._rhs(t + h / 2, [s + h / 2 * k for s, k in zip(state, k2)])
                    k4 = self._rhs(t + h, [s + h * k for s, k in zip(state, k3)])
                    state = [s + h / 6 * (a + 2 * b + 2 * c + e) for s, a, b, c, e in zip(state, k1, k2, k3, k4)]
                    t += h
                    if np.abs(state[0]).max() > 1e8:
                        raise SingularFlowError(f"flow blew up near t={t:.4g}")
            except FloatingPointError as err:
                raise SingularFlowError(f"flow blew up near t={t:.4g}") from err
        return state

    def run(self, points, t0: float = 0.0, t1: float = 1.0) -> FlowResult:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        n = self.steps
        prev = self._run(pts, t0, t1, n)
        err = np.inf
        for _ in range(self.max_doublings):
            n *= 2
            cur = self._run(pts, t0, t1, n)
            err = max(np.abs(c - p).max() for c, p in zip(cur[:2], prev[:2]))
            prev = cur
            if err < self.tol:
                break
        if not err < max(self.tol, 1e-6):
            raise SingularFlowError(f"step control failed (change {err:.3g} at {n} steps)")
        lt = prev[2] if self.lam is not None else None
        lg = prev[3] if self.lam is not None else None
        return FlowResult(prev[0], prev[1], lt, lg, n, float(err))

    def __call__(self, points, t0=0.0, t1=1.0) -> np.ndarray:
        return self.run(points, t0, t1).points

    def jacobian_fd(self, points, h: float = 1e-5) -> np.ndarray:
        """Central finite-difference Jacobian of the time-one map."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        m, d = pts.shape
        jac = np.zeros((m, d, d))
        for k in range(d):
            e = np.zeros(d)
            e[k] = h
            jac[:, :, k] = (self(pts + e) - self(pts - e)) / (2 * h)
        return jac


def moser_flow(theta: PolyField, a: PolyField, x, t_end: float = 1.0, **kw) -> np.ndarray:
    """Image of ``x`` under the flow of ``X_t = theta_t^{ji} a_i d_j`` on ``[0, t_end]``."""
    return MoserFlow(theta, a, **kw)(x, 0.0, t_end)


def pushforward_residual(theta: PolyField, a: PolyField, points, jacobian: str = "variational",
                         **kw) -> float:
    """``max |J theta J^T - theta' o Phi|`` over sample points.

    ``jacobian`` selects the variational equation (default) or central
    finite differences.
    """
    flow = MoserFlow(theta, a, **kw)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    res = flow.run(pts)
    jac = res.jacobian if jacobian == "variational" else flow.jacobian_fd(pts)
    lhs = jac @ theta(pts) @ np.swapaxes(jac, 1, 2)
    rhs, _ = flow.theta_t_and_grad(1.0, res.points)
    return float(np.abs(lhs - rhs).max())


# lambda~ -------------------------------------------------------------------

def theta_t_series(theta: PolyField, f: PolyField, order: int) -> sp.Matrix:
    """``sum_{k <= order} (-t)^k theta (f theta)^k`` as a polynomial matrix."""
    th, ff = theta.matrix(), f.matrix()
    out, term = sp.zeros(theta.dim), th
    for k in range(order + 1):
        out += (-T) ** k * term
        term = (term * ff * th).applyfunc(sp.expand)
    return out.applyfunc(sp.expand)


def _truncate(p: sp.Poly, k: int, t_index: int) -> sp.Poly:
    """Drop every term of ``p`` whose power of ``t`` exceeds ``k``."""
    kept = {m: c for m, c in p.as_dict().items() if m[t_index] <= k}
    return sp.Poly.from_dict(kept, *p.gens, domain=p.domain) if kept else sp.Poly(0, *p.gens, domain=p.domain)


def lambda_tilde(theta: PolyField, a: PolyField, lam: PolyField, order: int) -> PolyField:
    """``sum_{n <= order} (X_t + d_t)^n (lam) / (n+1)! |_{t=0}`` as an exact polynomial.

    Works on sympy ``Poly`` objects in ``x``, ``t`` and any bookkeeping
    parameters, truncating powers of ``t`` that can no longer survive.
    """
    if not 0 <= order <= MAX_LAMBDA_ORDER:
        raise ValueError(f"order must be in 0..{MAX_LAMBDA_ORDER}")
    params = tuple(sorted(set(theta.params) | set(a.params) | set(lam.params), key=str))
    x, d = theta.x, theta.dim
    gens = x + (T,) + params
    ti = d
    tht = theta_t_series(theta, field_strength(a), order)
    av = list(a.expr)
    vec = [sp.Poly(sum(tht[j, i] * av[i] for i in range(d)), *gens) for j in range(d)]
    term = sp.Poly(lam.scalar(), *gens)
    total = term
    for n in range(1, order + 1):
        nxt = term.diff(T)
        for j in range(d):
            nxt += vec[j] * term.diff(x[j])
        term = _truncate(nxt, order - n, ti)
        total += _truncate(term, 0, ti) * sp.Rational(1, math.factorial(n + 1))
    return PolyField(d, sp.Array(total.as_expr()), exact=lam.exact, params=params)


def lambda_tilde_display(theta: PolyField, a: PolyField, lam: PolyField) -> PolyField:
    """The second-order component formula written out index by index.

    ``lam + 1/2 th^{ij} a_j d_i lam
    + 1/6 th^{kl} a_l (d_k(th^{ij} a_j d_i lam) - th^{ij} f_{jk} d_i lam)``.
    """
    d, x = theta.dim, theta.x
    th, f, av, lm = theta.matrix(), field_strength(a).matrix(), list(a.expr), lam.scalar()
    r = range(d)
    first = sum(th[i, j] * av[j] * sp.diff(lm, x[i]) for i in r for j in r)
    second = sum(th[k, l] * av[l] * (sp.diff(first, x[k])
                                     - sum(th[i, j] * f[j, k] * sp.diff(lm, x[i]) for i in r for j in r))
                 for k in r for l in r)
    return PolyField.function(d, sp.expand(lm + first / 2 + second / 6), exact=lam.exact)


def lambda_tilde_flow(theta: PolyField, a: PolyField, lam: PolyField, points, **kw):
    """``lambda~`` and its gradient at points from ``int_0^1 lam(phi_s(x)) ds``."""
    res = MoserFlow(theta, a, lam, **kw).run(points)
    return res.lam_tilde, res.lam_tilde_grad


def _test_functions(dim):
    """Coordinates and a few quadratics, each as ``(value, gradient)`` callables."""
    fns = []
    for k in range(dim):
        fns.append((lambda y, k=k: y[:, k], lambda y, k=k: np.eye(dim)[k][None].repeat(len(y), 0)))
    for k in range(dim):
        l = (k + 1) % dim

        def val(y, k=k, l=l):
            return y[:, k] * y[:, l]

        def grad(y, k=k, l=l):
            g = np.zeros_like(y)
            g[:, k] += y[:, l]
            g[:, l] += y[:, k]
            return g

        fns.append((val, grad))
    return fns


def gauge_covariance_residual(theta: PolyField, a: PolyField, lam: PolyField, eps: float, points,
                              **kw) -> float:
    """``max |rho*_{a+eps dlam}(g) - rho*_a(g) - eps {rho*_a(g), lambda~}|``.

    ``g`` runs over coordinates and quadratics; ``lambda~`` is the exact flow
    average, so the residual is second order in ``eps``.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    base = MoserFlow(theta, a, lam, **kw).run(pts)
    moved = MoserFlow(theta, a + exact_differential(lam).scaled(eps), **kw).run(pts)
    th = theta(pts)
    worst = 0.0
    for val, grad in _test_functions(theta.dim):
        dg = np.einsum("mi,mij->mj", grad(base.points), base.jacobian)   # d(g o Phi)
        bracket = np.einsum("mi,mij,mj->m", dg, th, base.lam_tilde_grad)
        r = val(moved.points) - val(base.points) - eps * bracket
        worst = max(worst, float(np.abs(r).max()))
    return worst


def scaling_exponent(eps_values, residuals) -> float:
    """Least-squares slope of ``log r`` against ``log eps``."""
    return float(np.polyfit(np.log(eps_values), np.log(residuals), 1)[0])


# consistency -------------------------------------------------------------------

def _gauge_variation(theta, a, param: PolyField, target: PolyField, order):
    """``delta_param lambda~(target, a)``: derivative along ``a -> a + e d(param)``."""
    e = sp.Symbol("e_var")
    shifted = a + exact_differential(param).scaled(e)
    lt = lambda_tilde(theta, shifted, target, order).scalar()
    return sp.expand(sp.diff(lt, e).subs(e, 0))


def semiclassical_consistency(theta: PolyField, a: PolyField, alpha: PolyField, beta: PolyField,
                              order: int, sign: int = 1) -> sp.Expr:
    """``delta_alpha lam~(beta) - delta_beta lam~(alpha) + sign {lam~(alpha), lam~(beta)}``.

    ``sign = +1`` is the combination that vanishes (through the working
    order); ``sign = -1`` is the opposite sign, kept for comparison.
    """
    la = lambda_tilde(theta, a, alpha, order).scalar()
    lb = lambda_tilde(theta, a, beta, order).scalar()
    da = _gauge_variation(theta, a, alpha, beta, order)
    db = _gauge_variation(theta, a, beta, alpha, order)
    return sp.expand(da - db + sign * poisson_bracket(theta, la, lb))


def consistency_report(theta: PolyField, a: PolyField, alpha: PolyField, beta: PolyField,
                       order: int, points, sign: int = 1) -> dict:
    """Residual size at points and its lowest power under ``theta -> s theta``."""
    s = sp.Symbol("s_scale")
    res = semiclassical_consistency(theta, a, alpha, beta, order, sign)
    res_s = semiclassical_consistency(theta.scaled(s), a, alpha, beta, order, sign)
    lowest = None if res_s == 0 else min(m[0] for m in sp.Poly(res_s, s).monoms())
    fn = sp.lambdify(theta.x, res, "numpy")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    vals = np.broadcast_to(np.asarray(fn(*pts.T), dtype=float), (len(pts),))
    return {"max_abs": float(np.abs(vals).max()), "lowest_theta_power": lowest}


# mini Seiberg-Witten map -----------------------------------------------------

@dataclass
class LieData:
    """Structure constants ``C[a, b, c] = C^{ab}_c`` of ``[t^a, t^b] = C^{ab}_c t^c``."""

    C: np.ndarray

    @classmethod
    def su2(cls):
        c = np.zeros((3, 3, 3))
        for a, b, k in itertools.permutations(range(3)):
            c[a, b, k] = np.linalg.det(np.eye(3)[[a, b, k]])
        return cls(c)

    @property
    def n(self):
        return self.C.shape[0]

    def bracket(self, x, y):
        return np.einsum("a,b,abc->c", x, y, self.C)

    def jacobi_residual(self) -> float:
        c = self.C
        j = (np.einsum("abd,dce->abce", c, c) + np.einsum("bcd,dae->abce", c, c)
             + np.einsum("cad,dbe->abce", c, c))
        return float(np.abs(j).max())

    def M(self, a_int):
        """``M[a, b] = M_a^b = C^{bc}_a a_c``."""
        return np.einsum("bca,c->ab", self.C, a_int)


def _power_series(m: np.ndarray, coeff) -> np.ndarray:
    """``sum_n coeff(n) m^n``, stopped once a term drops below ``SERIES_CUTOFF``."""
    out = np.zeros_like(m)
    p = np.eye(len(m))
    for n in range(400):
        term = coeff(n) * p
        out = out + term
        if n > 2 and np.abs(term).max() < SERIES_CUTOFF:
            return out
        p = p @ m
    raise SingularFlowError("matrix series did not converge")


def phi1(m):
    """``(e^M - 1)/M = sum M^n/(n+1)!``."""
    return _power_series(m, lambda n: 1 / math.factorial(n + 1))


def _psi(m):
    return _power_series(m, lambda n: n / math.factorial(n + 1))


def _frechet(fn, m, e):
    d = len(m)
    big = np.block([[m, e], [np.zeros((d, d)), m]])
    return fn(big)[:d, d:]


@dataclass
class MiniFields:
    """Point values of the abelian data on the enlarged space.

    ``a_mu[mu, b]`` (external components, linear in ``t^b``), ``a_int[b]``,
    ``da_int[mu, b] = d_mu a_b``, ``lam[b]`` and ``dlam[mu, b]``.
    """

    a_mu: np.ndarray
    a_int: np.ndarray
    da_int: np.ndarray
    lam: np.ndarray
    dlam: np.ndarray

    @classmethod
    def random(cls, rng, d: int, n: int, scale: float = 0.5):
        g = lambda *s: scale * rng.standard_normal(s)  # noqa: E731
        return cls(g(d, n), g(n), g(d, n), g(n), g(d, n))

    def gauge_shift(self, eps: float) -> "MiniFields":
        """Move along ``delta a_mu = d_mu lam``, ``delta a_b = lam_b``."""
        return MiniFields(self.a_mu + eps * self.dlam, self.a_int + eps * self.lam,
                          self.da_int + eps * self.dlam, self.lam, self.dlam)

    @property
    def f_mu(self):
        """``f_{mu b} = d_mu a_b - d_b a_mu`` with ``d_b a_mu = a_{mu b}``."""
        return self.da_int - self.a_mu


def mini_sw_map(lie: LieData, fields: MiniFields, mode: str = "A") -> np.ndarray:
    """Components along ``t^a`` of ``A_mu`` (shape ``(d, n)``) or ``Lambda`` (shape ``(n,)``)."""
    m = lie.M(fields.a_int)
    if mode == "A":
        return (phi1(m) @ fields.a_mu.T - _psi(m) @ fields.f_mu.T).T
    if mode == "Lambda":
        return phi1(m) @ fields.lam
    raise ValueError("mode is 'A' or 'Lambda'")


def mini_lambda_derivative(lie: LieData, fields: MiniFields) -> np.ndarray:
    """``d_mu Lambda`` (shape ``(d, n)``) by the Frechet derivative of the series."""
    m = lie.M(fields.a_int)
    p = phi1(m)
    out = []
    for mu in range(fields.da_int.shape[0]):
        dm = lie.M(fields.da_int[mu])
        out.append(_frechet(phi1, m, dm) @ fields.lam + p @ fields.dlam[mu])
    return np.array(out)


def mini_gauge_residual(lie: LieData, fields: MiniFields, eps: float) -> float:
    """``max |A(a + eps delta a) - A(a) - eps (d Lambda + [A, Lambda])|``."""
    a0 = mini_sw_map(lie, fields, "A")
    lam = mini_sw_map(lie, fields, "Lambda")
    dl = mini_lambda_derivative(lie, fields)
    pred = dl + np.array([lie.bracket(row, lam) for row in a0])
    moved = mini_sw_map(lie, fields.gauge_shift(eps), "A")
    return float(np.abs(moved - a0 - eps * pred).max())


# Moyal product ---------------------------------------------------------------

def moyal_star(f, g, theta, dim: int | None = None, order: int | None = None, hbar=HBAR) -> sp.Expr:
    """``f * g = sum_n (i hbar/2)^n / n! theta^{i1 j1}...theta^{in jn} d_I f d_J g``.

    ``theta`` is a constant antisymmetric matrix. ``order=None`` sums the
    series until it terminates, which is exact on polynomials. Computed as
    ``exp(i hbar/2 theta^{ij} d_{x_i} d_{y_j}) f(x) g(y)`` at ``y = x`` with
    sympy ``Poly`` arithmetic.
    """
    th = sp.Matrix(theta)
    d = dim or th.shape[0]
    x = coords(d)
    y = sp.symbols(f"y0:{d}", real=True)
    gens = x + y + (hbar,)
    f, g = sp.sympify(f), sp.sympify(g)
    prod = sp.Poly(f * g.subs(dict(zip(x, y)), simultaneous=True), *gens, domain="EX" if
                   th.free_symbols else None)
    pairs = [(i, j, th[i, j]) for i in range(d) for j in range(d) if th[i, j] != 0]
    total, term, n = prod, prod, 0
    while not term.is_zero and (order is None or n < order):
        n += 1
        acc = sp.Poly(0, *gens)
        for i, j, c in pairs:
            acc += term.diff(x[i]).diff(y[j]) * c
        term = acc * sp.Poly(sp.I * hbar / (2 * n), *gens)
        total += term
    merged: dict = {}
    for mon, c in total.as_dict().items():
        key = tuple(mon[k] + mon[k + d] for k in range(d)) + (mon[-1],)
        merged[key] = merged.get(key, 0) + c
    poly = sp.Poly.from_dict(merged, *(x + (hbar,)), domain=total.domain)
    return poly.as_expr()


# DBI identity ----------------------------------------------------------------

def dbi_open_string_data(g, b, theta, gs: float = 1.0):
    """``G``, ``Phi`` and ``G_s`` from ``G + Phi = (1 - (g+B) theta)^{-1} (g+B)``."""
    e = np.asarray(g) + np.asarray(b)
    d = len(e)
    m = np.eye(d) - e @ theta
    if abs(np.linalg.det(m)) < 1e-12:
        raise DomainError("1 - (g+B) theta is singular")
    gp = np.linalg.solve(m, e)
    big_g = (gp + gp.T) / 2
    phi = (gp - gp.T) / 2
    big_gs = gs / np.sqrt(complex(np.linalg.det(m)))
    return big_g, phi, big_gs


def _sqrt_det(m):
    return np.sqrt(complex(np.linalg.det(m)))


def dbi_sides(g, b, f, theta, gs: float = 1.0):
    """Both sides of ``det^{1/2}(g+B+F)/g_s = det^{1/2}(theta/theta') det^{1/2}(G+Phi+F')/G_s``."""
    g, b, f, theta = (np.asarray(z, dtype=float) for z in (g, b, f, theta))
    d = len(g)
    big_g, phi, big_gs = dbi_open_string_data(g, b, theta, gs)
    one_f = np.eye(d) + f @ theta
    if abs(np.linalg.det(one_f)) < 1e-12:
        raise DomainError("1 + F theta is singular")
    theta_p = theta @ np.linalg.inv(one_f)
    f_p = np.linalg.solve(one_f, f)
    ratio = theta @ np.linalg.inv(theta_p) if abs(np.linalg.det(theta)) > 1e-12 else one_f.T
    lhs = _sqrt_det(g + b + f) / gs
    rhs = _sqrt_det(ratio) * _sqrt_det(big_g + phi + f_p) / big_gs
    return lhs, rhs


def dbi_identity_residual(g, b, f, theta, gs: float = 1.0) -> float:
    lhs, rhs = dbi_sides(g, b, f, theta, gs)
    return float(abs(lhs - rhs))


def random_antisymmetric(rng, n, scale):
    x = scale * rng.standard_normal((n, n))
    return x - x.T


def random_dbi_draw(rng, n: int = 4, max_tries: int = 100):
    """``(g, B, F, theta)`` with every determinant under a square root positive.

    Draws that fail are resampled.
    """
    for _ in range(max_tries):
        s = rng.standard_normal((n, n))
        g = np.eye(n) + 0.2 * (s + s.T)
        b = random_antisymmetric(rng, n, 0.4)
        f = random_antisymmetric(rng, n, 0.4)
        theta = random_antisymmetric(rng, n, 0.2)
        if np.linalg.eigvalsh(g).min() < 0.2:
            continue
        e = g + b
        m = np.eye(n) - e @ theta
        one_f = np.eye(n) + f @ theta
        try:
            big_g, phi, _ = dbi_open_string_data(g, b, theta)
            fp = np.linalg.solve(one_f, f)
        except (DomainError, np.linalg.LinAlgError):
            continue
        dets = [np.linalg.det(m), np.linalg.det(one_f), np.linalg.det(big_g + phi + fp),
                np.linalg.det(theta)]
        if min(dets) > 1e-3:
            return g, b, f, theta
    raise DomainError("could not draw an admissible configuration")


# sample instances -------------------------------------------------------------

def poisson_4d(c0: float = 1.0, c1: float = 0.3, c2: float = 0.2, exact: bool = True) -> PolyField:
    """``(c0 + c1 x3 + c2 (x0^2+x1^2+x2^2)) eps_{ijk} x^k`` on the first three coordinates.

    A Lie-Poisson structure times a function of Casimirs, hence Poisson.
    """
    x = coords(4)
    h = sp.sympify(c0) + c1 * x[3] + c2 * (x[0] ** 2 + x[1] ** 2 + x[2] ** 2)
    return PolyField.bivector(4, {(0, 1): h * x[2], (1, 2): h * x[0], (0, 2): -h * x[1]}, exact)


def random_polynomial(rng, dim: int, degree: int, scale: float = 1.0) -> sp.Expr:
    """Random polynomial with integer-over-ten coefficients up to total degree ``degree``."""
    x = coords(dim)
    out = 0
    for powers in itertools.product(range(degree + 1), repeat=dim):
        if sum(powers) <= degree:
            c = sp.Rational(int(rng.integers(-10, 11)), 10) * sp.nsimplify(scale)
            out += c * sp.Mul(*[xi**p for xi, p in zip(x, powers)])
    return sp.expand(out)

"""Theta functions, elliptic face weights and the Ruijsenaars operator.

Dynamical variables ``lam`` are complex vectors of length ``N``; only the
differences ``lam_ij = lam_i - lam_j`` enter. A step of type ``i`` moves
``lam -> lam - eta e_i``; this one routine (:func:`shift`) is used by the
Yang-Baxter check, the RLL check and the difference operator alike.

Vertex form of the face weights. On ``V x V`` (basis ``e_a x e_b``)
the dynamical R-matrix has entries, for ``i != j``::

    R(lam|u) e_i x e_i = e_i x e_i
    R(lam|u) e_i x e_j = W_ij(lam|u) e_i x e_j + W_ii(lam|u) e_j x e_i

with ``W_ij`` the weight for two different paths around a face and
``W_ii`` the weight for coinciding paths, both evaluated at ``lam_ij``.
At ``u = 0`` this is the flip ``e_i x e_j -> e_j x e_i``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .spinalg import DomainError

THETA_CUTOFF = 1e-18
POLE_TOL = 1e-9


class SingularConfigurationError(DomainError):
    """A theta function in a denominator sits on (or within 1e-9 of) its zero lattice."""


@dataclass(frozen=True)
class EllipticParams:
    tau: complex = 0.8j
    eta: complex = 0.11
    c: complex = 0.7
    N: int = 2

    def __post_init__(self):
        if complex(self.tau).imag <= 0:
            raise DomainError("Im tau must be positive")
        if self.N < 2:
            raise ValueError("N must be at least 2")


# theta ----------------------------------------------------------------------

def _theta_terms(u: np.ndarray, tau: complex, cutoff: float) -> np.ndarray:
    b = tau.imag
    a = np.max(np.abs(np.imag(u))) if np.size(u) else 0.0
    # |term| = exp(-pi b x^2 - 2 pi x Im u) with x = j + 1/2
    x_max = (a + np.sqrt(a * a + b * np.log(1 / cutoff) / np.pi)) / b
    jmax = int(np.ceil(x_max)) + 1
    return np.arange(-jmax, jmax + 1) + 0.5


def theta(u, tau: complex, cutoff: float = THETA_CUTOFF):
    """``sum_j exp(pi i (j+1/2)^2 tau + 2 pi i (j+1/2)(u+1/2))``; odd in ``u``.

    The sum runs over all ``j`` whose term can exceed ``cutoff`` in modulus.
    Accepts scalars or arrays.
    """
    tau = complex(tau)
    if tau.imag <= 0:
        raise DomainError("Im tau must be positive")
    u_arr = np.asarray(u, dtype=complex)
    x = _theta_terms(u_arr, tau, cutoff)
    phase = 1j * np.pi * x**2 * tau + 2j * np.pi * np.multiply.outer(u_arr + 0.5, x)
    out = np.exp(phase).sum(axis=-1)
    return complex(out) if np.ndim(u) == 0 else out


def near_lattice(x: complex, tau: complex, tol: float = POLE_TOL) -> bool:
    """True if ``x`` is within ``tol`` of ``Z + tau Z`` (the zeros of theta)."""
    x, tau = complex(x), complex(tau)
    n = round(x.imag / tau.imag)
    y = x - n * tau
    return abs(y - round(y.real)) < tol


def _safe_theta(x: complex, tau: complex) -> complex:
    if near_lattice(x, tau):
        raise SingularConfigurationError(f"theta({x}) is on the zero lattice")
    return theta(x, tau)


# weights --------------------------------------------------------------------

WEIGHT_KINDS = ("same", "adjacent-ii", "adjacent-ij")


def boltzmann_weight(kind: str, lam, i: int, j: int, u: complex, params: EllipticParams) -> complex:
    """Non-zero face weights.

    ``"same"``: both steps of type ``i``, weight 1.
    ``"adjacent-ii"``: steps ``i`` then ``j`` along both sides,
    ``theta(eta) theta(-u + lam_ij) / (theta(u + eta) theta(lam_ij))``.
    ``"adjacent-ij"``: the two sides take the steps in opposite order,
    ``theta(u) theta(eta + lam_ij) / (theta(u + eta) theta(lam_ij))``.
    """
    if kind == "same":
        return 1.0 + 0j
    if kind not in WEIGHT_KINDS:
        raise ValueError(f"unknown weight kind {kind!r}")
    if i == j:
        raise ValueError("adjacent weights need i != j")
    lam = np.asarray(lam, dtype=complex)
    lij = lam[i] - lam[j]
    tau, eta = params.tau, params.eta
    den = _safe_theta(u + eta, tau) * _safe_theta(lij, tau)
    if kind == "adjacent-ii":
        return theta(eta, tau) * theta(-u + lij, tau) / den
    return theta(u, tau) * theta(eta + lij, tau) / den


def r_matrix(lam, u: complex, params: EllipticParams) -> np.ndarray:
    """Dynamical R-matrix as an ``(N, N, N, N)`` array ``R[a, b, c, d]`` (out ``ab``, in ``cd``)."""
    n = params.N
    r = np.zeros((n, n, n, n), dtype=complex)
    for i in range(n):
        r[i, i, i, i] = 1.0
        for j in range(n):
            if i != j:
                r[i, j, i, j] = boltzmann_weight("adjacent-ij", lam, i, j, u, params)
                r[j, i, i, j] = boltzmann_weight("adjacent-ii", lam, i, j, u, params)
    return r


def shift(lam, k: int, eta: complex, steps: int = 1) -> np.ndarray:
    """``lam - steps * eta * e_k``: the single place where dynamical shifts happen."""
    out = np.array(lam, dtype=complex)
    out[k] -= steps * eta
    return out


# dynamical Yang-Baxter ------------------------------------------------------

def _embed_r(lam, u, params, legs, shift_leg):
    """``R_{legs}(lam - h_{shift_leg})`` on ``V^{x3}`` as an ``N^3 x N^3`` matrix."""
    n = params.N
    dim = n**3
    out = np.zeros((dim, dim), dtype=complex)
    cache = {}
    for idx in itertools.product(range(n), repeat=3):
        key = None if shift_leg is None else idx[shift_leg]
        if key not in cache:
            cache[key] = r_matrix(lam if key is None else shift(lam, key, params.eta), u, params)
        r = cache[key]
        col = np.ravel_multi_index(idx, (n,) * 3)
        p, q = legs
        for a in range(n):
            for b in range(n):
                w = r[a, b, idx[p], idx[q]]
                if w != 0:
                    o = list(idx)
                    o[p], o[q] = a, b
                    out[np.ravel_multi_index(o, (n,) * 3), col] += w
    return out


def dybe_sides(lam, u: complex, v: complex, params: EllipticParams):
    """Both sides of ``R12(lam) R13(lam - h2) R23(lam) = R23(lam - h1) R13(lam) R12(lam - h3)``.

    Spectral arguments: ``R12`` at ``u``, ``R23`` at ``v`` and ``R13`` at
    ``u + v``.
    """
    lhs = (_embed_r(lam, u, params, (0, 1), None) @ _embed_r(lam, u + v, params, (0, 2), 1)
           @ _embed_r(lam, v, params, (1, 2), None))
    rhs = (_embed_r(lam, v, params, (1, 2), 0) @ _embed_r(lam, u + v, params, (0, 2), None)
           @ _embed_r(lam, u, params, (0, 1), 2))
    return lhs, rhs


def dybe_residual(lam, u: complex, v: complex, params: EllipticParams) -> float:
    """Largest entry of the difference of the two sides of the dynamical YBE."""
    lhs, rhs = dybe_sides(lam, u, v, params)
    return float(np.abs(lhs - rhs).max())


# Ruijsenaars L-operator -----------------------------------------------------

def ruijsenaars_L(lam, mu, i: int, j: int, u: complex, params: EllipticParams) -> complex:
    """``L^i_j(lam, mu|u)``.

    ``theta(c eta/N + u + lam_i - mu_j) / theta(u)`` times
    ``prod_{k != i} theta(c eta/N + lam_k - mu_j) / theta(lam_k - lam_i)``.
    """
    lam = np.asarray(lam, dtype=complex)
    mu = np.asarray(mu, dtype=complex)
    tau = params.tau
    g = params.c * params.eta / params.N
    val = theta(g + u + lam[i] - mu[j], tau) / _safe_theta(u, tau)
    for k in range(params.N):
        if k != i:
            val *= theta(g + lam[k] - mu[j], tau) / _safe_theta(lam[k] - lam[i], tau)
    return val


def _key(lam, mu):
    return tuple(np.round(np.asarray(lam), 12)), tuple(np.round(np.asarray(mu), 12))


def _apply_T(states: dict, leg: int, u: complex, params: EllipticParams) -> dict:
    """``T_leg = sum_ij E_ij x T^i_j`` with ``T^i_j |lam, mu> = L^i_j(lam, mu|u) |lam - eta e_i, mu - eta e_j>``."""
    out: dict = {}
    for (legs, lam, mu), amp in states.items():
        j = legs[leg]
        for i in range(params.N):
            coef = ruijsenaars_L(lam, mu, i, j, u, params)
            nl, nm = shift(lam, i, params.eta), shift(mu, j, params.eta)
            new_legs = list(legs)
            new_legs[leg] = i
            key = (tuple(new_legs),) + _key(nl, nm)
            out[key] = out.get(key, 0) + amp * coef
    return out


def _apply_R(states: dict, u: complex, params: EllipticParams, variable: str) -> dict:
    """``R12`` with dynamical argument read from the state (``"lam"`` or ``"mu"``)."""
    out: dict = {}
    n = params.N
    for (legs, lam, mu), amp in states.items():
        r = r_matrix(np.array(lam if variable == "lam" else mu), u, params)
        for a in range(n):
            for b in range(n):
                w = r[a, b, legs[0], legs[1]]
                if w != 0:
                    key = ((a, b), lam, mu)
                    out[key] = out.get(key, 0) + amp * w
    return out


def rll_residual(lam, mu, u: complex, v: complex, params: EllipticParams) -> float:
    """Dynamical RTT relation ``R12(lam) T1(lam - h2) T2(lam) = T2(lam - h1) T1(lam) R12(lam - h3)``.

    Realized on states ``e_c x e_d x |lam, mu>``: the dynamical shifts of
    the ``T`` factors are carried by the state itself, the left ``R`` reads
    the ``lam`` variable of the final state and the right ``R`` reads the
    ``mu`` variable (the ``h3`` shift in the second space). ``T1`` carries
    ``u``, ``T2`` carries ``v`` and ``R`` carries ``u - v``. Returns the
    largest coefficient difference over all ``c, d``.
    """
    n = params.N
    worst = 0.0
    for c, d in itertools.product(range(n), repeat=2):
        st = {((c, d),) + _key(lam, mu): 1.0}
        left = _apply_R(_apply_T(_apply_T(st, 1, v, params), 0, u, params), u - v, params, "lam")
        right = _apply_T(_apply_T(_apply_R(st, u - v, params, "mu"), 0, u, params), 1, v, params)
        for key in set(left) | set(right):
            worst = max(worst, abs(left.get(key, 0) - right.get(key, 0)))
    return float(worst)


def transfer_trace_on_diagonal(lam, u: complex, params: EllipticParams) -> dict:
    """``sum_i T^i_i |lam, lam>`` as a map from the new vertex to its coefficient."""
    out = {}
    for i in range(params.N):
        nl = shift(lam, i, params.eta)
        out[_key(nl, nl)[0]] = ruijsenaars_L(lam, lam, i, i, u, params)
    return out


# difference operator --------------------------------------------------------

def ruijsenaars_coefficient(lam, i: int, params: EllipticParams) -> complex:
    """``prod_{j != i} theta(c eta/N + lam_j - lam_i) / theta(lam_j - lam_i)``."""
    lam = np.asarray(lam, dtype=complex)
    g = params.c * params.eta / params.N
    val = 1.0 + 0j
    for j in range(params.N):
        if j != i:
            d = lam[j] - lam[i]
            val *= theta(g + d, params.tau) / _safe_theta(d, params.tau)
    return val


def lattice_points(base, shape, eta: complex):
    """Vertices ``base + eta * n`` for ``n`` in the box, keyed by ``n``."""
    base = np.asarray(base, dtype=complex)
    for n in itertools.product(*(range(s) for s in shape)):
        yield n, base + eta * np.asarray(n)


def ruijsenaars_apply(psi: np.ndarray, base, params: EllipticParams) -> np.ndarray:
    """``(H psi)(lam) = sum_i coeff_i(lam) psi(lam - eta e_i)`` on a sampled window.

    ``psi`` has one axis per component of ``lam`` and samples
    ``psi(base + eta * n)``. Sites whose neighbour ``n - e_i`` falls outside
    the window are returned as NaN. The overall normalization is 1.
    """
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != params.N:
        raise ValueError("psi needs one axis per component of lam")
    if min(psi.shape) < 2:
        raise ValueError("window must be at least two samples wide in every direction")
    out = np.zeros_like(psi)
    for n, lam in lattice_points(base, psi.shape, params.eta):
        total = 0j
        for i in range(params.N):
            m = list(n)
            m[i] -= 1
            if m[i] < 0:
                total = np.nan
                break
            total += ruijsenaars_coefficient(lam, i, params) * psi[tuple(m)]
        out[n] = total
    return out


# random generic points ------------------------------------------------------

def sample_generic_point(rng: np.random.Generator, params: EllipticParams, with_mu: bool = False,
                         max_tries: int = 100):
    """Draw ``(lam, mu, u, v)`` away from every pole used by the residual checks.

    Draws that trip the pole guard are resampled. ``mu`` is ``None`` unless
    requested.
    """
    n = params.N

    def cplx(size, scale):
        return scale * (rng.uniform(-1, 1, size) + 0.3j * rng.uniform(-1, 1, size))

    def clear(x):
        return not any(near_lattice(x + k * params.eta, params.tau, 1e-3) for k in range(-3, 4))

    for _ in range(max_tries):
        lam = cplx(n, 0.6)
        mu = cplx(n, 0.6) if with_mu else None
        u, v = cplx(2, 0.4)
        diffs = [lam[i] - lam[j] for i in range(n) for j in range(n) if i != j]
        diffs += [u, v, u + v, u - v]
        if all(clear(x) for x in diffs):
            return lam, mu, u, v
    raise SingularConfigurationError("could not draw a generic point")

"""Bloch coherent states, Majorana points and the Wehrl entropy of spin states.

Conventions
-----------
* States of spin ``j`` are arrays ``psi[k]`` with ``m = j - k`` (``m = j ... -j``).
* ``p = cos^2(theta/2)``; the coherent state at ``(theta, phi)`` has
  ``psi_m = C(2j, j+m)^(1/2) p^((j+m)/2) (1-p)^((j-m)/2) exp(-i m phi)``.
* The overlap polynomial of a state is ``P(z) = sum_m C(2j, j+m)^(1/2) z^(j+m) psi_m``.
  Its roots ``z_k`` (with ``inf`` padding for a degree deficit) are stored in
  :class:`MajoranaState`. Root ``z`` corresponds to the spinor ``|up> - z |down>``,
  whose Bloch vector is the Majorana point; the coherent state that the
  polynomial annihilates sits at the antipode. ``z = 0`` is the north pole and
  ``z = inf`` the south pole.
* Chordal distances are measured on the sphere of radius 1/2, so antipodal
  points have squared chordal distance 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.linalg as la
from scipy.optimize import minimize
from scipy.special import comb

from .spinalg import as_spin, spin_matrices


def _twoj(j) -> int:
    return int(2 * as_spin(j))


def _binoms(j) -> np.ndarray:
    n = _twoj(j)
    return comb(n, np.arange(n + 1))


@dataclass(frozen=True)
class SpinState:
    j: Fraction
    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "j", as_spin(self.j))
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.shape != (_twoj(self.j) + 1,):
            raise ValueError(f"spin {self.j} needs {_twoj(self.j) + 1} amplitudes, got {a.shape}")
        object.__setattr__(self, "amplitudes", a)

    @property
    def normalized(self) -> bool:
        return abs(np.vdot(self.amplitudes, self.amplitudes).real - 1) < 1e-12

    def normalize(self) -> "SpinState":
        return SpinState(self.j, self.amplitudes / np.linalg.norm(self.amplitudes))

    @classmethod
    def basis(cls, j, m) -> "SpinState":
        j = as_spin(j)
        a = np.zeros(_twoj(j) + 1, dtype=complex)
        a[int(j - Fraction(m))] = 1
        return cls(j, a)

    @classmethod
    def random(cls, j, rng) -> "SpinState":
        n = _twoj(j) + 1
        a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        return cls(j, a / np.linalg.norm(a))


@dataclass(frozen=True)
class MajoranaState:
    j: Fraction
    roots: np.ndarray
    c: float
    phase: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "j", as_spin(self.j))
        r = np.asarray(self.roots, dtype=complex).reshape(-1)
        if r.size != _twoj(self.j):
            raise ValueError(f"spin {self.j} needs {_twoj(self.j)} roots, got {r.size}")
        object.__setattr__(self, "roots", r)

    def spinors(self) -> np.ndarray:
        return np.array([root_to_spinor(z) for z in self.roots])

    def points(self) -> np.ndarray:
        """Majorana points as unit vectors."""
        return np.array([spinor_to_vector(s) for s in self.spinors()])


def root_to_spinor(z: complex) -> np.ndarray:
    """Normalized spinor ``|up> - z|down>``; ``z = inf`` gives ``|down>``."""
    if not np.isfinite(z):
        return np.array([0.0, 1.0], dtype=complex)
    if abs(z) > 1:
        v = np.array([1 / z, -1.0], dtype=complex)
    else:
        v = np.array([1.0, -z], dtype=complex)
    return v / np.linalg.norm(v)


def spinor_to_vector(s: np.ndarray) -> np.ndarray:
    a, b = s / np.linalg.norm(s)
    ab = np.conj(a) * b
    return np.array([2 * ab.real, 2 * ab.imag, abs(a) ** 2 - abs(b) ** 2])


def vector_to_root(n: np.ndarray) -> complex:
    n = np.asarray(n, dtype=float) / np.linalg.norm(n)
    theta, phi = np.arccos(np.clip(n[2], -1, 1)), np.arctan2(n[1], n[0])
    if np.pi - theta < 1e-15:
        return complex(np.inf)
    return complex(-np.tan(theta / 2) * np.exp(1j * phi))


def coherent_state(j, theta: float, phi: float) -> SpinState:
    """Bloch coherent state pointing in direction ``(theta, phi)``."""
    n = _twoj(j)
    jj = n / 2
    m = jj - np.arange(n + 1)
    cp, sp_ = np.cos(theta / 2), np.sin(theta / 2)
    amp = np.sqrt(_binoms(j)[::-1]) * cp ** (jj + m) * sp_ ** (jj - m) * np.exp(-1j * m * phi)
    return SpinState(j, amp)


def symmetrized_product(spinors: np.ndarray) -> np.ndarray:
    """Components of ``P_j(w_1 x ... x w_2j)`` in the ``|j, m>`` basis (``m = j ... -j``)."""
    spinors = np.asarray(spinors, dtype=complex)
    n = len(spinors)
    poly = np.array([1.0 + 0j])
    for a, b in spinors:
        poly = np.convolve(poly, [a, b])  # highest power of x first
    # poly[k] multiplies x^(n-k), i.e. n-k up spins, m = n/2 - k
    return poly / np.sqrt(comb(n, np.arange(n + 1))[::-1])


def overlap_polynomial(state: SpinState) -> np.ndarray:
    """Coefficients of ``P(z)`` ordered from the highest power ``z^(2j)`` down."""
    return np.sqrt(_binoms(state.j)[::-1]) * state.amplitudes


def majorana_factorize(state: SpinState, tol: float = 1e-14) -> MajoranaState:
    """Majorana roots, normalization ``c`` and phase of a spin state."""
    psi = np.asarray(state.amplitudes, dtype=complex)
    if not np.any(np.abs(psi) > 0):
        raise ValueError("zero state has no Majorana representation")
    psi = psi / np.linalg.norm(psi)
    coeffs = overlap_polynomial(SpinState(state.j, psi))
    n = len(coeffs) - 1
    big = np.abs(coeffs).max()
    lead = int(np.argmax(np.abs(coeffs) > tol * big))
    finite = np.roots(coeffs[lead:]) if n - lead > 0 else np.array([], dtype=complex)
    roots = np.concatenate([finite.astype(complex), np.full(lead, np.inf, dtype=complex)])
    v = symmetrized_product([root_to_spinor(z) for z in roots])
    c = 1.0 / np.vdot(v, v).real
    ref = np.sqrt(c) * v
    k = int(np.argmax(np.abs(ref)))
    phase = psi[k] / ref[k]
    return MajoranaState(state.j, roots, float(c), complex(phase / abs(phase)))


def majorana_from_points(j, points) -> MajoranaState:
    """Majorana state whose points are the given unit vectors (phase 1)."""
    roots = np.array([vector_to_root(p) for p in points], dtype=complex)
    v = symmetrized_product([root_to_spinor(z) for z in roots])
    return MajoranaState(j, roots, float(1.0 / np.vdot(v, v).real))


def majorana_reconstruct(mj: MajoranaState) -> SpinState:
    v = symmetrized_product(mj.spinors())
    return SpinState(mj.j, mj.phase * np.sqrt(mj.c) * v)


def _north_rotation(spinor: np.ndarray) -> np.ndarray:
    """SU(2) matrix mapping the normalized spinor ``(a, b)`` to ``|up>``."""
    a, b = spinor / np.linalg.norm(spinor)
    return np.array([[np.conj(a), np.conj(b)], [-b, a]])


def _harmonic_weights(twoj: int) -> np.ndarray:
    # weight of m = j - k is sum_{n=0}^{k} 1/(2j+1-n)
    return np.cumsum(1.0 / (twoj + 1 - np.arange(twoj + 1)))


def wehrl_entropy_formula(mj: MajoranaState) -> float:
    """Wehrl entropy from the Majorana points.

    Each point is rotated to the north pole in turn; the rotated state
    contributes ``sum_m w_m |psi_m|^2`` with ``w_m = sum_{n=0}^{j-m} 1/(2j+1-n)``,
    and ``-ln c`` is added once.
    """
    spinors = mj.spinors()
    c = 1.0 / np.vdot(symmetrized_product(spinors), symmetrized_product(spinors)).real
    w = _harmonic_weights(len(spinors))
    total = 0.0
    for s in spinors:
        g = _north_rotation(s)
        rotated = symmetrized_product(spinors @ g.T)
        total += c * float(np.dot(w, np.abs(rotated) ** 2))
    return total - np.log(c)


@lru_cache(maxsize=16)
def _product_nodes(n_theta: int, n_phi: int):
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    w = np.outer(wx / 2, np.full(n_phi, 1.0 / n_phi))
    for a in (x, phi, w):
        a.setflags(write=False)
    return np.arccos(x), phi, w


@dataclass(frozen=True)
class SphereQuadrature:
    """Product rule: Gauss-Legendre in ``cos(theta)`` and trapezoid in ``phi``.

    Weights are normalized to the measure ``dOmega / 4 pi`` (they sum to 1).
    """

    n_theta: int = 64
    n_phi: int = 128

    def nodes(self):
        return _product_nodes(self.n_theta, self.n_phi)

    @property
    def degree(self) -> int:
        return self.n_theta

    def integrate(self, func) -> float:
        """Integrate ``func(theta[:, None], phi[None, :])`` over the normalized sphere."""
        theta, phi, w = self.nodes()
        return float(np.sum(w * func(theta[:, None], phi[None, :])))

    def husimi_grid(self, state: "SpinState") -> np.ndarray:
        """``|<Omega|psi>|^2`` on the product grid, shape ``(n_theta, n_phi)``."""
        theta, phi, _ = self.nodes()
        amp = _coherent_rows(state.j, theta) * state.amplitudes
        phases = np.exp(1j * np.outer(phi, _m_values(state.j)))
        return np.abs(amp @ phases.T) ** 2

    def integrate_grid(self, values: np.ndarray) -> float:
        return float(np.sum(self.nodes()[2] * values))


def _m_values(j) -> np.ndarray:
    n = _twoj(j)
    return n / 2 - np.arange(n + 1)


def _coherent_rows(j, theta: np.ndarray) -> np.ndarray:
    """Real parts ``C^(1/2) cos(theta/2)^(j+m) sin(theta/2)^(j-m)`` per ``theta`` row."""
    n = _twoj(j)
    m = _m_values(j)
    cp, sp_ = np.cos(theta / 2)[:, None], np.sin(theta / 2)[:, None]
    return np.sqrt(_binoms(j)) * cp ** (n / 2 + m) * sp_ ** (n / 2 - m)


HIGH_ORDER = SphereQuadrature(256, 512)


def husimi(state: SpinState, theta, phi) -> np.ndarray:
    """``|<Omega|psi>|^2`` on a grid of directions (broadcasting ``theta`` and ``phi``)."""
    n = _twoj(state.j)
    jj = n / 2
    m = jj - np.arange(n + 1)
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    cp, sp_ = np.cos(theta / 2)[..., None], np.sin(theta / 2)[..., None]
    conj_coh = np.sqrt(_binoms(state.j)[::-1]) * cp ** (jj + m) * sp_ ** (jj - m) \
        * np.exp(1j * m * phi[..., None])
    return np.abs(conj_coh @ state.amplitudes) ** 2


def _xlogx(q: np.ndarray) -> np.ndarray:
    out = np.zeros_like(q)
    mask = q > 0
    out[mask] = q[mask] * np.log(q[mask])
    return out


def wehrl_entropy_quadrature(state: SpinState, quad: SphereQuadrature = HIGH_ORDER) -> float:
    """``-(2j+1) int dOmega/4pi  Q ln Q`` with ``Q = |<Omega|psi>|^2``."""
    if quad.degree < 4 * float(state.j) + 8:
        raise ValueError("quadrature degree too low for this spin")
    n = _twoj(state.j) + 1
    return -n * quad.integrate_grid(_xlogx(quad.husimi_grid(state)))


def husimi_normalization(state: SpinState, quad: SphereQuadrature = SphereQuadrature()) -> float:
    return (_twoj(state.j) + 1) * quad.integrate_grid(quad.husimi_grid(state))


def log_c_quadrature(state: SpinState, quad: SphereQuadrature = HIGH_ORDER, subtract: bool = True) -> float:
    """``2j + int dOmega/4pi ln Q``; equals ``ln c`` of the Majorana representation.

    ``ln Q`` has logarithmic singularities at the zeros of ``Q``. With
    ``subtract`` the terms ``ln((1 + Omega.n_k)/2)`` are removed from the
    integrand and their exact integrals (each ``-1``) added back; ``n_k`` are
    the directions whose antipodes are the zeros of ``Q``.
    """
    q = quad.husimi_grid(state)
    logq = np.log(q)
    offset = 0.0
    if subtract:
        theta, phi, _ = quad.nodes()
        omega = np.stack([np.sin(theta)[:, None] * np.cos(phi)[None, :],
                          np.sin(theta)[:, None] * np.sin(phi)[None, :],
                          np.cos(theta)[:, None] * np.ones_like(phi)[None, :]], axis=-1)
        for n in majorana_factorize(state).points():
            logq = logq - np.log((1 + omega @ n) / 2)
            offset -= 1.0
    return _twoj(state.j) + quad.integrate_grid(logq) + offset


def chordal_sq(n1, n2) -> float:
    """Squared chordal distance on the sphere of radius 1/2."""
    n1 = np.asarray(n1, float) / np.linalg.norm(n1)
    n2 = np.asarray(n2, float) / np.linalg.norm(n2)
    return float((1 - np.dot(n1, n2)) / 2)


def closed_form_entropy(j, points) -> float:
    """Low-spin closed forms of the Wehrl entropy in terms of chordal distances.

    ``points`` are the ``2j`` Majorana points as 3-vectors; the squared chordal
    distances are derived from them.
    """
    j = as_spin(j)
    pts = np.asarray(points, float)
    if pts.shape != (int(2 * j), 3):
        raise ValueError(f"spin {j} needs {int(2 * j)} points")
    d = lambda a, b: chordal_sq(pts[a], pts[b])
    if j == 1:
        mu = d(0, 1)
        c = 1 / (1 - mu / 2)
        return 2 / 3 + c * mu / 2 - np.log(c)
    if j == Fraction(3, 2):
        nu, mu, eps = d(0, 1), d(0, 2), d(1, 2)
        c = 1 / (1 - (eps + mu + nu) / 3)
        return 3 / 4 + c * ((eps + mu + nu) / 3 - (eps * mu + eps * nu + mu * nu) / 6) - np.log(c)
    if j == 2:
        nu, mu, alpha = d(0, 1), d(0, 2), d(0, 3)
        eps, beta, gamma = d(1, 2), d(1, 3), d(2, 3)
        edges = {(0, 1): nu, (0, 2): mu, (0, 3): alpha, (1, 2): eps, (1, 3): beta, (2, 3): gamma}
        lines = sum(edges.values())
        opp = alpha * eps + beta * mu + gamma * nu
        stars = alpha * mu * nu + eps * beta * nu + eps * mu * gamma + alpha * beta * gamma
        keys = list(edges)
        adj = sum(edges[a] * edges[b] for i, a in enumerate(keys) for b in keys[i + 1:] if set(a) & set(b))
        c = 1 / (1 - lines / 4 + opp / 12)
        sigma = (-stars / 2 - 5 * opp / 3 - adj + 3 * lines) / 12
        return 4 / 5 + c * sigma - np.log(c)
    raise ValueError("closed forms exist for j in {1, 3/2, 2}")


def wigner_rotation(j, axis, angle: float) -> np.ndarray:
    """``exp(-i angle n.S)`` in the ``|j, m>`` basis."""
    sx, sy, sz, _, _ = spin_matrices(j)
    n = np.asarray(axis, float) / np.linalg.norm(axis)
    return la.expm(-1j * angle * (n[0] * sx + n[1] * sy + n[2] * sz))


def _points_from_angles(x: np.ndarray) -> np.ndarray:
    th, ph = x[0::2], x[1::2]
    return np.column_stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])


def lieb_conjecture_scan(j, n_samples: int = 20, optimizer_steps: int = 200, seed: int = 0) -> dict:
    """Search for the minimum Wehrl entropy over Majorana configurations.

    Random starting configurations are refined by L-BFGS on the point
    angles. The result is evidence, not a certificate.
    """
    j = as_spin(j)
    n = int(2 * j)
    rng = np.random.default_rng(seed)
    entropy = lambda x: wehrl_entropy_formula(majorana_from_points(j, _points_from_angles(x)))
    best, best_x = np.inf, None
    for _ in range(n_samples):
        x0 = np.column_stack([np.arccos(rng.uniform(-1, 1, n)), rng.uniform(0, 2 * np.pi, n)]).reshape(-1)
        res = minimize(entropy, x0, method="L-BFGS-B", options={"maxiter": optimizer_steps})
        if res.fun < best:
            best, best_x = float(res.fun), res.x
    target = n / (n + 1)
    return {
        "j": float(j),
        "min_entropy": best,
        "coherent_value": target,
        "argmin_points": _points_from_angles(best_x).tolist(),
        "counterexample": bool(best < target - 1e-7),
    }


def norm_power_check(state: SpinState, s: int, quad: SphereQuadrature = SphereQuadrature()) -> float:
    """``(2js+1) int dOmega/4pi |<Omega|psi>|^(2s)``; at most 1 for integer ``s``."""
    if int(s) != s or s < 1:
        raise ValueError("s must be a positive integer")
    jf = float(state.j)
    if quad.degree < s * 4 * jf + 8:
        raise ValueError("quadrature degree too low")
    return (2 * jf * s + 1) * quad.integrate_grid(quad.husimi_grid(state) ** s)


def jensen_lower_bound_check(state: SpinState, quad: SphereQuadrature = HIGH_ORDER):
    """Wehrl entropy and the lower bound ``ln((4j+1)/(2j+1))``."""
    jf = float(state.j)
    return wehrl_entropy_quadrature(state, quad), float(np.log((4 * jf + 1) / (2 * jf + 1)))

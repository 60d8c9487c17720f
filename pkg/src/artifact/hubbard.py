"""Hubbard-type Hamiltonians and their spin / pseudo-spin symmetries.

Each site carries the four states ``|n_up n_dn>`` ordered
``|00>, |01>, |10>, |11>`` (the up mode is the more significant factor).
On a site ``a_up = c x 1`` and ``a_dn = Z x c`` with ``c = [[0, 1], [0, 0]]``
and ``Z = diag(1, -1)``, so the two modes of one site anticommute.
By default operators on different sites commute; ``jordan_wigner=True``
attaches parity strings so that all modes anticommute.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.sparse as sp

from .spinalg import DomainError, HilbertSpace, SparseOperator, max_entry

_C = np.array([[0.0, 1.0], [0.0, 0.0]])
_Z = np.diag([1.0, -1.0])
_I2 = np.eye(2)

A_UP = np.kron(_C, _I2)
A_DN = np.kron(_Z, _C)
PARITY = np.kron(_Z, _Z)


@dataclass(frozen=True)
class HubbardParams:
    u: float = 0.0
    mu: float = 0.0
    t: float = 0.0
    r: float = 0.0
    s: float = 0.0
    v: float = 0.0
    z: complex = 0.0

    def symmetry_residual(self, e: float = 1.0) -> float:
        """``v - (r + s + (u - 2 mu)/e)``; zero on the symmetric family."""
        return self.v - (self.r + self.s + (self.u - 2 * self.mu) / e)


class FermiSpace:
    """Fock space of ``n_sites`` sites with two spin modes each."""

    def __init__(self, n_sites: int, jordan_wigner: bool = False):
        if n_sites < 1:
            raise ValueError("need at least one site")
        self.n_sites = n_sites
        self.jordan_wigner = jordan_wigner
        self.space = HilbertSpace((4,) * n_sites)
        self._cache: dict = {}

    @property
    def dim(self) -> int:
        return self.space.dim

    def _embed(self, op: np.ndarray, site: int, string: bool) -> sp.csr_matrix:
        mats = []
        for k in range(self.n_sites):
            if k == site:
                mats.append(sp.csr_matrix(op))
            elif string and k < site:
                mats.append(sp.csr_matrix(PARITY))
            else:
                mats.append(sp.identity(4, format="csr"))
        return reduce(lambda a, b: sp.kron(a, b, format="csr"), mats)

    def local(self, op: np.ndarray, site: int) -> sp.csr_matrix:
        """Embed an even (parity-preserving) on-site operator."""
        return self._embed(np.asarray(op, dtype=complex), site, False)

    def a(self, site: int, spin: int) -> sp.csr_matrix:
        """Annihilation operator; ``spin`` is 0 for up and 1 for down."""
        key = ("a", site, spin)
        if key not in self._cache:
            self._cache[key] = self._embed(A_UP if spin == 0 else A_DN, site, self.jordan_wigner).astype(complex)
        return self._cache[key]

    def adag(self, site: int, spin: int) -> sp.csr_matrix:
        return self.a(site, spin).conj().T.tocsr()

    def n(self, site: int, spin: int) -> sp.csr_matrix:
        return self.adag(site, spin) @ self.a(site, spin)

    def identity(self) -> sp.csr_matrix:
        return sp.identity(self.dim, dtype=complex, format="csr")

    def zero(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.dim, self.dim), dtype=complex)

    def wrap(self, m, hermitian=True) -> SparseOperator:
        return SparseOperator(self.space, m, hermitian)


def chain_bonds(n_sites: int, periodic: bool = False) -> list[tuple[int, int]]:
    """Nearest-neighbour pairs of a chain, each unordered pair once."""
    bonds = [(i, i + 1) for i in range(n_sites - 1)]
    if periodic and n_sites > 2:
        bonds.append((n_sites - 1, 0))
    return bonds


def edges_per_site(n_sites: int, bonds) -> np.ndarray:
    e = np.zeros(n_sites, dtype=int)
    for i, j in bonds:
        e[i] += 1
        e[j] += 1
    return e


def _hopping(fs: FermiSpace, bonds) -> sp.csr_matrix:
    h = fs.zero()
    for i, j in bonds:
        for sg in (0, 1):
            h = h + fs.adag(j, sg) @ fs.a(i, sg) + fs.adag(i, sg) @ fs.a(j, sg)
    return h


def _local_terms(fs: FermiSpace, u: float, mu: float) -> sp.csr_matrix:
    h = fs.zero()
    for i in range(fs.n_sites):
        h = h + u * fs.n(i, 0) @ fs.n(i, 1) - mu * (fs.n(i, 0) + fs.n(i, 1))
    return h


def standard_hubbard(params: HubbardParams, n_sites: int, periodic: bool = False,
                     jordan_wigner: bool = False, fs: FermiSpace | None = None) -> SparseOperator:
    """``u sum n_up n_dn - mu sum n + t sum_<ij>,sigma (a+_j a_i + h.c.)`` on a chain."""
    fs = fs or FermiSpace(n_sites, jordan_wigner)
    h = _local_terms(fs, params.u, params.mu) + params.t * _hopping(fs, chain_bonds(n_sites, periodic))
    return fs.wrap(h)


def local_generators(fs: FermiSpace, site: int) -> dict:
    a_up, a_dn = fs.a(site, 0), fs.a(site, 1)
    ad_up, ad_dn = fs.adag(site, 0), fs.adag(site, 1)
    n_up, n_dn = ad_up @ a_up, ad_dn @ a_dn
    return {
        "spin": (ad_up @ a_dn, ad_dn @ a_up, n_up - n_dn),
        "pseudo": (ad_up @ ad_dn, a_dn @ a_up, n_up + n_dn - fs.identity()),
    }


def symmetry_generators(fs: FermiSpace) -> dict:
    """Global spin and pseudo-spin triples ``(X+, X-, H)`` as site sums.

    With Jordan-Wigner strings the pseudo-spin ladder operators carry the
    staggered sign ``(-1)^i``, which is what makes hopping on a bipartite
    chain commute with them. In the commuting convention no sign is needed.
    """
    out = {"spin": [fs.zero()] * 3, "pseudo": [fs.zero()] * 3}
    for i in range(fs.n_sites):
        loc = local_generators(fs, i)
        sign = (-1) ** i if fs.jordan_wigner else 1
        loc["pseudo"] = (sign * loc["pseudo"][0], sign * loc["pseudo"][1], loc["pseudo"][2])
        for key in out:
            out[key] = [acc + g for acc, g in zip(out[key], loc[key])]
    return {k: tuple(v) for k, v in out.items()}


GENERATOR_NAMES = ("X+_m", "X-_m", "H_m", "X+_s", "X-_s", "H_s")


def commutation_report(H, generators: dict) -> dict:
    """Largest entry of ``[H, G]`` for each of the six global generators."""
    h = H.matrix if isinstance(H, SparseOperator) else H
    gens = list(generators["spin"]) + list(generators["pseudo"])
    return {name: max_entry(h @ g - g @ h) for name, g in zip(GENERATOR_NAMES, gens)}


def _edge_array(n_sites: int, bonds, e) -> np.ndarray:
    if e is None:
        e = edges_per_site(n_sites, bonds)
    e = np.broadcast_to(np.asarray(e, dtype=float), (n_sites,))
    if np.any(e < 1):
        raise ValueError("edges per site must be at least 1")
    return e


def hsym_hamiltonian(params: HubbardParams, n_sites: int, periodic: bool = False,
                     e=None, jordan_wigner: bool = False, fs: FermiSpace | None = None,
                     bonds=None) -> SparseOperator:
    """General symmetric next-neighbour Hamiltonian ``K + K^+``.

    ``K`` collects, per site, ``u n_up n_dn - mu n`` and, per bond ``(i, j)``
    (each bond once) and spin ``sigma``: hopping ``t``, neighbour densities
    ``r`` (antiparallel) and ``s`` (parallel), pair hopping with coefficient
    ``(2 mu - u)/e_i``, spin exchange ``s - r``, the triple-density term ``v``
    and the density-modified hopping ``z``, ``z*``. The hermitian conjugate
    is added to the whole of ``K``. With ``r = s = v = z = 0`` and
    ``u = 2 mu`` the result is the standard Hubbard Hamiltonian with
    parameters ``(2u, 2mu, t)``, still at half filling.

    ``e`` is the number of edges per site (scalar or per-site array). By
    default it is read off the bond list. On a graph with uniform ``e`` the
    model commutes with both su(2) algebras iff
    ``v = r + s + (u - 2 mu)/e`` (see :func:`symmetric_v`).

    The pair annihilator on site ``j`` is ``a_dn a_up`` (the adjoint of the
    pair creator), so that pair hopping is ``X+_s(i) X-_s(j)``.
    """
    fs = fs or FermiSpace(n_sites, jordan_wigner)
    if fs.n_sites != n_sites:
        raise ValueError("FermiSpace size does not match n_sites")
    bonds = chain_bonds(n_sites, periodic) if bonds is None else list(bonds)
    e = _edge_array(n_sites, bonds, e)
    p = params
    a, ad, num = fs.a, fs.adag, fs.n
    one = fs.identity()
    k = fs.zero()
    for i in range(n_sites):
        k = k + p.u * num(i, 0) @ num(i, 1) - p.mu * (num(i, 0) + num(i, 1))
    for i, j in bonds:
        d_i = num(i, 0) @ num(i, 1)
        d_j = num(j, 0) @ num(j, 1)
        pair = ad(i, 0) @ ad(i, 1) @ a(j, 1) @ a(j, 0)
        for sg in (0, 1):
            ms = 1 - sg
            k = k + p.t * ad(i, sg) @ a(j, sg)
            k = k + p.r * num(i, sg) @ num(j, ms) + p.s * num(i, sg) @ num(j, sg)
            k = k + (2 * p.mu - p.u) / e[i] * pair
            k = k + (p.s - p.r) * ad(i, sg) @ a(i, ms) @ ad(j, ms) @ a(j, sg)
            k = k + p.v * (d_i @ d_j - d_i @ num(j, sg) - num(i, sg) @ d_j)
            k = k + ad(i, ms) @ a(j, ms) @ (p.z * (num(i, sg) - one) @ num(j, sg)
                                             + np.conj(p.z) * num(i, sg) @ (num(j, sg) - one))
    return fs.wrap((k + k.conj().T).tocsr())


def symmetric_v(params: HubbardParams, e: float = 1.0) -> float:
    """The value of ``v`` making the symmetric model commute, for uniform ``e``."""
    return params.r + params.s + (params.u - 2 * params.mu) / e


def particle_hole_down(fs: FermiSpace) -> sp.csr_matrix:
    """Unitary exchanging ``a_dn`` and ``a_dn^+`` on every site (commuting convention)."""
    return reduce(lambda x, y: sp.kron(x, y, format="csr"),
                  [sp.csr_matrix(np.kron(_I2, np.array([[0.0, 1.0], [1.0, 0.0]])))] * fs.n_sites).astype(complex)


def _pseudo_two_site():
    fs = FermiSpace(1)
    xp, xm, h = (g.toarray() for g in local_generators(fs, 0)["pseudo"])
    return xp, xm, h


def twist_operator(q: float):
    """Twist ``M = 1 + (alpha - 1) xi + beta f`` on two sites and its ingredients.

    ``f = X-_s x X+_s - X+_s x X-_s`` and ``xi = -f^2``. The constants obey
    ``alpha -/+ beta = q^(+/-1/2)``; this sign of ``beta`` is the one for which
    ``M`` carries the classical coproduct into ``X x q^(-H/2) + q^(H/2) x X``.
    """
    if not np.isreal(q) or q <= 0:
        raise DomainError("q must be a positive real number")
    q = float(np.real(q))
    xp, xm, h = _pseudo_two_site()
    f = np.kron(xm, xp) - np.kron(xp, xm)
    xi = 0.5 * (np.kron(h @ h, h @ h) - np.kron(h, h))
    alpha = (np.sqrt(q) + 1 / np.sqrt(q)) / 2
    beta = (1 / np.sqrt(q) - np.sqrt(q)) / 2
    m = np.eye(16) + (alpha - 1) * xi + beta * f
    return {"M": m, "f": f, "xi": xi, "alpha": float(alpha), "beta": float(beta),
            "X+": xp, "X-": xm, "H": h}


def _qpow(h: np.ndarray, q: float, power: float) -> np.ndarray:
    # h is diagonal in the occupation basis
    return np.diag(q ** (power * np.diag(h).real)).astype(complex)


def coproducts(q: float):
    """Classical and Jimbo-Drinfel'd coproducts of the local pseudo-spin triple."""
    xp, xm, h = _pseudo_two_site()
    eye = np.eye(4)
    classical = {k: np.kron(x, eye) + np.kron(eye, x) for k, x in (("X+", xp), ("X-", xm), ("H", h))}
    quantum = {k: np.kron(x, _qpow(h, q, -0.5)) + np.kron(_qpow(h, q, 0.5), x) for k, x in (("X+", xp), ("X-", xm))}
    quantum["H"] = classical["H"]
    return classical, quantum


def twist_operator_check(q: float) -> dict:
    """Residuals of the twist identities with ``M* = M^+``.

    ``coproduct_residuals`` measure ``M D_c(x) M* - D_q(x)`` for
    ``x = X+, X-, H``. ``MMstar_identity_residual`` measures
    ``M M* - (1 + (alpha^2 - 1) xi)``, the form quoted in the literature;
    ``MMstar_measured_residual`` measures ``M M* - (1 + 2 beta^2 xi)``,
    which is what ``M`` actually satisfies.
    """
    tw = twist_operator(q)
    m = tw["M"]
    mstar = m.conj().T
    classical, quantum = coproducts(q)
    cop = {k: float(np.abs(m @ classical[k] @ mstar - quantum[k]).max()) for k in classical}
    mm = m @ mstar
    eye = np.eye(16)
    return {
        "q": float(q),
        "alpha": tw["alpha"],
        "beta": tw["beta"],
        "coproduct_residuals": cop,
        "MMstar_identity_residual": float(np.abs(mm - eye - (tw["alpha"] ** 2 - 1) * tw["xi"]).max()),
        "MMstar_measured_residual": float(np.abs(mm - eye - 2 * tw["beta"] ** 2 * tw["xi"]).max()),
        "xi_projector_residual": float(np.abs(tw["xi"] @ tw["xi"] - tw["xi"]).max()),
        "xi_equals_minus_f2_residual": float(np.abs(tw["xi"] + tw["f"] @ tw["f"]).max()),
    }

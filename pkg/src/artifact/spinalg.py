"""Spin operator algebra on tensor-product Hilbert spaces.

Basis conventions used throughout the package:

* a single spin-``s`` site uses the basis ``|s, m>`` ordered ``m = s, s-1, ..., -s``;
* a many-site basis is the Kronecker product with site 0 most significant,
  i.e. lexicographic in the site magnetic quantum numbers.

Operators are stored as scipy CSR matrices wrapped in :class:`SparseOperator`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class EigenSolveError(RuntimeError):
    """The iterative eigensolver failed to converge."""


HERMITIAN_TOL = 1e-13
DEGENERACY_TOL = 1e-8
DENSE_CUTOFF = 1024


def as_spin(s) -> Fraction:
    """Validate a spin value and return it as an exact fraction."""
    try:
        f = Fraction(s).limit_denominator(1000)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"spin must be a number, got {s!r}") from exc
    if abs(float(f) - float(s)) > 1e-12 or (2 * f).denominator != 1 or f < Fraction(1, 2):
        raise DomainError(f"spin must be a positive half-integer, got {s!r}")
    return f


@dataclass(frozen=True)
class SpinSite:
    spin: Fraction

    def __post_init__(self):
        object.__setattr__(self, "spin", as_spin(self.spin))

    @property
    def dim(self) -> int:
        return int(2 * self.spin) + 1


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered tensor product of local spaces.

    ``dims`` holds the local dimensions; ``sites`` keeps the spin labels when
    the space is a spin space (it is empty for e.g. fermionic spaces).
    """

    dims: tuple[int, ...]
    sites: tuple[SpinSite, ...] = ()

    @classmethod
    def spins(cls, spins: Iterable) -> "HilbertSpace":
        sites = tuple(SpinSite(s) for s in spins)
        return cls(tuple(site.dim for site in sites), sites)

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Complex sparse matrix acting on a :class:`HilbertSpace`."""

    space: HilbertSpace
    matrix: sp.csr_matrix
    hermitian: bool = False

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=complex)
        m.sum_duplicates()
        m.sort_indices()
        if m.shape != (self.space.dim, self.space.dim):
            raise ValueError(f"matrix shape {m.shape} does not match space dimension {self.space.dim}")
        object.__setattr__(self, "matrix", m)
        if self.hermitian and not is_hermitian(m):
            raise ValueError("operator flagged hermitian but is not")

    # arithmetic keeps the space and infers hermiticity conservatively
    def _wrap(self, m, hermitian=None) -> "SparseOperator":
        if hermitian is None:
            hermitian = is_hermitian(m)
        return SparseOperator(self.space, m, hermitian)

    def __add__(self, other):
        if isinstance(other, SparseOperator):
            return self._wrap(self.matrix + other.matrix)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, SparseOperator):
            return self._wrap(self.matrix - other.matrix)
        return NotImplemented

    def __neg__(self):
        return SparseOperator(self.space, -self.matrix, self.hermitian)

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            herm = self.hermitian and np.isreal(scalar)
            return SparseOperator(self.space, self.matrix * scalar, herm)
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, SparseOperator):
            return self._wrap(self.matrix @ other.matrix)
        return self.matrix @ other

    def dag(self) -> "SparseOperator":
        return SparseOperator(self.space, self.matrix.conj().T.tocsr(), self.hermitian)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def expectation(self, vec: np.ndarray) -> complex:
        return complex(np.vdot(vec, self.matrix @ vec))

    def dump(self, path) -> None:
        """Write the nonzero entries as little-endian (u64 row, u64 col, f64 re, f64 im) records."""
        coo = self.matrix.tocoo()
        rec = np.empty(coo.nnz, dtype=[("row", "<u8"), ("col", "<u8"), ("re", "<f8"), ("im", "<f8")])
        rec["row"], rec["col"] = coo.row, coo.col
        rec["re"], rec["im"] = coo.data.real, coo.data.imag
        rec.tofile(path)

    @staticmethod
    def load(path, space: HilbertSpace, hermitian: bool = False) -> "SparseOperator":
        rec = np.fromfile(path, dtype=[("row", "<u8"), ("col", "<u8"), ("re", "<f8"), ("im", "<f8")])
        m = sp.coo_matrix((rec["re"] + 1j * rec["im"], (rec["row"], rec["col"])),
                          shape=(space.dim, space.dim))
        return SparseOperator(space, m.tocsr(), hermitian)


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    diff = (m - m.conj().T) if sp.issparse(m) else sp.csr_matrix(m - m.conj().T)
    if diff.nnz == 0:
        return True
    return float(abs(diff).max()) <= tol * max(1.0, float(abs(m).max()))


def commutator(a, b):
    """Matrix commutator of operators or (sparse) matrices."""
    a = a.matrix if isinstance(a, SparseOperator) else a
    b = b.matrix if isinstance(b, SparseOperator) else b
    return a @ b - b @ a


def max_entry(m) -> float:
    """Largest absolute entry of a dense or sparse matrix (0 for empty)."""
    if isinstance(m, SparseOperator):
        m = m.matrix
    if sp.issparse(m):
        return float(abs(m).max()) if m.nnz else 0.0
    m = np.asarray(m)
    return float(np.abs(m).max()) if m.size else 0.0


def spin_matrices(s):
    """Spin operators in the ``|s, m>`` basis with ``m = s ... -s``.

    Returns
    -------
    tuple of ndarray
        ``(Sx, Sy, Sz, S+, S-)`` as dense complex matrices of size ``2s+1``.
    """
    s = float(as_spin(s))
    m = s - np.arange(int(round(2 * s)) + 1)
    # <m+1|S+|m> = sqrt(s(s+1) - m(m+1)); row index of m+1 is one above m
    sp_ = np.diag(np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1)), k=1).astype(complex)
    sm = sp_.conj().T
    sx = (sp_ + sm) / 2
    sy = (sp_ - sm) / 2j
    sz = np.diag(m).astype(complex)
    return sx, sy, sz, sp_, sm


def _kron_chain(mats: Sequence) -> sp.csr_matrix:
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), mats)


def embed(op, site: int, space: HilbertSpace, hermitian: bool | None = None) -> SparseOperator:
    """Place a local operator at ``site`` and the identity everywhere else."""
    op = np.asarray(op.toarray() if sp.issparse(op) else op, dtype=complex)
    if not 0 <= site < space.n_sites:
        raise IndexError(f"site {site} out of range for {space.n_sites} sites")
    if op.shape != (space.dims[site], space.dims[site]):
        raise ValueError(f"operator shape {op.shape} does not match local dimension {space.dims[site]}")
    left = int(np.prod(space.dims[:site], dtype=np.int64))
    right = int(np.prod(space.dims[site + 1:], dtype=np.int64))
    m = _kron_chain([sp.identity(left, format="csr"), sp.csr_matrix(op), sp.identity(right, format="csr")])
    if hermitian is None:
        hermitian = bool(np.allclose(op, op.conj().T, atol=HERMITIAN_TOL))
    return SparseOperator(space, m, hermitian)


def embed_product(ops: dict[int, np.ndarray], space: HilbertSpace) -> sp.csr_matrix:
    """Tensor product of local operators on several sites (identity elsewhere)."""
    mats = [sp.csr_matrix(np.asarray(ops[k], dtype=complex)) if k in ops else sp.identity(d, format="csr")
            for k, d in enumerate(space.dims)]
    return _kron_chain(mats)


def site_spin_operators(space: HilbertSpace, site: int):
    """Embedded ``(Sx, Sy, Sz)`` at one site as CSR matrices."""
    sx, sy, sz, _, _ = spin_matrices(space.sites[site].spin)
    return tuple(embed(o, site, space).matrix for o in (sx, sy, sz))


def total_spin_components(space: HilbertSpace, sites: Iterable[int] | None = None):
    """``(Sx, Sy, Sz)`` summed over ``sites`` (default: all)."""
    sites = range(space.n_sites) if sites is None else list(sites)
    tot = [sp.csr_matrix((space.dim, space.dim), dtype=complex) for _ in range(3)]
    for k in sites:
        for a, o in enumerate(site_spin_operators(space, k)):
            tot[a] = tot[a] + o
    return tuple(tot)


def heisenberg_bond(i: int, j: int, coupling: float, space: HilbertSpace) -> SparseOperator:
    """``coupling * S_i . S_j``."""
    if i == j:
        raise ValueError("bond endpoints must differ")
    si = spin_matrices(space.sites[i].spin)[:3]
    sj = spin_matrices(space.sites[j].spin)[:3]
    m = sum(embed_product({i: a, j: b}, space) for a, b in zip(si, sj))
    return SparseOperator(space, float(coupling) * m, hermitian=True)


def total_spin_squared(space: HilbertSpace, sites: Iterable[int] | None = None) -> SparseOperator:
    """``(sum_i S_i)^2`` over the chosen sites."""
    comps = total_spin_components(space, sites)
    return SparseOperator(space, sum(c @ c for c in comps), hermitian=True)


def spin_rotation_pi_about_y(space: HilbertSpace) -> SparseOperator:
    """Product over sites of ``exp(-i pi S^y)``, i.e. ``|s,m> -> (-1)^(s-m) |s,-m>``."""
    mats = []
    for site in space.sites:
        d = site.dim
        u = np.zeros((d, d))
        for k in range(d):
            # column k is |s, m> with s - m = k; its image is |s, -m> at row d-1-k
            u[d - 1 - k, k] = (-1) ** k
        mats.append(sp.csr_matrix(u))
    return SparseOperator(space, _kron_chain(mats), hermitian=False)


@dataclass(frozen=True)
class EigenResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    degeneracy_tol: float = DEGENERACY_TOL
    blocks: tuple[tuple[int, int], ...] = field(default=())

    def ground_block(self) -> np.ndarray:
        lo, hi = self.blocks[0]
        return self.eigenvectors[:, lo:hi]


def _fix_phase(v: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    idx = np.flatnonzero(np.abs(v) > tol)
    if idx.size:
        ph = v[idx[0]] / abs(v[idx[0]])
        v = v / ph
    return v


def _canonical_block(vecs: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of the span of ``vecs``.

    Pivoted QR on the conjugate transpose selects rows; the span is brought
    to an echelon-like form on those rows and re-orthonormalized in order.
    """
    g = vecs.shape[1]
    if g == 1:
        return _fix_phase(vecs[:, 0])[:, None]
    _, _, piv = la.qr(vecs.conj().T, pivoting=True, mode="economic")
    rows = np.sort(piv[:g])
    b = vecs @ np.linalg.inv(vecs[rows, :])
    q, _ = np.linalg.qr(b)
    return np.column_stack([_fix_phase(q[:, k]) for k in range(g)])


def _group_blocks(evals: np.ndarray, tol: float) -> list[tuple[int, int]]:
    scale = max(1.0, float(np.max(np.abs(evals))) if evals.size else 1.0)
    blocks, start = [], 0
    for k in range(1, len(evals) + 1):
        if k == len(evals) or evals[k] - evals[k - 1] > tol * scale:
            blocks.append((start, k))
            start = k
    return blocks


def eigensolve(op, k: int | None = None, which: str = "lowest", *, maxiter: int | None = None,
               degeneracy_tol: float = DEGENERACY_TOL, dense_cutoff: int = DENSE_CUTOFF) -> EigenResult:
    """Lowest ``k`` (``which='lowest'``) or all (``which='full'``) eigenpairs.

    Small problems are solved densely; larger ones use ARPACK on the sparse
    matrix. Degenerate eigenvalues are grouped into blocks whose basis is made
    deterministic, and every vector has its first nonzero entry real positive.
    """
    if isinstance(op, SparseOperator):
        if not op.hermitian:
            raise ValueError("eigensolve requires a hermitian operator")
        m = op.matrix
    else:
        m = sp.csr_matrix(op, dtype=complex) if not sp.issparse(op) else op.tocsr()
        if not is_hermitian(m):
            raise ValueError("eigensolve requires a hermitian operator")
    n = m.shape[0]
    if which not in ("lowest", "full"):
        raise ValueError("which must be 'lowest' or 'full'")
    if which == "full":
        k = n
    k = 1 if k is None else int(k)
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}]")

    if n <= dense_cutoff or k >= n - 1:
        evals, evecs = la.eigh(m.toarray())
        # extend past k to keep a degenerate block intact
        kk = k
        while kk < n and evals[kk] - evals[kk - 1] <= degeneracy_tol * max(1.0, abs(evals).max()):
            kk += 1
        evals, evecs = evals[:kk], evecs[:, :kk]
    else:
        kk = k
        while True:
            try:
                rng = np.random.default_rng(12345)
                v0 = rng.standard_normal(n) + 0j
                evals, evecs = spla.eigsh(m, k=min(kk + 1, n - 1), which="SA", v0=v0,
                                          maxiter=maxiter, tol=1e-13)
            except spla.ArpackNoConvergence as exc:
                raise EigenSolveError(str(exc)) from exc
            order = np.argsort(evals)
            evals, evecs = evals[order], evecs[:, order]
            gap = evals[-1] - evals[-2]
            if gap > degeneracy_tol * max(1.0, abs(evals).max()) or kk + 2 >= n:
                evals, evecs = evals[:-1], evecs[:, :-1]
                break
            kk += 4
    blocks = _group_blocks(evals, degeneracy_tol)
    cols = []
    for lo, hi in blocks:
        cols.append(_canonical_block(evecs[:, lo:hi]))
    evecs = np.column_stack(cols) if cols else evecs
    return EigenResult(np.asarray(evals, dtype=float), evecs, degeneracy_tol, tuple(blocks))


def psd_sqrt(a: np.ndarray, clamp: float = 1e-13) -> np.ndarray:
    """Square root of a hermitian positive semidefinite matrix via ``eigh``.

    Eigenvalues in ``(-clamp, 0)`` are treated as zero; clearly negative
    eigenvalues raise.
    """
    a = (a + a.conj().T) / 2
    w, v = la.eigh(a)
    scale = max(1.0, float(np.abs(w).max()) if w.size else 1.0)
    if w.size and w.min() < -clamp * scale:
        raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {w.min():.3e})")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def kls_trace_inequality_residual(c: np.ndarray, M: np.ndarray, N: np.ndarray) -> float:
    """Gap in the trace inequality ``|tr c^+ M c N^+| <= (tr cL M cL M^+ + tr cR N cR N^+)/2``.

    ``c`` is ``m x n``, ``M`` is ``m x m`` and ``N`` is ``n x n``; ``cL = sqrt(c c^+)``
    and ``cR = sqrt(c^+ c)``. The returned value is nonnegative up to rounding.
    """
    c, M, N = (np.asarray(x, dtype=complex) for x in (c, M, N))
    if c.ndim != 2 or M.shape != (c.shape[0], c.shape[0]) or N.shape != (c.shape[1], c.shape[1]):
        raise ValueError(f"incompatible shapes c{c.shape}, M{M.shape}, N{N.shape}")
    cl = psd_sqrt(c @ c.conj().T)
    cr = psd_sqrt(c.conj().T @ c)
    lhs = 0.5 * (np.trace(cl @ M @ cl @ M.conj().T) + np.trace(cr @ N @ cr @ N.conj().T)).real
    rhs = abs(np.trace(c.conj().T @ M @ c @ N.conj().T))
    return float(lhs - rhs)

"""Checkerboard (planar pyrochlore) antiferromagnets.

The lattice has sites ``(x, y)`` on an ``Lx x Ly`` grid. The plaquette with
lower-left corner ``(x, y)`` is crossed (a *box*) iff ``x + y`` is even; every
box carries the Hamiltonian ``(S_box)^2 / 2`` where ``S_box`` is the total
spin of its four sites. Sites are numbered ``k = x * Ly + y``.

For reflection arguments the lattice is cut between columns ``Lx/2 - 1`` and
``Lx/2``; the mirror image of ``(x, y)`` is ``(Lx - 1 - x, y)``. A state is
written as a matrix ``Psi`` with rows labelled by the left sites (in order)
and columns by the mirror images of those sites. In the rotated convention
the right factor is expanded in the basis ``U|beta>`` with ``U`` the spin
rotation by pi about the y axis, so ``Psi = c U^T`` and ``c = Psi U``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.special import logsumexp

from .spinalg import (
    HilbertSpace, SparseOperator, eigensolve, spin_rotation_pi_about_y,
    total_spin_components, total_spin_squared,
)


@dataclass(frozen=True)
class CheckerboardLattice:
    Lx: int
    Ly: int
    periodic: tuple[bool, bool]
    boxes: tuple[tuple[int, int, int, int], ...]
    spin: float = 0.5

    @property
    def n_sites(self) -> int:
        return self.Lx * self.Ly

    @property
    def sites(self) -> list[tuple[int, int]]:
        return [(x, y) for x in range(self.Lx) for y in range(self.Ly)]

    def index(self, x: int, y: int) -> int:
        return x * self.Ly + y

    @property
    def bonds(self) -> list[tuple[int, int]]:
        """Six bonds per box (four edges, two diagonals), with multiplicity."""
        out = []
        for box in self.boxes:
            for a in range(4):
                for b in range(a + 1, 4):
                    out.append((box[a], box[b]))
        return out

    @property
    def reflection_line(self) -> int | None:
        """Cut lies between columns ``reflection_line - 1`` and ``reflection_line``."""
        return self.Lx // 2 if self.Lx % 2 == 0 else None

    def left_sites(self) -> list[int]:
        return [self.index(x, y) for x in range(self.Lx // 2) for y in range(self.Ly)]

    def mirror(self, k: int) -> int:
        x, y = divmod(k, self.Ly)
        return self.index(self.Lx - 1 - x, y)

    @property
    def fully_periodic(self) -> bool:
        return all(self.periodic)


def build_checkerboard(Lx: int, Ly: int, periodic=True, s=0.5):
    """Checkerboard lattice and its spin Hilbert space.

    Parameters
    ----------
    Lx, Ly : int
        Number of sites per direction.
    periodic : bool or pair of bool
        Periodicity per direction.
    s : half-integer
        Spin on each site.
    """
    per = (bool(periodic), bool(periodic)) if np.isscalar(periodic) else tuple(map(bool, periodic))
    if Lx < 2 or Ly < 2:
        raise ValueError("need at least two sites per direction")
    if (Lx * Ly) % 2:
        raise ValueError("Lx * Ly must be even")
    if (per[0] and Lx % 2) or (per[1] and Ly % 2):
        raise ValueError("periodic directions need an even number of sites")
    nx = Lx if per[0] else Lx - 1
    ny = Ly if per[1] else Ly - 1
    boxes = []
    for x in range(nx):
        for y in range(ny):
            if (x + y) % 2 == 0:
                x1, y1 = (x + 1) % Lx, (y + 1) % Ly
                boxes.append(tuple(k * Ly + m for k, m in ((x, y), (x1, y), (x, y1), (x1, y1))))
    covered = {k for b in boxes for k in b}
    missing = sorted(set(range(Lx * Ly)) - covered)
    if missing:
        raise ValueError(f"sites {missing} belong to no box")
    lat = CheckerboardLattice(Lx, Ly, per, tuple(boxes), float(s))
    return lat, HilbertSpace.spins([s] * (Lx * Ly))


def box_field_values(lat: CheckerboardLattice, fields=None) -> np.ndarray:
    """Per-box field values; a scalar ``B`` means the homogeneous choice ``b = B/2``."""
    if fields is None:
        return np.zeros(len(lat.boxes))
    if np.isscalar(fields):
        return np.full(len(lat.boxes), float(fields) / 2)
    b = np.asarray(fields, dtype=float)
    if b.shape != (len(lat.boxes),):
        raise ValueError(f"need {len(lat.boxes)} box fields, got {b.shape}")
    return b


def box_spin(lat: CheckerboardLattice, space: HilbertSpace, box: int):
    return total_spin_components(space, lat.boxes[box])


def checkerboard_hamiltonian(lat: CheckerboardLattice, space: HilbertSpace, fields=None) -> SparseOperator:
    """``H = 1/2 sum_x (S_x)^2`` with ``(S3_x - b_x)^2`` replacing the third component.

    ``fields`` is ``None``, a homogeneous value ``B`` (giving ``b_x = B/2``) or
    a sequence with one value per box.
    """
    b = box_field_values(lat, fields)
    h = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    eye = sp.identity(space.dim, format="csr")
    for k, box in enumerate(lat.boxes):
        s1, s2, s3 = total_spin_components(space, box)
        s3b = s3 - b[k] * eye
        h = h + 0.5 * (s1 @ s1 + s2 @ s2 + s3b @ s3b)
    return SparseOperator(space, h, hermitian=True)


def ground_state_report(H: SparseOperator, space: HilbertSpace, lat: CheckerboardLattice | None = None,
                        max_dim: int = 65536) -> dict:
    """Ground energy, degeneracy, total spin and box magnetizations of the ground block."""
    if space.dim > max_dim:
        raise ValueError(f"dimension {space.dim} exceeds cap {max_dim}")
    res = eigensolve(H, k=1)
    vecs = res.ground_block()
    s2 = total_spin_squared(space)
    s2_vals = np.array([s2.expectation(v).real for v in vecs.T])
    report = {
        "e0": float(res.eigenvalues[0]),
        "degeneracy": int(vecs.shape[1]),
        "s2": s2_vals.tolist(),
        "stot": [float((-1 + np.sqrt(1 + 4 * max(v, 0.0))) / 2) for v in s2_vals],
        "vectors": vecs,
    }
    if lat is not None:
        mag3, mag1 = [], []
        for k in range(len(lat.boxes)):
            s1, _, s3 = box_spin(lat, space, k)
            mag3.append([np.vdot(v, s3 @ v).real for v in vecs.T])
            mag1.append([np.vdot(v, s1 @ v).real for v in vecs.T])
        report["box_s3"] = mag3
        report["box_s1"] = mag1
        report["ice_rule_max_abs"] = float(max(np.abs(mag3).max(), np.abs(mag1).max()))
    return report


@dataclass(frozen=True)
class CoeffMatrix:
    c: np.ndarray
    rotated_right: bool
    left_sites: tuple[int, ...]
    right_sites: tuple[int, ...]
    local_dim: int

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.c, self.c).real)


def _split_permutation(lat: CheckerboardLattice):
    if lat.reflection_line is None:
        raise ValueError("reflection split needs an even number of columns")
    left = lat.left_sites()
    right = [lat.mirror(k) for k in left]
    return left, right


def _right_rotation(lat: CheckerboardLattice, n_right: int) -> np.ndarray:
    return spin_rotation_pi_about_y(HilbertSpace.spins([lat.spin] * n_right)).toarray().real


def coefficient_matrix(state: np.ndarray, lat: CheckerboardLattice, space: HilbertSpace,
                       rotated: bool = True) -> CoeffMatrix:
    """Matrix ``c`` of a state with respect to the reflection split."""
    left, right = _split_permutation(lat)
    d = space.dims[0]
    psi = np.asarray(state, dtype=complex).reshape(space.dims)
    psi = psi.transpose(left + right).reshape(d ** len(left), d ** len(right))
    c = psi @ _right_rotation(lat, len(right)) if rotated else psi
    return CoeffMatrix(c, rotated, tuple(left), tuple(right), d)


def state_from_coefficients(cm: CoeffMatrix, space: HilbertSpace, lat: CheckerboardLattice) -> np.ndarray:
    """Inverse of :func:`coefficient_matrix`."""
    c = np.asarray(cm.c, dtype=complex)
    psi = c @ _right_rotation(lat, len(cm.right_sites)).T if cm.rotated_right else c
    order = list(cm.left_sites) + list(cm.right_sites)
    psi = psi.reshape(space.dims)
    return psi.transpose(np.argsort(order)).reshape(-1)


def energy_of_coefficients(c: np.ndarray, H: SparseOperator, lat, space, template: CoeffMatrix) -> float:
    cm = CoeffMatrix(np.asarray(c), template.rotated_right, template.left_sites, template.right_sites,
                     template.local_dim)
    v = state_from_coefficients(cm, space, lat)
    return float(np.vdot(v, H.matrix @ v).real / np.vdot(v, v).real)


def canonical_singlet_state(lat: CheckerboardLattice, space: HilbertSpace) -> np.ndarray:
    """Normalized state with unit coefficient matrix in the rotated basis."""
    left, right = _split_permutation(lat)
    dl = space.dims[0] ** len(left)
    cm = CoeffMatrix(np.eye(dl) / np.sqrt(dl), True, tuple(left), tuple(right), space.dims[0])
    return state_from_coefficients(cm, space, lat)


def positivity_upgrade(cm: CoeffMatrix, H: SparseOperator, lat, space, tol: float = 1e-12) -> dict:
    """Energies of ``c`` and of the positive matrix ``sqrt(c c^+)`` built from it.

    The input is first replaced by its symmetric part (or, if that vanishes,
    its antisymmetric part), both of which give states of the same energy
    class as ``c`` when the Hamiltonian is reflection symmetric.
    """
    c = np.asarray(cm.c)
    sym = (c + c.T) / 2
    anti = (c - c.T) / 2
    ns, na = np.linalg.norm(sym), np.linalg.norm(anti)
    if max(ns, na) <= tol * max(1.0, np.linalg.norm(c)):
        raise ValueError("both symmetric and antisymmetric parts vanish")
    use_sym = ns >= na
    part = sym if use_sym else anti
    w, v = la.eigh(part @ part.conj().T)
    cl = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    w, v = la.eigh(part.conj().T @ part)
    cr = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    e = lambda m: energy_of_coefficients(m, H, lat, space, cm)
    return {
        "E_c": e(c),
        "E_part": e(part),
        "E_abs": e(cl),
        "E_abs_right": e(cr),
        "symmetric_part_used": bool(use_sym),
        "c_abs": cl,
    }


def canonical_spin_zero_overlap(state: np.ndarray, lat, space) -> complex:
    """Overlap of a state with the canonical singlet state (trace of ``c``, normalized)."""
    cm = coefficient_matrix(state, lat, space, rotated=True)
    dl = cm.c.shape[0]
    return complex(np.trace(cm.c) / np.sqrt(dl) / np.sqrt(cm.norm2))


def _ground_energy(H) -> float:
    return float(eigensolve(H, k=1).eigenvalues[0])


def richardson_second_derivative(f, steps: Sequence[float] = (0.2, 0.1, 0.05)):
    """Central second difference with Richardson extrapolation over halving steps.

    Returns ``(estimate, error_estimate, raw_differences)``.
    """
    f0 = f(0.0)
    raw = [(f(h) - 2 * f0 + f(-h)) / h**2 for h in steps]
    table = [raw]
    while len(table[-1]) > 1:
        prev, p = table[-1], 2 * len(table)
        fac = 2.0**p
        table.append([(fac * prev[k + 1] - prev[k]) / (fac - 1) for k in range(len(prev) - 1)])
    best = table[-1][0]
    err = abs(best - table[-2][-1]) if len(table) > 1 else float("nan")
    return best, err, raw


def susceptibility_check(lat: CheckerboardLattice, space: HilbertSpace,
                         B_samples: Sequence[float] = (-0.2, -0.1, 0.1, 0.2),
                         steps: Sequence[float] = (0.2, 0.1, 0.05)) -> dict:
    """Field-response bounds of the checkerboard antiferromagnet.

    ``E(B)`` is the ground energy of ``H0 - B S3_tot`` (the Zeeman form of the
    homogeneous field with ``b_x = B/2``). The global bound reads
    ``E(B) + (Lambda/16) B^2 >= E(0)`` so that ``chi = -E''(0)/Lambda <= 1/8``.
    For a field ``b`` on a single box ``z`` the energy ``E_z(b)`` of
    ``H0 - b S3_z`` obeys ``E_z(b) + b^2/2 >= E(0)`` and
    ``chi_loc = -E_z''(0)/4 <= 1/4``.
    """
    if not lat.fully_periodic:
        raise ValueError("global susceptibility bound needs a periodic lattice")
    lam = lat.n_sites
    h0 = checkerboard_hamiltonian(lat, space)
    s3 = total_spin_components(space)[2]
    e0 = _ground_energy(h0)

    def energy(B):
        if B == 0:
            return e0
        return _ground_energy(SparseOperator(space, h0.matrix - B * s3, True))

    e_of_b = {float(B): energy(float(B)) for B in B_samples}
    residuals = {B: e + lam / 16 * B**2 - e0 for B, e in e_of_b.items()}
    d2, d2_err, raw = richardson_second_derivative(energy, steps)
    chi = -d2 / lam

    local = []
    for z in range(len(lat.boxes)):
        s3z = box_spin(lat, space, z)[2]
        ez = lambda b: e0 if b == 0 else _ground_energy(SparseOperator(space, h0.matrix - b * s3z, True))
        res_z = [ez(b) + b**2 / 2 - e0 for b in B_samples]
        d2z, d2z_err, _ = richardson_second_derivative(ez, steps)
        local.append({"box": z, "chi_loc": -d2z / 4, "chi_loc_error": d2z_err, "bound_residuals": res_z})
    return {
        "E0": e0,
        "E": e_of_b,
        "bound_residuals": residuals,
        "min_residual": float(min(residuals.values())) if residuals else 0.0,
        "chi_estimate": chi,
        "chi_error": d2_err / lam,
        "second_differences": raw,
        "local": local,
        "chi_loc_max": float(max(l["chi_loc"] for l in local)),
        "local_min_residual": float(min(min(l["bound_residuals"]) for l in local)),
    }


def finite_temperature_check(lat: CheckerboardLattice, space: HilbertSpace,
                             betas: Sequence[float] = (0.5, 1.0, 2.0),
                             B_samples: Sequence[float] = (-0.2, -0.1, 0.1, 0.2), max_sites: int = 8) -> dict:
    """Free-energy version of the field bound using full diagonalization.

    ``F(B) = -ln tr exp(-beta (H0 - B S3_tot)) / beta`` must satisfy
    ``F(B) + (Lambda/16) B^2 >= F(0)``; the zero-field magnetization vanishes.
    """
    if lat.n_sites > max_sites:
        raise ValueError(f"full diagonalization capped at {max_sites} sites")
    lam = lat.n_sites
    h0 = checkerboard_hamiltonian(lat, space).toarray()
    s3 = total_spin_components(space)[2].toarray()
    w0, v0 = la.eigh(h0)
    s3_diag = np.einsum("ij,jk,ki->i", v0.conj().T, s3, v0).real
    out = {"residuals": {}, "magnetization": {}}
    for beta in betas:
        f = lambda B: -logsumexp(-beta * la.eigvalsh(h0 - B * s3)) / beta
        f0 = f(0.0)
        out["residuals"][float(beta)] = {float(B): float(f(B) + lam / 16 * B**2 - f0) for B in B_samples}
        p = np.exp(-beta * (w0 - w0.min()))
        out["magnetization"][float(beta)] = float(np.dot(p, s3_diag) / p.sum())
    out["min_residual"] = float(min(min(r.values()) for r in out["residuals"].values()))
    out["max_abs_magnetization"] = float(max(abs(m) for m in out["magnetization"].values()))
    return out

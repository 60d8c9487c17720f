import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact.hubbard import (
    FermiSpace, HubbardParams, chain_bonds, commutation_report, coproducts, edges_per_site,
    hsym_hamiltonian, local_generators, particle_hole_down, standard_hubbard, symmetric_v,
    symmetry_generators, twist_operator, twist_operator_check,
)
from artifact.spinalg import DomainError, eigensolve, is_hermitian, max_entry


def comm(a, b):
    return a @ b - b @ a


@pytest.mark.parametrize("jw", [False, True])
def test_local_anticommutation(jw):
    fs = FermiSpace(2, jw)
    a = fs.a
    for site in range(2):
        assert max_entry(a(site, 0) @ a(site, 1) + a(site, 1) @ a(site, 0)) == 0
        for sg in (0, 1):
            acomm = a(site, sg) @ fs.adag(site, sg) + fs.adag(site, sg) @ a(site, sg)
            assert max_entry(acomm - fs.identity()) == 0
    cross = a(0, 0) @ a(1, 0)
    other = a(1, 0) @ a(0, 0)
    if jw:
        assert max_entry(cross + other) == 0
    else:
        assert max_entry(cross - other) == 0


def test_single_site_spectrum():
    p = HubbardParams(u=1.7, mu=0.4)
    ev = eigensolve(standard_hubbard(p, 1), which="full").eigenvalues
    assert np.allclose(np.sort(ev), np.sort([0, -0.4, -0.4, 1.7 - 0.8]))


def test_two_sites_without_hopping_is_additive():
    p = HubbardParams(u=1.3, mu=0.2)
    one = np.array([0, -0.2, -0.2, 1.3 - 0.4])
    ev = eigensolve(standard_hubbard(p, 2), which="full").eigenvalues
    assert np.allclose(np.sort(ev), np.sort(np.add.outer(one, one).ravel()))


@pytest.mark.parametrize("jw", [False, True])
def test_free_two_site_ground_energy(jw):
    h = standard_hubbard(HubbardParams(t=1.0), 2, jordan_wigner=jw)
    assert abs(eigensolve(h).eigenvalues[0] + 2) < 1e-12


def test_periodic_pair_is_single_bond():
    assert chain_bonds(2, periodic=True) == [(0, 1)]
    assert chain_bonds(4, periodic=True) == [(0, 1), (1, 2), (2, 3), (3, 0)]
    assert list(edges_per_site(4, chain_bonds(4))) == [1, 2, 2, 1]


def test_hermitian():
    p = HubbardParams(u=1, mu=0.3, t=0.5, r=0.2, s=-0.4, v=0.1, z=0.3 - 0.2j)
    assert is_hermitian(standard_hubbard(p, 3, periodic=True).matrix)
    assert is_hermitian(hsym_hamiltonian(p, 3, periodic=True).matrix)


def test_single_site_generators():
    fs = FermiSpace(1)
    loc = local_generators(fs, 0)
    n_up, n_dn = fs.n(0, 0), fs.n(0, 1)
    assert max_entry(loc["spin"][2] - (n_up - n_dn)) == 0
    assert max_entry(loc["pseudo"][2] - (n_up + n_dn - fs.identity())) == 0
    one_s = loc["pseudo"][2] @ loc["pseudo"][2]
    one_m = loc["spin"][2] @ loc["spin"][2]
    assert max_entry(one_s + one_m - fs.identity()) == 0


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("jw", [False, True])
def test_su2_relations(n, jw):
    g = symmetry_generators(FermiSpace(n, jw))
    for key in ("spin", "pseudo"):
        xp, xm, h = g[key]
        assert max_entry(comm(xp, xm) - h) < 1e-12
        assert max_entry(comm(h, xp) - 2 * xp) < 1e-12
        assert max_entry(comm(h, xm) + 2 * xm) < 1e-12
    for a in g["spin"]:
        for b in g["pseudo"]:
            assert max_entry(comm(a, b)) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3])
def test_particle_hole_swaps_generators(n):
    fs = FermiSpace(n)
    u = particle_hole_down(fs)
    assert max_entry(u @ u.conj().T - fs.identity()) == 0
    g = symmetry_generators(fs)
    for a, b in zip(g["spin"], g["pseudo"]):
        assert max_entry(u @ a @ u.conj().T - b) < 1e-12
    for i in range(n):
        assert max_entry(u @ fs.a(i, 1) @ u.conj().T - fs.adag(i, 1)) < 1e-12


@pytest.mark.parametrize("n,periodic", [(2, False), (3, False), (4, True)])
@pytest.mark.parametrize("jw", [False, True])
def test_half_filling_commutes(n, periodic, jw):
    fs = FermiSpace(n, jw)
    h = standard_hubbard(HubbardParams(u=2, mu=1, t=0.7), n, periodic, fs=fs)
    rep = commutation_report(h, symmetry_generators(fs))
    assert max(rep.values()) < 1e-12


def test_away_from_half_filling_breaks_pseudo_spin():
    fs = FermiSpace(2)
    rep = commutation_report(standard_hubbard(HubbardParams(u=2, mu=0.3, t=0.7), 2, fs=fs),
                             symmetry_generators(fs))
    assert rep["X+_s"] > 1e-3
    assert max(rep[k] for k in ("X+_m", "X-_m", "H_m", "H_s")) < 1e-12


def test_local_part_commutes_at_half_filling():
    fs = FermiSpace(3)
    h = standard_hubbard(HubbardParams(u=0.9, mu=0.45), 3, fs=fs)
    assert max(commutation_report(h, symmetry_generators(fs)).values()) < 1e-12


def test_hsym_reduces_to_standard():
    # "+ h.c." applies to the whole expression, which doubles the on-site part
    p = HubbardParams(u=1.4, mu=0.7, t=0.3)
    for n, per in [(2, False), (3, True)]:
        a = hsym_hamiltonian(p, n, per).matrix
        b = standard_hubbard(HubbardParams(u=2.8, mu=1.4, t=0.3), n, per).matrix
        assert max_entry(a - b) < 1e-14


def test_hsym_pair_symmetric():
    fs = FermiSpace(2)
    g = symmetry_generators(fs)
    p = HubbardParams(u=1.1, mu=-0.2, t=0.4, r=0.3, s=-0.7, z=0.2 + 0.5j)
    p = HubbardParams(**{**p.__dict__, "v": symmetric_v(p, 1)})
    assert abs(p.symmetry_residual()) < 1e-15
    assert max(commutation_report(hsym_hamiltonian(p, 2, e=1, fs=fs), g).values()) < 1e-12
    q = HubbardParams(**{**p.__dict__, "v": p.v + 0.05})
    rep = commutation_report(hsym_hamiltonian(q, 2, e=1, fs=fs), g)
    assert max(rep[k] for k in ("X+_s", "X-_s")) > 1e-3


@pytest.mark.parametrize("n", [3, 4])
def test_hsym_ring_condition_scales_with_edges(n):
    fs = FermiSpace(n)
    g = symmetry_generators(fs)
    p = HubbardParams(u=0.8, mu=0.1, t=0.5, r=0.2, s=0.6, z=-0.3j)
    good = HubbardParams(**{**p.__dict__, "v": symmetric_v(p, 2)})
    assert max(commutation_report(hsym_hamiltonian(good, n, True, fs=fs), g).values()) < 1e-12
    naive = HubbardParams(**{**p.__dict__, "v": symmetric_v(p, 1)})
    assert max(commutation_report(hsym_hamiltonian(naive, n, True, fs=fs), g).values()) > 1e-3


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=7, max_size=7), st.booleans())
def test_hsym_symmetry_iff_condition(x, on_surface):
    u, mu, t, r, s, zr, zi = x
    p = HubbardParams(u=u, mu=mu, t=t, r=r, s=s, z=complex(zr, zi))
    v = symmetric_v(p, 1) + (0.0 if on_surface else 0.25)
    p = HubbardParams(**{**p.__dict__, "v": v})
    fs = FermiSpace(2)
    norm = max(commutation_report(hsym_hamiltonian(p, 2, e=1, fs=fs), symmetry_generators(fs)).values())
    assert (norm < 1e-10) == on_surface


def test_hsym_spin_symmetry_independent_of_v():
    fs = FermiSpace(2)
    p = HubbardParams(u=1, mu=0.2, t=0.3, r=0.1, s=0.4, v=3.0, z=0.5)
    rep = commutation_report(hsym_hamiltonian(p, 2, e=1, fs=fs), symmetry_generators(fs))
    assert max(rep[k] for k in ("X+_m", "X-_m", "H_m")) < 1e-12


def test_bad_edges():
    with pytest.raises(ValueError):
        hsym_hamiltonian(HubbardParams(), 2, e=0)


def test_twist_identity_at_q1():
    tw = twist_operator(1.0)
    assert np.array_equal(tw["M"], np.eye(16))
    rep = twist_operator_check(1.0)
    assert max(rep["coproduct_residuals"].values()) == 0
    assert rep["MMstar_identity_residual"] == 0


@pytest.mark.parametrize("q", [0.5, 2.0, 3.7])
def test_twist_coproducts(q):
    rep = twist_operator_check(q)
    assert max(rep["coproduct_residuals"].values()) < 1e-12
    assert rep["xi_projector_residual"] < 1e-15
    assert rep["xi_equals_minus_f2_residual"] < 1e-15
    assert rep["MMstar_measured_residual"] < 1e-12
    assert abs(rep["alpha"] ** 2 - rep["beta"] ** 2 - 1) < 1e-12


@pytest.mark.parametrize("q", [0.5, 2.0])
def test_quoted_mmstar_form_is_off_by_beta_squared(q):
    rep = twist_operator_check(q)
    assert abs(rep["MMstar_identity_residual"] - rep["beta"] ** 2) < 1e-12


def test_quantum_coproduct_is_not_classical():
    c, qd = coproducts(2.0)
    assert max_entry(c["X+"] - qd["X+"]) > 0.1


@pytest.mark.parametrize("q", [0.0, -1.0])
def test_twist_domain(q):
    with pytest.raises(DomainError):
        twist_operator_check(q)

import numpy as np
import pytest
import scipy.sparse as sp

from artifact.frustration import (
    CoeffMatrix, build_checkerboard, canonical_singlet_state, canonical_spin_zero_overlap,
    checkerboard_hamiltonian, coefficient_matrix, energy_of_coefficients, finite_temperature_check,
    ground_state_report, positivity_upgrade, state_from_coefficients, susceptibility_check,
)
from artifact.spinalg import eigensolve, max_entry, total_spin_components, total_spin_squared


@pytest.fixture(scope="module")
def box():
    lat, space = build_checkerboard(2, 2, periodic=False)
    return lat, space, checkerboard_hamiltonian(lat, space)


@pytest.fixture(scope="module")
def lat24():
    lat, space = build_checkerboard(2, 4, periodic=True)
    return lat, space, checkerboard_hamiltonian(lat, space)


def test_lattice_counts():
    lat, space = build_checkerboard(2, 2, periodic=True)
    assert lat.n_sites == 4 and len(lat.boxes) == 2
    assert all(set(b) == {0, 1, 2, 3} for b in lat.boxes)
    lat, space = build_checkerboard(2, 4, periodic=True)
    assert space.dim == 256 and len(lat.boxes) == 4 and lat.n_sites == 2 * len(lat.boxes)
    lat, _ = build_checkerboard(2, 2, periodic=False)
    assert len(lat.boxes) == 1 and len(lat.bonds) == 6


@pytest.mark.parametrize("L", [(2, 2), (2, 4), (4, 2), (4, 4), (2, 6), (6, 4)])
def test_each_site_in_two_boxes_when_periodic(L):
    lat, _ = build_checkerboard(*L, periodic=True)
    counts = np.bincount([k for b in lat.boxes for k in b], minlength=lat.n_sites)
    assert np.all(counts == 2)
    assert lat.n_sites == 2 * len(lat.boxes)
    assert lat.reflection_line == L[0] // 2


def test_periodic_2x2_is_one_box_twice():
    lat, space = build_checkerboard(2, 2, periodic=True)
    h = checkerboard_hamiltonian(lat, space)
    assert max_entry(h.matrix - total_spin_squared(space).matrix) < 1e-13


def test_bad_geometry():
    with pytest.raises(ValueError):
        build_checkerboard(3, 3, periodic=False)
    with pytest.raises(ValueError):
        build_checkerboard(3, 2, periodic=True)
    with pytest.raises(ValueError):
        build_checkerboard(3, 2, periodic=False)  # site column x=2 left out of every box


def test_single_box_spectrum(box):
    lat, space, h = box
    ev = eigensolve(h, which="full").eigenvalues
    vals, counts = np.unique(np.round(ev, 8), return_counts=True)
    assert np.allclose(vals, [0, 1, 3]) and list(counts) == [2, 9, 5]


def test_zero_field_equals_field_free(lat24):
    lat, space, h = lat24
    h0 = checkerboard_hamiltonian(lat, space, np.zeros(len(lat.boxes)))
    assert max_entry(h.matrix - h0.matrix) == 0
    with pytest.raises(ValueError):
        checkerboard_hamiltonian(lat, space, [0.1, 0.2])


@pytest.mark.parametrize("B", [-0.3, 0.1, 0.45])
def test_homogeneous_field_identity(lat24, B):
    lat, space, h = lat24
    hb = checkerboard_hamiltonian(lat, space, B).matrix
    s3 = total_spin_components(space)[2]
    expected = h.matrix - B * s3 + lat.n_sites / 16 * B**2 * sp.identity(space.dim)
    assert max_entry(hb - expected) < 1e-13


def test_single_box_ground_report(box):
    lat, space, h = box
    rep = ground_state_report(h, space, lat)
    assert rep["degeneracy"] == 2
    assert max(rep["s2"]) < 1e-10
    assert np.allclose(rep["stot"], 0, atol=1e-5)


@pytest.mark.parametrize("L", [(2, 4), (4, 2), (2, 6), (4, 4)])
def test_periodic_ground_states_singlets_and_ice_rule(L):
    lat, space = build_checkerboard(*L, periodic=True)
    rep = ground_state_report(checkerboard_hamiltonian(lat, space), space, lat)
    assert max(abs(x) for x in rep["s2"]) < 1e-10
    assert rep["ice_rule_max_abs"] < 1e-10


def test_ground_report_dimension_cap(lat24):
    lat, space, h = lat24
    with pytest.raises(ValueError):
        ground_state_report(h, space, lat, max_dim=100)


def test_coefficient_matrix_roundtrip(lat24):
    lat, space, _ = lat24
    rng = np.random.default_rng(0)
    v = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
    v /= np.linalg.norm(v)
    for rotated in (True, False):
        cm = coefficient_matrix(v, lat, space, rotated=rotated)
        assert np.isclose(np.trace(cm.c @ cm.c.conj().T).real, 1.0)
        assert np.abs(state_from_coefficients(cm, space, lat) - v).max() < 1e-12


def test_canonical_state_has_unit_matrix(lat24):
    lat, space, _ = lat24
    xi = canonical_singlet_state(lat, space)
    c = coefficient_matrix(xi, lat, space).c
    assert np.allclose(c, np.eye(len(c)) * c[0, 0])
    assert abs(canonical_spin_zero_overlap(xi, lat, space) - 1) < 1e-12
    assert abs(total_spin_squared(space).expectation(xi)) < 1e-12


def test_all_up_product_state_rank_one(lat24):
    lat, space, _ = lat24
    v = np.zeros(space.dim, complex)
    v[0] = 1.0
    c = coefficient_matrix(v, lat, space).c
    assert np.linalg.matrix_rank(c, tol=1e-12) == 1


def test_odd_split_rejected():
    lat, space = build_checkerboard(3, 4, periodic=(False, True))
    with pytest.raises(ValueError):
        coefficient_matrix(np.ones(space.dim) / np.sqrt(space.dim), lat, space)


def test_transpose_energy_invariance(lat24):
    lat, space, h = lat24
    rng = np.random.default_rng(4)
    template = coefficient_matrix(np.ones(space.dim), lat, space)
    for _ in range(5):
        c = rng.standard_normal(template.c.shape) + 1j * rng.standard_normal(template.c.shape)
        e1 = energy_of_coefficients(c, h, lat, space, template)
        e2 = energy_of_coefficients(c.T, h, lat, space, template)
        assert abs(e1 - e2) < 1e-12


@pytest.mark.parametrize("L", [(2, 2), (2, 4), (4, 2)])
def test_positivity_upgrade_on_ground_states(L):
    lat, space = build_checkerboard(*L, periodic=L != (2, 2))
    h = checkerboard_hamiltonian(lat, space)
    rep = ground_state_report(h, space, lat)
    for v in rep["vectors"].T:
        out = positivity_upgrade(coefficient_matrix(v, lat, space), h, lat, space)
        assert abs(out["E_abs"] - rep["e0"]) < 1e-9
        cm = coefficient_matrix(v, lat, space)
        upgraded = state_from_coefficients(CoeffMatrix(out["c_abs"], True, cm.left_sites, cm.right_sites, 2),
                                           space, lat)
        assert abs(canonical_spin_zero_overlap(upgraded, lat, space)) > 1e-3


def test_positivity_upgrade_variational_on_excited_state(box):
    lat, space, h = box
    res = eigensolve(h, which="full")
    e0 = res.eigenvalues[0]
    for k in range(2, 11):
        out = positivity_upgrade(coefficient_matrix(res.eigenvectors[:, k], lat, space), h, lat, space)
        assert out["E_abs"] >= e0 - 1e-12


def test_positivity_upgrade_rejects_zero(box):
    lat, space, h = box
    cm = coefficient_matrix(np.zeros(space.dim), lat, space)
    with pytest.raises(ValueError):
        positivity_upgrade(cm, h, lat, space)


def test_triplets_orthogonal_to_canonical_state(box):
    lat, space, h = box
    res = eigensolve(h, which="full")
    s2 = total_spin_squared(space)
    for v in res.eigenvectors.T:
        if abs(s2.expectation(v) - 2) < 1e-8:
            assert abs(canonical_spin_zero_overlap(v, lat, space)) < 1e-12


def test_susceptibility_bounds(lat24):
    lat, space, _ = lat24
    rep = susceptibility_check(lat, space, [-0.2, -0.1, 0.0, 0.1, 0.2])
    assert rep["bound_residuals"][0.0] == 0
    assert rep["min_residual"] >= -1e-9
    assert rep["chi_estimate"] <= 1 / 8 + 1e-6
    assert rep["chi_loc_max"] <= 1 / 4 + 1e-6
    assert rep["local_min_residual"] >= -1e-9


def test_susceptibility_requires_periodic(box):
    lat, space, _ = box
    with pytest.raises(ValueError):
        susceptibility_check(lat, space)


def test_finite_temperature(lat24):
    lat, space, _ = lat24
    out = finite_temperature_check(lat, space)
    assert out["min_residual"] >= -1e-9
    assert out["max_abs_magnetization"] < 1e-10

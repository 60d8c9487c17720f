import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from artifact.spinalg import (
    DomainError, HilbertSpace, SparseOperator, commutator, eigensolve, embed,
    heisenberg_bond, kls_trace_inequality_residual, max_entry, spin_matrices,
    spin_rotation_pi_about_y, total_spin_squared,
)

SPINS = [0.5, 1, 1.5, 2, 2.5]


@pytest.mark.parametrize("s", SPINS)
def test_su2_commutators(s):
    sx, sy, sz, splus, sminus = spin_matrices(s)
    assert np.abs(sx @ sy - sy @ sx - 1j * sz).max() < 1e-13
    assert np.abs(sy @ sz - sz @ sy - 1j * sx).max() < 1e-13
    assert np.abs(sz @ sx - sx @ sz - 1j * sy).max() < 1e-13
    casimir = sx @ sx + sy @ sy + sz @ sz
    assert np.allclose(casimir, s * (s + 1) * np.eye(len(sz)))


def test_spin_matrix_examples():
    sz = spin_matrices(0.5)[2]
    assert np.allclose(sz, np.diag([0.5, -0.5]))
    splus = spin_matrices(1)[3]
    # |1,0> is basis vector 1, |1,1> is basis vector 0
    assert np.allclose(splus @ np.array([0, 1, 0]), [np.sqrt(2), 0, 0])
    assert np.isclose(np.trace(spin_matrices(1.5)[2] @ spin_matrices(1.5)[2]).real, 5.0)


@pytest.mark.parametrize("s", [0, 0.3, -0.5, 1.25])
def test_bad_spin(s):
    with pytest.raises(DomainError):
        spin_matrices(s)


def test_embed():
    space = HilbertSpace.spins([0.5, 0.5])
    sx, sy, sz, _, _ = spin_matrices(0.5)
    assert np.allclose(embed(sz, 0, space).toarray(), np.diag([0.5, 0.5, -0.5, -0.5]))
    assert np.allclose(embed(np.eye(2), 1, space).toarray(), np.eye(4))
    assert max_entry(commutator(embed(sx, 0, space), embed(sy, 1, space))) == 0
    with pytest.raises(ValueError):
        embed(np.eye(3), 0, space)


def test_heisenberg_bond_spectra():
    space = HilbertSpace.spins([0.5, 0.5])
    res = eigensolve(heisenberg_bond(0, 1, 1.0, space), which="full")
    assert np.allclose(res.eigenvalues, [-0.75, 0.25, 0.25, 0.25], atol=1e-10)
    assert max_entry(heisenberg_bond(0, 1, 0.0, space)) == 0
    space1 = HilbertSpace.spins([1, 1])
    assert np.isclose(eigensolve(heisenberg_bond(0, 1, 1.0, space1)).eigenvalues[0], -2.0, atol=1e-10)
    with pytest.raises(ValueError):
        heisenberg_bond(1, 1, 1.0, space)


def test_eigensolve_basic():
    res = eigensolve(sp.diags([3.0, 1.0, 2.0]), k=1)
    assert np.isclose(res.eigenvalues[0], 1.0)
    with pytest.raises(ValueError):
        eigensolve(np.array([[0, 1], [0, 0]]), k=1)


def test_eigensolve_random_hermitian_residuals():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
    h = (a + a.conj().T) / 2
    res = eigensolve(h, which="full")
    norm = np.linalg.norm(h, 2)
    v = res.eigenvectors
    assert np.all(np.diff(res.eigenvalues) >= 0)
    assert np.linalg.norm(h @ v - v * res.eigenvalues, axis=0).max() <= 1e-9 * norm
    assert np.abs(v.conj().T @ v - np.eye(64)).max() <= 1e-9
    first = v[np.argmax(np.abs(v) > 1e-10, axis=0), np.arange(64)]
    assert np.all(np.abs(first.imag) < 1e-12) and np.all(first.real > 0)


def test_eigensolve_sparse_path_matches_dense():
    space = HilbertSpace.spins([0.5] * 10)
    h = sum((heisenberg_bond(i, (i + 1) % 10, 1.0, space) for i in range(1, 10)),
            heisenberg_bond(0, 1, 1.0, space))
    dense = eigensolve(h, k=3)
    sparse = eigensolve(h, k=3, dense_cutoff=10)
    assert np.allclose(dense.eigenvalues[:3], sparse.eigenvalues[:3], atol=1e-10)


def test_degenerate_block_is_deterministic():
    space = HilbertSpace.spins([0.5] * 4)
    s2 = total_spin_squared(space)
    r1 = eigensolve(s2, k=2)
    r2 = eigensolve(SparseOperator(space, s2.matrix.copy(), True), k=2)
    assert r1.blocks[0] == (0, 2)
    assert np.array_equal(r1.eigenvectors, r2.eigenvectors)


def test_total_spin_squared_spectra():
    four = eigensolve(total_spin_squared(HilbertSpace.spins([0.5] * 4)), which="full").eigenvalues
    assert np.allclose(four[:2], 0, atol=1e-10) and four[2] > 1
    two = eigensolve(total_spin_squared(HilbertSpace.spins([0.5] * 2)), which="full").eigenvalues
    assert np.allclose(two, [0, 2, 2, 2], atol=1e-10)
    one = total_spin_squared(HilbertSpace.spins([1.5])).toarray()
    assert np.allclose(one, 1.5 * 2.5 * np.eye(4))
    # all eigenvalues of form S(S+1)
    big = eigensolve(total_spin_squared(HilbertSpace.spins([1, 0.5, 0.5])), which="full").eigenvalues
    S = (-1 + np.sqrt(1 + 4 * big)) / 2
    assert np.allclose(2 * S, np.round(2 * S), atol=1e-8)


def test_total_spin_commutes_with_heisenberg_hamiltonian():
    space = HilbertSpace.spins([0.5] * 12)
    rng = np.random.default_rng(1)
    h = None
    for i in range(12):
        for j in range(i + 1, 12):
            if rng.random() < 0.3:
                b = heisenberg_bond(i, j, rng.standard_normal(), space)
                h = b if h is None else h + b
    assert max_entry(commutator(h, total_spin_squared(space))) < 1e-12


@pytest.mark.parametrize("s", SPINS)
def test_pi_rotation(s):
    space = HilbertSpace.spins([s])
    u = spin_rotation_pi_about_y(space).toarray()
    sx, sy, sz, splus, sminus = spin_matrices(s)
    assert np.allclose(u.conj().T @ u, np.eye(len(u)))
    assert np.abs(u @ sz @ u.conj().T + sz).max() < 1e-13
    assert np.abs(u @ splus @ u.conj().T + sminus).max() < 1e-13
    assert np.abs(u @ sminus @ u.conj().T + splus).max() < 1e-13


def test_pi_rotation_spin_half_action():
    u = spin_rotation_pi_about_y(HilbertSpace.spins([0.5])).toarray()
    up, down = np.array([1, 0]), np.array([0, 1])
    assert np.allclose(u @ up, down)
    assert np.allclose(u @ down, -up)


def test_pi_rotation_tensor():
    space = HilbertSpace.spins([0.5, 1])
    u = spin_rotation_pi_about_y(space).toarray()
    u1 = spin_rotation_pi_about_y(HilbertSpace.spins([0.5])).toarray()
    u2 = spin_rotation_pi_about_y(HilbertSpace.spins([1])).toarray()
    assert np.allclose(u, np.kron(u1, u2))


def test_kls_examples():
    rng = np.random.default_rng(2)
    n = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    assert abs(kls_trace_inequality_residual(np.eye(4), n, n)) < 1e-12
    assert kls_trace_inequality_residual(np.eye(4), 2 * n, n) > 0
    with pytest.raises(ValueError):
        kls_trace_inequality_residual(np.eye(3), n, n)


def _cplx(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@settings(max_examples=200, deadline=None)
@given(m=st.integers(1, 8), n=st.integers(1, 8), seed=st.integers(0, 2**32 - 1))
def test_kls_nonnegative_property(m, n, seed):
    rng = np.random.default_rng(seed)
    assert kls_trace_inequality_residual(_cplx(rng, (m, n)), _cplx(rng, (m, m)), _cplx(rng, (n, n))) >= -1e-12


def test_kls_rank_deficient():
    rng = np.random.default_rng(3)
    c = np.outer(_cplx(rng, 5), _cplx(rng, 3))
    assert kls_trace_inequality_residual(c, _cplx(rng, (5, 5)), _cplx(rng, (3, 3))) >= -1e-12


def test_binary_dump_roundtrip(tmp_path):
    space = HilbertSpace.spins([0.5, 1])
    h = heisenberg_bond(0, 1, 0.7, space)
    path = tmp_path / "h.bin"
    h.dump(path)
    assert path.stat().st_size == 32 * h.matrix.nnz
    back = SparseOperator.load(path, space, hermitian=True)
    assert max_entry(back.matrix - h.matrix) == 0

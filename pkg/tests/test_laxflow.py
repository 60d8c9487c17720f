import numpy as np
import pytest
import scipy.linalg as sl
from hypothesis import given, settings, strategies as st

from artifact.laxflow import (
    FactorizationError, LaxSystem, Twist, factorize, flow_line_residual, gradient, hamiltonian_value,
    lax_ode_reference, lax_rhs, lax_solve_by_factorization, minus_part, plus_part, sample_lax_system,
)
from artifact.spinalg import DomainError

TWISTS = [Twist(), Twist("diagonal", (1.0, 1.3, 0.8)), Twist("chevalley")]


def test_splitting_sums_to_identity():
    x = np.random.default_rng(0).standard_normal((4, 4))
    assert np.allclose(plus_part(x) - minus_part(x), x)
    assert np.allclose(np.diag(plus_part(x)), -np.diag(minus_part(x)))


def test_factorize_identity():
    fr = factorize(np.eye(3))
    assert np.allclose(fr.g_minus, np.eye(3)) and np.allclose(fr.g_plus, np.eye(3))


def test_factorize_unit_upper():
    g = np.array([[1.0, 2.0, -1.0], [0.0, 1.0, 0.5], [0.0, 0.0, 1.0]])
    fr = factorize(g)
    assert np.allclose(fr.g_minus, np.eye(3)) and np.allclose(fr.g_plus, g)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 5))
def test_factorize_multiply_back(seed, n):
    rng = np.random.default_rng(seed)
    g = np.eye(n) + 0.2 * rng.standard_normal((n, n))
    fr = factorize(g)
    assert fr.residual < 1e-12
    assert np.allclose(np.triu(fr.g_minus, 1), 0) and np.allclose(np.tril(fr.g_plus, -1), 0)
    assert np.allclose(np.diag(fr.g_minus) * np.diag(fr.g_plus), 1)


def test_factorize_vanishing_minor():
    with pytest.raises(FactorizationError):
        factorize(np.array([[0.0, 1.0], [1.0, 0.0]]), t=0.3)
    try:
        factorize(np.array([[0.0, 1.0], [1.0, 0.0]]), t=0.3)
    except FactorizationError as err:
        assert err.t == 0.3


def test_gradient_k1_and_commutes():
    L = np.eye(3) + 0.3 * np.random.default_rng(1).standard_normal((3, 3))
    assert np.allclose(gradient(L, 1), L)
    g3 = gradient(L, 3)
    assert np.abs(g3 @ L - L @ g3).max() < 1e-12


@pytest.mark.parametrize("twist", TWISTS, ids=lambda t: t.kind)
@pytest.mark.parametrize("k", [1, 2, 3])
def test_gradient_finite_difference(twist, k):
    rng = np.random.default_rng(k)
    L = np.eye(3) + 0.3 * rng.standard_normal((3, 3))
    x = rng.standard_normal((3, 3))
    eps = 1e-5
    fd = (hamiltonian_value(L @ sl.expm(eps * x), k, twist)
          - hamiltonian_value(L @ sl.expm(-eps * x), k, twist)) / (2 * eps)
    assert abs(np.trace(gradient(L, k, twist) @ x) - fd) < 1e-6


def test_gradient_singular():
    with pytest.raises(DomainError):
        gradient(np.zeros((2, 2)))


@pytest.mark.parametrize("twist", TWISTS, ids=lambda t: t.kind)
def test_hamiltonian_twisted_invariance(twist):
    rng = np.random.default_rng(5)
    g = np.eye(3) + 0.3 * rng.standard_normal((3, 3))
    g1 = np.eye(3) + 0.3 * rng.standard_normal((3, 3))
    moved = twist.group(g1) @ g @ np.linalg.inv(g1)
    for k in (1, 2, 3):
        assert abs(hamiltonian_value(moved, k, twist) - hamiltonian_value(g, k, twist)) < 1e-12


def test_twist_must_preserve_splitting():
    with pytest.raises(ValueError):
        LaxSystem(np.eye(3), 2, Twist("permutation", perm=(2, 1, 0)))
    LaxSystem(np.eye(3), 2, Twist("permutation", perm=(0, 1, 2)))
    with pytest.raises(ValueError):
        LaxSystem(np.eye(3), 2, Twist("diagonal", (1.0, 0.0, 2.0)))


def test_singular_l0():
    with pytest.raises(DomainError):
        LaxSystem(np.zeros((3, 3)))


def test_t_zero():
    sys = LaxSystem(np.eye(3) + 0.1 * np.arange(9).reshape(3, 3) / 9)
    assert np.allclose(lax_solve_by_factorization(sys, [0.0])[0], sys.L0)
    assert np.array_equal(lax_ode_reference(sys, 0.0), sys.L0)


def test_sl2_symmetric_spectrum():
    sys = LaxSystem(np.array([[0.0, 1.0], [1.0, 0.0]]), 2)
    for L in lax_solve_by_factorization(sys, np.linspace(0, 2, 9)):
        assert np.allclose(np.sort(np.linalg.eigvals(L).real), [-1, 1])


@pytest.mark.parametrize("twist", TWISTS, ids=lambda t: t.kind)
@pytest.mark.parametrize("k", [2, 3])
def test_factorization_matches_rk4(twist, k):
    rng = np.random.default_rng(10 * k + len(twist.kind))
    sys = sample_lax_system(3, k, rng, twist)
    times = np.linspace(0.2, 1.0, 5)
    path = lax_solve_by_factorization(sys, times)
    for L, t in zip(path, times):
        assert np.abs(L - lax_ode_reference(sys, t)).max() < 1e-6


@pytest.mark.parametrize("twist", TWISTS, ids=lambda t: t.kind)
def test_both_branches_agree(twist):
    sys = sample_lax_system(3, 2, np.random.default_rng(3), twist)
    times = np.linspace(0, 1, 11)
    plus, factors = lax_solve_by_factorization(sys, times, "+", return_factors=True)
    minus = lax_solve_by_factorization(sys, times, "-")
    assert np.abs(plus - minus).max() < 1e-9
    assert max(flow_line_residual(sys.L0, fr, twist) for fr in factors) < 1e-9


def test_minus_branch_ode_agrees():
    sys = sample_lax_system(3, 2, np.random.default_rng(4))
    assert np.abs(lax_ode_reference(sys, 0.7, branch="-") - lax_ode_reference(sys, 0.7)).max() < 1e-7


def test_isospectral():
    sys = sample_lax_system(4, 2, np.random.default_rng(8))
    ev0 = np.sort_complex(np.linalg.eigvals(sys.L0))
    for L in lax_solve_by_factorization(sys, np.linspace(0, 1, 11)):
        assert np.abs(np.sort_complex(np.linalg.eigvals(L)) - ev0).max() < 1e-8


@pytest.mark.parametrize("twist", TWISTS[1:], ids=lambda t: t.kind)
def test_twisted_invariant_conserved(twist):
    sys = sample_lax_system(3, 2, np.random.default_rng(21), twist)
    h0 = [hamiltonian_value(sys.L0, k, twist) for k in (1, 2, 3)]
    for L in lax_solve_by_factorization(sys, np.linspace(0, 1, 11)):
        for k, h in zip((1, 2, 3), h0):
            assert abs(hamiltonian_value(L, k, twist) - h) < 1e-9


def test_twisted_rhs_differs_from_untwisted():
    L = np.eye(3) + 0.3 * np.random.default_rng(0).standard_normal((3, 3))
    assert np.abs(lax_rhs(L, 2, Twist("chevalley")) - lax_rhs(L, 2)).max() > 1e-3


def test_commuting_flows():
    sys2 = sample_lax_system(3, 2, np.random.default_rng(31))
    sys3 = LaxSystem(sys2.L0, 3)
    a = lax_ode_reference(sys3, 0.3, L0=lax_ode_reference(sys2, 0.4))
    b = lax_ode_reference(sys2, 0.4, L0=lax_ode_reference(sys3, 0.3))
    assert np.abs(a - b).max() < 1e-6
    assert np.abs(a - sys2.L0).max() > 1e-2

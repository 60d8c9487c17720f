import cmath

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact.elliptic import (
    EllipticParams, SingularConfigurationError, boltzmann_weight, dybe_residual, r_matrix,
    ruijsenaars_L, ruijsenaars_apply, ruijsenaars_coefficient, rll_residual, sample_generic_point,
    theta, transfer_trace_on_diagonal,
)
from artifact.spinalg import DomainError

TAU = 0.8j
P2 = EllipticParams(tau=TAU, eta=0.11, c=0.7, N=2)


def test_theta_zero_and_odd():
    assert abs(theta(0.0, TAU)) < 1e-15
    u = 0.23 + 0.11j
    assert abs(theta(-u, TAU) + theta(u, TAU)) < 1e-15


@pytest.mark.parametrize("tau", [0.8j, 0.3 + 1.1j, -0.2 + 0.5j])
def test_theta_quasi_periodicity(tau):
    u = 0.23 + 0.11j
    t = theta(u, tau)
    assert abs(theta(u + 1, tau) + t) < 1e-12
    assert abs(theta(u + tau, tau) + cmath.exp(-1j * np.pi * tau - 2j * np.pi * u) * t) < 1e-12


@pytest.mark.parametrize("u", [0.13 + 0.05j, -0.4 + 0.2j, 0.71])
def test_theta_against_mpmath(u):
    tau = 0.3 + 0.9j
    ref = -complex(mpmath.jtheta(1, np.pi * u, cmath.exp(1j * np.pi * tau)))
    assert abs(theta(u, tau) - ref) < 1e-13


def test_theta_truncation_stable():
    for u in (0.2 + 0.4j, -0.7 - 0.3j, 1.3 + 0.05j):
        for tau in (0.8j, 0.2 + 0.35j):
            assert abs(theta(u, tau) - theta(u, tau, cutoff=1e-36)) < 1e-15


def test_theta_vectorized():
    u = np.array([0.1, 0.2 + 0.1j])
    assert np.allclose(theta(u, TAU), [theta(x, TAU) for x in u])


@pytest.mark.parametrize("tau", [0.0, 1.0, -0.5j])
def test_bad_tau(tau):
    with pytest.raises(DomainError):
        theta(0.1, tau)
    with pytest.raises(DomainError):
        EllipticParams(tau=tau)


def test_weights():
    lam = np.array([0.37, 0.0])
    assert boltzmann_weight("same", lam, 0, 0, 0.21, P2) == 1
    assert abs(boltzmann_weight("adjacent-ij", lam, 0, 1, 0.0, P2)) < 1e-15
    for kind in ("adjacent-ii", "adjacent-ij"):
        w = boltzmann_weight(kind, lam, 0, 1, 0.21, P2)
        assert np.isfinite(w) and abs(w) > 1e-3
    with pytest.raises(ValueError):
        boltzmann_weight("adjacent-ii", lam, 1, 1, 0.21, P2)
    with pytest.raises(ValueError):
        boltzmann_weight("diagonal", lam, 0, 1, 0.21, P2)


def test_weight_pole_guard():
    lam = np.array([0.5, 0.5 - 1e-11])
    with pytest.raises(SingularConfigurationError):
        boltzmann_weight("adjacent-ii", lam, 0, 1, 0.2, P2)
    with pytest.raises(SingularConfigurationError):
        boltzmann_weight("adjacent-ii", np.array([TAU + 1, 0]), 0, 1, 0.2, P2)


@pytest.mark.parametrize("n", [2, 3])
def test_r_at_zero_is_flip(n):
    p = EllipticParams(tau=TAU, eta=0.11, N=n)
    lam = np.linspace(0.1, 0.5, n) + 0.05j
    r = r_matrix(lam, 0.0, p)
    flip = np.zeros_like(r)
    for i in range(n):
        for j in range(n):
            flip[j, i, i, j] = 1
    assert np.abs(r - flip).max() < 1e-14


@pytest.mark.parametrize("n", [2, 3])
def test_dybe(n):
    p = EllipticParams(tau=0.1 + 0.9j, eta=0.13 + 0.02j, c=0.7, N=n)
    rng = np.random.default_rng(n)
    for _ in range(5):
        lam, _, u, v = sample_generic_point(rng, p)
        assert dybe_residual(lam, u, v, p) < 1e-9


def test_dybe_generic_n2_and_equal_spectral():
    lam = np.array([0.37, 0.0])
    assert dybe_residual(lam, 0.21, 0.17, P2) < 1e-10
    assert dybe_residual(lam, 0.21, 0.21, P2) < 1e-10


def test_dybe_detects_wrong_shift(monkeypatch):
    # the residual is the operative test for conventions, so it must see a sign flip
    from artifact import elliptic
    orig = elliptic.shift
    monkeypatch.setattr(elliptic, "shift", lambda lam, k, eta, steps=1: orig(lam, k, -eta, steps))
    assert dybe_residual(np.array([0.37, 0.0]), 0.21, 0.17, P2) > 1e-3


@pytest.mark.parametrize("n", [2, 3])
def test_rll(n):
    p = EllipticParams(tau=0.1 + 0.9j, eta=0.13 + 0.02j, c=0.7, N=n)
    rng = np.random.default_rng(10 + n)
    for _ in range(3):
        lam, mu, u, v = sample_generic_point(rng, p, with_mu=True)
        assert rll_residual(lam, mu, u, v, p) < 1e-9


def test_L_pole_at_u_zero():
    with pytest.raises(SingularConfigurationError):
        ruijsenaars_L([0.3, 0.0], [0.1, 0.2], 0, 1, 0.0, P2)


def test_L_c_zero_direct():
    p = EllipticParams(tau=TAU, eta=0.11, c=0.0, N=2)
    lam = np.array([0.3, -0.1])
    u = 0.17
    l01 = ruijsenaars_L(lam, lam, 0, 1, u, p)
    ref = theta(u + lam[0] - lam[1], TAU) / theta(u, TAU) * theta(lam[1] - lam[1], TAU) / theta(lam[1] - lam[0], TAU)
    assert abs(l01 - ref) < 1e-15 and abs(l01) < 1e-15
    l00 = ruijsenaars_L(lam, lam, 0, 0, u, p)
    assert abs(l00 - 1) < 1e-14


def test_trace_of_T_gives_hamiltonian():
    p = EllipticParams(tau=0.1 + 0.9j, eta=0.13, c=0.7, N=3)
    lam = np.array([0.31, -0.12, 0.05 + 0.07j])
    u = 0.23
    pref = theta(p.c * p.eta / 3 + u, p.tau) / theta(u, p.tau)
    coeffs = transfer_trace_on_diagonal(lam, u, p)
    for i in range(3):
        new = lam.copy()
        new[i] -= p.eta
        key = tuple(np.round(new, 12))
        assert abs(coeffs[key] - pref * ruijsenaars_coefficient(lam, i, p)) < 1e-13


def test_apply_c_zero_is_plain_shift_sum():
    p = EllipticParams(tau=TAU, eta=0.11, c=0.0, N=2)
    psi = np.random.default_rng(0).standard_normal((4, 5))
    out = ruijsenaars_apply(psi, [0.2, -0.3], p)
    assert np.isnan(out[0]).all() and np.isnan(out[:, 0]).all()
    assert np.allclose(out[1:, 1:], psi[:-1, 1:] + psi[1:, :-1])


def test_apply_matches_two_term_display():
    p = EllipticParams(tau=0.1 + 0.9j, eta=0.11, c=0.7, N=2)
    rng = np.random.default_rng(1)
    psi = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    base = np.array([0.21, -0.14])
    out = ruijsenaars_apply(psi, base, p)
    g = p.c * p.eta / 2
    for a in range(1, 5):
        for b in range(1, 5):
            lam = base[0] + a * p.eta - base[1] - b * p.eta
            # psi(lam - eta) and psi(lam + eta) in the reduced variable
            val = (theta(g - lam, p.tau) / theta(-lam, p.tau) * psi[a - 1, b]
                   + theta(g + lam, p.tau) / theta(lam, p.tau) * psi[a, b - 1])
            assert abs(out[a, b] - val) < 1e-12


def test_apply_delta():
    p = EllipticParams(tau=TAU, eta=0.11, c=0.7, N=3)
    psi = np.zeros((3, 3, 3))
    psi[1, 1, 1] = 1
    base = np.array([0.3, 0.0, -0.4])
    out = ruijsenaars_apply(psi, base, p)
    inner = out[1:, 1:, 1:]
    support = {tuple(int(x) + 1 for x in idx) for idx in np.argwhere(np.abs(inner) > 0)}
    assert support == {(2, 1, 1), (1, 2, 1), (1, 1, 2)}
    for i in range(3):
        n = [1, 1, 1]
        n[i] += 1
        lam = base + p.eta * np.array(n)
        assert abs(out[tuple(n)] - ruijsenaars_coefficient(lam, i, p)) < 1e-15


def test_apply_validates_shape():
    with pytest.raises(ValueError):
        ruijsenaars_apply(np.zeros((3, 3)), [0, 0, 0], EllipticParams(N=3))
    with pytest.raises(ValueError):
        ruijsenaars_apply(np.zeros((1, 3)), [0, 0], P2)


@settings(max_examples=20, deadline=None)
@given(st.floats(-0.9, 0.9), st.floats(-0.3, 0.3))
def test_coefficients_sum_symmetric(x, y):
    # swapping the two components exchanges the two coefficients
    lam = np.array([x + 1j * y, 0.0])
    if abs(lam[0]) < 0.05:
        return
    a = ruijsenaars_coefficient(lam, 0, P2)
    b = ruijsenaars_coefficient(lam[::-1], 1, P2)
    assert abs(a - b) < 1e-12 * max(1, abs(a))

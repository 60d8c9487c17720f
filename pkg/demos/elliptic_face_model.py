"""Elliptic face weights: dynamical Yang-Baxter, RLL and the difference operator."""
import numpy as np

from artifact.elliptic import (EllipticParams, dybe_residual, rll_residual, ruijsenaars_apply,
                               sample_generic_point, theta)

tau = 0.1 + 0.9j
u = 0.23 + 0.11j
print(f"theta(u+1) + theta(u) = {abs(theta(u + 1, tau) + theta(u, tau)):.1e}")

rng = np.random.default_rng(4)
for n in (2, 3):
    p = EllipticParams(tau=tau, eta=0.13 + 0.02j, c=0.7, N=n)
    d = max(dybe_residual(lam, a, b, p) for lam, _, a, b in (sample_generic_point(rng, p) for _ in range(5)))
    r = max(rll_residual(lam, mu, a, b, p) for lam, mu, a, b in
            (sample_generic_point(rng, p, with_mu=True) for _ in range(2)))
    print(f"N = {n}: DYBE residual {d:.1e}, RLL residual {r:.1e}")

p = EllipticParams(tau=tau, eta=0.11, c=0.7, N=2)
psi = np.ones((4, 4), dtype=complex)
print("H applied to the constant function on a 4x4 window (NaN on the boundary):")
print(np.round(ruijsenaars_apply(psi, [0.21, -0.14], p), 4))

"""Semiclassical Seiberg-Witten map from the Moser flow of theta_t = theta (1 + t f theta)^-1."""
import numpy as np
import sympy as sp

from artifact.swmap import (PolyField, coords, gauge_covariance_residual, lambda_tilde, pushforward_residual,
                            scaling_exponent)

x0, x1 = coords(2)
theta = PolyField.bivector(2, {(0, 1): 1 + x0**2 / 3 + x1 / 5})
a = PolyField.one_form(2, [x1**2 / 5 - x0 / 10, x0 * x1 / 4 + x0 / 5])
lam = PolyField.function(2, x0**2 / 2 + x0 * x1 / 3 + x1)
pts = np.array([[0.1, 0.2], [-0.3, 0.4], [0.25, -0.15]])

print(f"pushforward residual |J theta J^T - theta_1 o Phi| = {pushforward_residual(theta, a, pts):.1e}")
eps = [1e-2, 1e-3]
res = [gauge_covariance_residual(theta, a, lam, e, pts) for e in eps]
print(f"gauge covariance residuals {res[0]:.1e}, {res[1]:.1e}; exponent {scaling_exponent(eps, res):.2f}")
print("gauge parameter to second order:")
print(" ", sp.expand(lambda_tilde(theta, a, lam, 2).scalar()))

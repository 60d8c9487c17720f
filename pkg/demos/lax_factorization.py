"""Lax flow solved by factorizing exp(t grad h) and checked against RK4.

The flow is isospectral; with a twist the twisted invariants are conserved
instead.
"""
import numpy as np

from artifact.laxflow import (Twist, hamiltonian_value, lax_ode_reference, lax_solve_by_factorization,
                              sample_lax_system)

rng = np.random.default_rng(3)
for twist in (Twist(), Twist("chevalley")):
    sys = sample_lax_system(3, 2, rng, twist)
    times = np.linspace(0, 1, 5)
    path = lax_solve_by_factorization(sys, times)
    err = max(np.abs(L - lax_ode_reference(sys, t)).max() for L, t in zip(path, times))
    h = [abs(hamiltonian_value(L, 2, twist) - hamiltonian_value(sys.L0, 2, twist)) for L in path]
    print(f"twist {twist.kind}: max |factorization - RK4| = {err:.1e}, drift of h_2 = {max(h):.1e}")
    if twist.kind == "identity":
        print("  eigenvalues at t=0:", np.round(np.sort_complex(np.linalg.eigvals(path[0])), 6))
        print("  eigenvalues at t=1:", np.round(np.sort_complex(np.linalg.eigvals(path[-1])), 6))

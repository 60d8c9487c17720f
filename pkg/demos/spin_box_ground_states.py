"""Ground states of a single box of four spin-1/2 sites and the trace inequality.

H = 1/2 (S_tot)^2 is minimized by total-spin singlets; four spin-1/2 sites
carry exactly two of them. The second half samples the trace inequality
used in the reflection-positivity argument.
"""
import numpy as np

from artifact.spinalg import HilbertSpace, eigensolve, kls_trace_inequality_residual, total_spin_squared

space = HilbertSpace.spins([0.5] * 4)
s2 = total_spin_squared(space)
res = eigensolve(0.5 * s2.matrix, k=1)
ground = res.ground_block()
print(f"dimension {space.dim}, ground energy {res.eigenvalues[0]:.3e}, degeneracy {ground.shape[1]}")
for k, v in enumerate(ground.T):
    print(f"  ground vector {k}: <S^2> = {s2.expectation(v).real:.2e}")

rng = np.random.default_rng(0)
worst = np.inf
for _ in range(200):
    m, n = rng.integers(1, 9, size=2)
    c = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
    M = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    N = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    worst = min(worst, kls_trace_inequality_residual(c, M, N))
print(f"smallest trace-inequality gap over 200 draws: {worst:.3e} (never negative)")

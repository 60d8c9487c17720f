"""Wehrl entropy of spin states from their Majorana points.

Coherent states give 2j/(2j+1); a random search over Majorana
configurations finds nothing lower, in line with the Lieb conjecture.
"""
import numpy as np

from artifact.wehrl import (SpinState, coherent_state, lieb_conjecture_scan, majorana_factorize,
                            wehrl_entropy_formula, wehrl_entropy_quadrature)

rng = np.random.default_rng(1)
for j in (1, 1.5, 2):
    cs = coherent_state(j, 0.7, 1.9)
    s = SpinState.random(j, rng)
    sw = wehrl_entropy_formula(majorana_factorize(s))
    print(f"j = {j}: coherent {wehrl_entropy_formula(majorana_factorize(cs)):.12f} "
          f"(2j/(2j+1) = {2 * j / (2 * j + 1):.12f}); random state {sw:.10f}, "
          f"quadrature {wehrl_entropy_quadrature(s):.10f}")

scan = lieb_conjecture_scan(2, n_samples=8, seed=2)
print(f"spin-2 scan: minimum {scan['min_entropy']:.10f} against {scan['coherent_value']:.10f}")

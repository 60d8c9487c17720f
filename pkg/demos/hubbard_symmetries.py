"""Spin and pseudo-spin symmetry of the Hubbard chain and the two-site twist.

At half filling (mu = u/2) the Hubbard Hamiltonian commutes with both su(2)
triples. The twist M carries the classical coproduct of pseudo-spin into
the q-deformed one.
"""
from artifact.hubbard import (FermiSpace, HubbardParams, commutation_report, standard_hubbard,
                              symmetry_generators, twist_operator_check)

for n in (2, 3):
    fs = FermiSpace(n)
    for mu in (0.65, 0.9):
        h = standard_hubbard(HubbardParams(u=1.3, mu=mu, t=0.7), n, fs=fs)
        rep = commutation_report(h, symmetry_generators(fs))
        worst = max(rep, key=rep.get)
        print(f"{n} sites, mu = {mu}: largest commutator {rep[worst]:.2e} ({worst})")

for q in (0.5, 2.0):
    tw = twist_operator_check(q)
    print(f"q = {q}: coproduct residual {max(tw['coproduct_residuals'].values()):.1e}, "
          f"M M* - (1 + 2 beta^2 xi) = {tw['MMstar_measured_residual']:.1e}, "
          f"M M* - (1 + (alpha^2-1) xi) = {tw['MMstar_identity_residual']:.3f}")

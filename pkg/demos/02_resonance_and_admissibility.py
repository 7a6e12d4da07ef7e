"""
Non-resonance and the irregularity a model needs
================================================

For every model we check the lower bound ``|Phi| >= c <k0*>^a1 <k2*>^a2`` on
the frequency lattice, then turn the exponents into the threshold on rho that
the noise has to beat.
"""

from fractions import Fraction

from modisp.admissibility import rho_bounds_for_model
from modisp.models import catalog, fkdv, resonance_phi
from modisp.resonance import factorization_check, verify_bound

# exact polynomial identities behind the bounds
for name, K in [("kdv_3k0k1k2", 60), ("mkdv_triple_product", 20), ("nls_quadratic", 60)]:
    print(f"{name:22s} K={K:3d}: {factorization_check(name, K)}")

# one resonance value by hand: -27 + 1 + 8 = -18 = -3 * 3 * 1 * 2
print("\nfkdv(2) Phi(3; 1, 2) =", resonance_phi(fkdv(2), (3, 1, 2)))

# best constants in the bound over a box of frequencies
print("\nmodel            K   c_best  violations")
for spec in catalog():
    K = 48 if spec.m == 2 else 16
    rep = verify_bound(spec, K)
    print(f"{spec.name:15s} {K:3d}  {rep.c_best:7.3f}  {len(rep.violations)}")

# threshold on rho for fractional KdV at s = -1/2: max(1/a, -2s/a, (3/2-s)/(a+1))
print("\n  a   inf rho  attained")
for a in (Fraction(1, 2), 1, 2, 4):
    rb = rho_bounds_for_model(fkdv(float(a)), Fraction(-1, 2))
    print(f"{float(a):4.1f}  {str(rb.inf_rho):>6s}  {rb.attained}")

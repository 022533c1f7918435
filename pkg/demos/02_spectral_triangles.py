"""
Spectral triangles and the two-sided bounds
===========================================

For each n past the localisation threshold the triangle (lambda+, lambda-,
nu) is computed through an invariant-subspace reduction that keeps
absolute accuracy near machine epsilon times |v|.  The triangle size
|gamma| + |delta_neu| is then compared with |beta+| + |beta-|.
"""

from hillspec import fixtures
from hillspec.diagnostics import bound_audit, identity_audit, triangle_sequence

spec = fixtures.mathieu_plus_one_sided()
seq = triangle_sequence(spec, "both", range(3, 21), 96)

print(f"potential {spec.label}, N = {seq.N}")
print(" n  bc          |gamma|     |delta_neu|  |beta+|+|beta-|  resolved")
for r in seq.usable():
    print(
        f"{r.n:2d}  {r.bc.value:9s} {abs(r.gamma):11.3e} {abs(r.delta_neu):12.3e} "
        f"{r.value('beta_sum'):15.3e}  {r.resolved('size')}"
    )

# each bound is size / (|beta+|+|beta-|) in [lo, hi]; tightest observed ratios
audit = bound_audit(seq)
print(f"\nbounds {audit.verdict}, N0 = {audit.N0}")
for name, t in audit.tightest.items():
    print(f"  {name:9s} allowed {t['allowed'][0]:.4f} .. {t['allowed'][1]:g}   observed {t['empirical'][0]:.3f} .. {t['empirical'][1]:.3f}")

# the Neumann pairing and identity residual, tested where roundoff allows
ident = identity_audit(seq)
print(f"identity {ident.verdict}, pairing threshold n >= {ident.N0}, residual tested for n in {ident.dere_window}")

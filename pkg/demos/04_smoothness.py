"""
Triangle size and smoothness of the potential
=============================================

Entire potentials give exponentially small triangles; coefficients
decaying like (1+|k|)^-4 give triangles decaying like a power of n.
Weighted square sums decide membership in Sobolev-type spaces.
"""

import numpy as np

from hillspec import WeightSpec, fixtures
from hillspec.diagnostics import decay_fit, sizes, triangle_sequence, weighted_membership

for name in ("mathieu", "mathieu_plus_i_cos4", "algebraic"):
    spec = fixtures.get(name)
    # the algebraic fixture has frequencies |k| <= 32
    ns, ts, ok = sizes(triangle_sequence(spec, "both", range(3, 33), 128))
    fit = decay_fit(ns, ts, ok)
    print(f"{spec.label:16s} {fit.model:16s} exponent {fit.exponent:+.3f}  r2 {fit.r_squared:.4f}  window {fit.window}")
    for a in (1.0, 3.0, 4.0):
        rep = weighted_membership(ns, ts, WeightSpec("sobolev", a=a), resolved=ok)
        print(f"    Sobolev a={a:g}: {rep.verdict}")

# planted sequences recover their exponents
n = np.arange(5, 41)
print("planted n^-3:", round(decay_fit(n, n**-3.0).exponent, 4))
print("planted e^(-n/2):", round(decay_fit(n, np.exp(-n / 2)).exponent, 4))

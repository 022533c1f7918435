"""
Spectra of the Mathieu operator
===============================

Truncated Fourier matrices for -y'' + 2q cos(2x) y under the four boundary
conditions, checked against scipy's Mathieu characteristic values and
localised into the rectangle R_N and the disks D_n.
"""

import numpy as np
from scipy import special

from hillspec import BC, build_operator, eigenvalues, fixtures
from hillspec.spectra import choose_N, localize

q = 3.0
spec = fixtures.mathieu(q)

# Neumann eigenvalues are a_m(q), Dirichlet eigenvalues are b_m(q)
neu = np.sort(eigenvalues(build_operator(spec, BC.NEU, 64)).values.real)
dir_ = np.sort(eigenvalues(build_operator(spec, BC.DIR, 64)).values.real)
print(" m        Neu          a_m(q)       Dir          b_m(q)")
for m in range(1, 7):
    a = special.mathieu_a(m, q)
    b = special.mathieu_b(m, q)
    print(f"{m:2d} {neu[m]:12.8f} {a:12.8f} {dir_[m - 1]:12.8f} {b:12.8f}")

# one N localises all four spectra: fixed counts in R_N, then 2 or 1 per disk
spectra = {bc: eigenvalues(build_operator(spec, bc, 64)).values for bc in (BC.PER_PLUS, BC.PER_MINUS, BC.DIR, BC.NEU)}
N = choose_N(spectra, 24)
print(f"\nN = {N}")
for bc, vals in spectra.items():
    loc = localize(vals, bc, N)
    counts = [len(loc.disk(n)) for n in range(N + 1, 25) if bc.contains(n)]
    print(f"{bc.value:9s} in R_N: {len(loc.in_rectangle):2d}   per disk: {sorted(set(counts))}")

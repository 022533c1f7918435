"""
Riesz-basis criteria on a finite window
=======================================

Three ratios decide whether the periodic root functions contain a Riesz
basis: |delta_neu|/|gamma|, |delta_dir|/|gamma| and the two-sided ratio
|beta-|/|beta+|.  Their running maxima are regressed against log n.
"""

from hillspec import fixtures
from hillspec.diagnostics import riesz_criteria, triangle_sequence

for name in ("mathieu", "mathieu_plus_i_cos4", "asymmetric_pair", "mathieu_plus_one_sided", "gasymov"):
    spec = fixtures.get(name)
    seq = triangle_sequence(spec, "both", range(3, 25), 96)
    rep = riesz_criteria(seq)
    print(f"{spec.label:18s} {rep.summary}")
    for crit, verdict in rep.verdicts.items():
        slopes = rep.growth_slopes.get(crit, {})
        shown = ", ".join(f"{bc} {s:+.2f}" for bc, s in slopes.items() if s is not None)
        print(f"    {crit:5s} {verdict:18s} {shown}")

# e^{2ix} + 4e^{-2ix} shares its periodic spectrum with 4cos2x, yet the
# beta ratio grows geometrically: gaps alone do not decide the question

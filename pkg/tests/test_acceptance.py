"""Acceptance criteria 1-11 at desk scale (K <= 256, n <= 48)."""

import math

import numpy as np
import pytest

from conftest import record_criterion
from hillspec import fixtures
from hillspec.diagnostics import (
    bound_audit,
    decay_fit,
    identity_audit,
    lemma_audit,
    projection_verdict,
    riesz_criteria,
    sizes,
    triangle_sequence,
)
from hillspec.opmatrix import ALL_BCS, BC, build_operator
from hillspec.projections import projection_diff_audit
from hillspec.reduction import schur_reduce, solve_reduced
from hillspec.spectra import choose_N, eigenvalues, localize, pair_periodic

FIXTURES = ["mathieu", "mathieu_plus_one_sided", "asymmetric_pair", "gasymov", "mathieu_plus_i_cos4", "algebraic"]
NON_DEGENERATE = [f for f in FIXTURES if f != "gasymov"]
TRIG = ["mathieu", "mathieu_plus_one_sided", "asymmetric_pair", "mathieu_plus_i_cos4"]
K_AUDIT, N_AUDIT = 192, range(3, 49)

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def sequences():
    return {name: triangle_sequence(fixtures.get(name), "both", N_AUDIT, K_AUDIT, workers=4) for name in FIXTURES}


def test_criterion_01_free_operator():
    K = 64
    zero = fixtures.free()
    neu = eigenvalues(build_operator(zero, BC.NEU, K)).values
    err = float(np.max(np.abs(np.sort(neu.real) - np.arange(K + 1) ** 2)) + np.max(np.abs(neu.imag)))
    for bc in (BC.PER_PLUS, BC.PER_MINUS):
        vals = np.sort(eigenvalues(build_operator(zero, bc, K)).values.real)
        ks = np.sort(np.array([k * k for k in range(-2 * K - 1, 2 * K + 2) if bc.contains(k)], dtype=float))
        err = max(err, float(np.max(np.abs(vals - ks))))
    seq = triangle_sequence(zero, "both", range(3, 17), K)
    tri = max(max(abs(r.gamma), abs(r.delta_neu), abs(r.delta_dir), abs(r.xi)) for r in seq.records)
    ok = err <= 1e-10 and tri == 0 and all(r.ok for r in seq.records)
    record_criterion(1, ok, f"max eigenvalue error {err:.1e}, max triangle entry {tri:.1e}")
    assert ok


@pytest.mark.parametrize("name", ["mathieu", "mathieu_plus_one_sided", "asymmetric_pair"])
def test_criterion_02_counting_law(name):
    spec, K, n_max = fixtures.get(name), 128, 32
    spectra = {bc: eigenvalues(build_operator(spec, bc, K if bc.is_periodic else 2 * K)).values for bc in ALL_BCS}
    N = choose_N(spectra, n_max)
    locs = {bc: localize(e, bc, N) for bc, e in spectra.items()}
    disks_ok = all(
        len(locs[bc].disk(n)) == (2 if bc.is_periodic else 1)
        for bc in ALL_BCS
        for n in range(N + 1, n_max + 1)
        if bc.contains(n)
    )
    counts = {bc: len(loc.in_rectangle) for bc, loc in locs.items()}
    periodic = counts[BC.PER_PLUS] + counts[BC.PER_MINUS]
    ok = N <= 12 and disks_ok and periodic == 2 * N + 1 and counts[BC.DIR] == N and counts[BC.NEU] == N + 1
    detail = f"N={N}, R_N counts Per={periodic} (2N+1={2 * N + 1}) Dir={counts[BC.DIR]} Neu={counts[BC.NEU]}"
    prev = test_criterion_02_counting_law.__dict__.setdefault("results", [])
    prev.append((ok, f"{name}: {detail}"))
    record_criterion(2, all(o for o, _ in prev), "; ".join(d for _, d in prev))
    assert ok


@pytest.mark.parametrize("name", FIXTURES)
def test_criterion_03_reduction(name):
    spec, K, n_max = fixtures.get(name), 128, 32
    op = {bc: build_operator(spec, bc, K) for bc in (BC.PER_PLUS, BC.PER_MINUS)}
    eigs = {bc: eigenvalues(o).values for bc, o in op.items()}
    N = choose_N(eigs, n_max)
    root_err = resid = 0.0
    for n in range(max(N + 1, 3), n_max + 1):
        bc = BC.for_parity(n)
        lp, lm = pair_periodic(localize(eigs[bc], bc, N), n)
        zp, zm = solve_reduced(op[bc], n)
        root_err = max(root_err, abs(zp - (lp - n * n)), abs(zm - (lm - n * n)))
        for lam in (lp, lm):
            resid = max(resid, schur_reduce(op[bc], n, lam - n * n).residual())
    ok = root_err <= 1e-8 and resid <= 1e-6
    prev = test_criterion_03_reduction.__dict__.setdefault("results", [])
    prev.append((ok, root_err, resid))
    record_criterion(
        3,
        all(o for o, _, _ in prev),
        f"{len(prev)} fixtures, max root error {max(r for _, r, _ in prev):.1e}, max residual {max(r for _, _, r in prev):.1e}",
    )
    assert ok


def test_criterion_04_two_sided_bounds(sequences):
    audits = {name: bound_audit(seq) for name, seq in sequences.items()}
    ok = all(a.verdict == "pass" for a in audits.values())
    detail = ", ".join(f"{name} N0={a.N0} size/beta max {a.tightest['neumann']['empirical'][1]:.3g}" for name, a in audits.items())
    record_criterion(4, ok, detail)
    assert ok, {n: a.verdict for n, a in audits.items()}


def test_criterion_05_identity(sequences):
    audits = {name: identity_audit(seq) for name, seq in sequences.items()}
    ok = all(a.verdict == "pass" for a in audits.values())
    detail = ", ".join(f"{name} N0={a.N0} dere tested n<={max(a.dere_window)}" for name, a in audits.items())
    record_criterion(5, ok, detail)
    assert ok, {n: a.verdict for n, a in audits.items()}


def test_criterion_06_projection_estimates():
    worst = {"scaled_diff": -math.inf, "deriv_diff": -math.inf, "kvk": -math.inf}
    for name in FIXTURES:
        spec = fixtures.get(name)
        for bc in (BC.PER_PLUS, BC.PER_MINUS):
            rows = projection_diff_audit(spec, bc, [n for n in range(8, 49) if bc.contains(n)], K_AUDIT)
            v = projection_verdict(rows)
            for key in ("scaled_diff", "deriv_diff"):
                worst[key] = max(worst[key], v[key]["slope"])
        for bc in ALL_BCS:
            audit = lemma_audit(spec, bc, range(8, 49), 2.0, K=K_AUDIT)
            worst["kvk"] = max(worst["kvk"], audit.kvk_slope.slope)
    ok = all(s <= 0.1 for s in worst.values())
    record_criterion(6, ok, "largest slopes " + ", ".join(f"{k} {v:+.3f}" for k, v in worst.items()))
    assert ok


def test_criterion_07_gasymov():
    spec, K = fixtures.gasymov(), 128
    gap = 0.0
    for bc in (BC.PER_PLUS, BC.PER_MINUS):
        vals = np.sort_complex(eigenvalues(build_operator(spec, bc, K)).values)
        ref = np.sort_complex(eigenvalues(build_operator(spec, bc, 2 * K)).values)[: len(vals)]
        for n in range(0 if bc is BC.PER_PLUS else 1, 21, 2):
            near = vals[np.abs(vals - n * n) < max(n, 1) / 4]
            assert len(near) == (1 if n == 0 else 2)
            gap = max(gap, float(np.ptp(near.real) + np.ptp(near.imag)))
            gap = max(gap, float(np.max(np.abs(near - ref[np.abs(ref - n * n) < max(n, 1) / 4]))))
    seq = triangle_sequence(spec, "both", range(3, 21), K)
    one_zero = all((r.beta_plus == 0) != (r.beta_minus == 0) for r in seq.usable())
    rep = riesz_criteria(seq)
    ok = gap <= 1e-8 and one_zero and rep.summary == "degenerate: all gaps closed"
    record_criterion(7, ok, f"max |gamma_n| (n<=20) {gap:.1e}, beta_minus structurally zero: {one_zero}, verdict '{rep.summary}'")
    assert ok


def test_criterion_08_criterion_agreement(sequences):
    reports = {name: riesz_criteria(sequences[name]) for name in NON_DEGENERATE}
    agree = all(r.agreement for r in reports.values())
    ok = agree and reports["mathieu"].summary == "bounded"
    record_criterion(8, ok, ", ".join(f"{n}: {r.summary}" for n, r in reports.items()))
    assert ok


def test_criterion_09_smoothness(sequences):
    ns = np.arange(5, 41)
    poly = decay_fit(ns, 2.0 * ns**-3.0)
    expo = decay_fit(ns, np.exp(-ns / 2))
    planted = abs(poly.exponent + 3) <= 0.05 and abs(expo.exponent + 0.5) <= 0.02
    # the algebraic fixture has frequencies |k| <= 32, so its decay window is n <= 32
    alg_seq = sequences["algebraic"]
    n, t, ok_mask = sizes(alg_seq)
    keep = n <= 32
    alg = decay_fit(n[keep], t[keep], ok_mask[keep])
    trig = {name: decay_fit(*sizes(sequences[name])) for name in TRIG + ["gasymov"]}
    ok = planted and alg.model == "polynomial" and abs(alg.exponent + 4) <= 1.0 and all(f.exponential_or_faster for f in trig.values())
    detail = (
        f"planted exponent {poly.exponent:.3f}, rate {expo.exponent:.3f}; algebraic {alg.model} {alg.exponent:.2f}; "
        + ", ".join(f"{k} {f.model}" for k, f in trig.items())
    )
    record_criterion(9, ok, detail)
    assert ok


def test_criterion_10_lemma_audits():
    worst_tp, worst_col = 0.0, 0.0
    for name in FIXTURES:
        spec = fixtures.get(name)
        for bc in ALL_BCS:
            for p in (4 / 3, 2.0):
                audit = lemma_audit(spec, bc, range(1, 49), p, K=K_AUDIT, j_max=64)
                worst_tp = max(worst_tp, max(r for row in audit.rows for r in row.tp_ratio.values()))
                worst_col = max(worst_col, audit.column_max / audit.column_bound if audit.column_bound else 0.0)
    ok = worst_tp <= 1.0 and worst_col <= 1.0
    record_criterion(10, ok, f"max sum / T_p^p {worst_tp:.3f}, max column norm / 5||v||_p {worst_col:.3f}")
    assert ok


def test_criterion_11_determinism_and_convergence(sequences):
    spec = fixtures.mathieu_plus_one_sided()
    a = triangle_sequence(spec, "both", range(3, 25), 96, workers=1)
    b = triangle_sequence(spec, "both", range(3, 25), 96, workers=4)
    same = [r.as_dict() for r in a.records] == [r.as_dict() for r in b.records]
    drift = max(max(r.refine_delta.values()) for seq in sequences.values() for r in seq.usable() if r.refine_delta)
    ok = same and drift <= 1e-8
    record_criterion(11, ok, f"repeat runs identical: {same}, max change under K -> 3K/2: {drift:.1e}")
    assert ok

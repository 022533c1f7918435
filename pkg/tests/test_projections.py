import math

import numpy as np
import pytest

from hillspec import fixtures
from hillspec.opmatrix import BC, build_operator, index_set
from hillspec.potential import PotentialSpec
from hillspec.projections import (
    PoleError,
    build_G,
    case_classify,
    d0,
    d_pi,
    default_grid,
    dere_residual,
    free_modes,
    invariant_pair,
    kvk_hs_norm,
    low_rank_two_inf,
    neumann_vector,
    projection_diff_audit,
    riesz_projection,
    two_inf_norm,
)
from hillspec.opmatrix import basis_values
from hillspec.spectra import StructureError

ZERO = PotentialSpec(())
COS = fixtures.mathieu()


def test_free_projection_is_orthogonal_projector():
    op = build_operator(ZERO, BC.PER_PLUS, 16)
    P = riesz_projection(op, 4, route="contour").P_matrix
    E = free_modes(op, 4)
    assert np.allclose(P, E @ E.T, atol=1e-13)


@pytest.mark.parametrize("route", ["contour", "spectral"])
def test_idempotent_with_expected_trace(route):
    op = build_operator(COS, BC.PER_PLUS, 48)
    proj = riesz_projection(op, 6, route=route)
    assert proj.idempotency_defect() <= 1e-8
    assert abs(proj.trace - 2) <= 1e-8
    neu = riesz_projection(build_operator(COS, BC.NEU, 48), 5, route=route)
    assert abs(neu.trace - 1) <= 1e-8


@pytest.mark.parametrize("name", ["mathieu_plus_one_sided", "asymmetric_pair", "gasymov"])
def test_routes_and_quadrature_agree(name):
    op = build_operator(fixtures.get(name), BC.PER_MINUS, 48)
    c64 = riesz_projection(op, 7, M=64).P_matrix
    c128 = riesz_projection(op, 7, M=128).P_matrix
    s = riesz_projection(op, 7, route="spectral").P_matrix
    assert np.linalg.norm(c64 - c128) < 1e-9
    assert np.linalg.norm(c64 - s) < 1e-9


def test_projection_guards():
    op = build_operator(COS, BC.PER_PLUS, 32)
    with pytest.raises(ValueError):
        riesz_projection(op, 4, M=16)
    with pytest.raises(StructureError):
        riesz_projection(op, 4, eigs=np.array([16.0]))


def test_kvk_examples():
    assert kvk_hs_norm(ZERO, BC.NEU, 10.5, 32) == 0
    with pytest.raises(PoleError):
        kvk_hs_norm(COS, BC.NEU, 16.0, 32)


def test_two_inf_examples():
    assert two_inf_norm(np.zeros((5, 5)), BC.PER_PLUS) == 0
    idx = index_set(BC.PER_PLUS, 4)
    A = np.zeros((len(idx), len(idx)), complex)
    p = list(idx).index(4)
    A[p, p] = 1
    assert two_inf_norm(A, BC.PER_PLUS, indices=idx) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        two_inf_norm(A, BC.PER_PLUS, x_grid=np.linspace(0, math.pi, 100), indices=idx)


def test_two_inf_grid_refinement_and_low_rank():
    op = build_operator(fixtures.mathieu_plus_one_sided(), BC.PER_PLUS, 32)
    proj = riesz_projection(op, 6, route="spectral")
    D = proj.P_matrix - free_modes(op, 6) @ free_modes(op, 6).T
    a = two_inf_norm(D, BC.PER_PLUS, default_grid(2048), op.indices)
    b = two_inf_norm(D, BC.PER_PLUS, default_grid(4096), op.indices)
    assert abs(a - b) <= 1e-3 * b
    E = free_modes(op, 6)
    left, right = np.hstack([proj.left, -E]), np.vstack([proj.right, E.T])
    c = low_rank_two_inf(basis_values(BC.PER_PLUS, op.indices, default_grid(4096)), left, right)
    assert c == pytest.approx(b, rel=1e-10)


def test_projection_difference_vanishes_for_free():
    rows = projection_diff_audit(ZERO, BC.PER_PLUS, [8, 10], 40)
    assert all(r.diff_norm < 1e-13 and r.deriv_diff_norm < 1e-12 for r in rows)


def test_projection_difference_bounded_for_mathieu():
    rows = projection_diff_audit(COS, BC.PER_PLUS, range(8, 33, 2), 128)
    scaled = [r.scaled for r in rows]
    assert max(scaled) < 2 * scaled[0]


def test_free_invariant_pair():
    op = build_operator(ZERO, BC.PER_PLUS, 16)
    pair = invariant_pair(op, 4)
    supports = {int(np.flatnonzero(np.abs(pair.f) > 0.5)[0]), int(np.flatnonzero(np.abs(pair.phi) > 0.5)[0])}
    assert supports == {op.position(4), op.position(-4)}
    assert pair.xi == 0 and pair.gamma == 0


@pytest.mark.parametrize("method", ["reduced", "schur"])
def test_triangular_form(any_fixture, method):
    op = build_operator(any_fixture, BC.PER_MINUS, 64)
    pair = invariant_pair(op, 7, method=method)
    M = pair.restricted_matrix()
    assert abs(M[1, 0]) < 1e-8
    assert abs(M[0, 0] - pair.lambda_plus) < 1e-8 and abs(M[1, 1] - pair.lambda_minus) < 1e-8
    assert abs(M[0, 1] - pair.xi) < 1e-8


def test_real_even_xi_small():
    op = build_operator(COS, BC.PER_PLUS, 64)
    for n in (4, 6, 8):
        pair = invariant_pair(op, n)
        assert abs(pair.xi) < 1e-10


def test_derivative_at_zero():
    idx = index_set(BC.PER_PLUS, 8)
    e = np.zeros(len(idx), complex)
    e[list(idx).index(6)] = 1
    assert d0(e, BC.PER_PLUS, idx) == pytest.approx(6j)
    assert d0(np.ones(9), BC.NEU) == 0


@pytest.mark.parametrize("n", [4, 6, 7])
def test_G_satisfies_neumann_conditions(any_fixture, n):
    pair = invariant_pair(build_operator(any_fixture, BC.for_parity(n), 64), n)
    Gv = build_G(pair)
    assert abs(d0(Gv.G, pair.bc, pair.indices)) <= 1e-7 * n
    assert abs(d_pi(Gv.G, pair.bc, pair.indices)) <= 1e-7 * n
    assert np.linalg.norm(Gv.G) == pytest.approx(1.0)
    if abs(Gv.b) > 0 and abs(Gv.a) > 0:
        assert abs(Gv.b / Gv.a) == pytest.approx(abs(Gv.d0_f / Gv.d0_phi), rel=1e-10)


def test_G_equals_f_when_f_is_neumann():
    pair = invariant_pair(build_operator(COS, BC.PER_PLUS, 64), 6)
    Gv = build_G(pair)
    if abs(Gv.d0_f) <= 1e-10 * 6:
        assert Gv.b == 0 and np.allclose(Gv.G, pair.f)
    else:
        assert abs(Gv.d0_phi) <= 1e-10 * 6


def test_neumann_pairing_free():
    n = 4
    per = build_operator(ZERO, BC.PER_PLUS, 16)
    G = np.zeros(len(per), complex)
    G[per.position(n)] = G[per.position(-n)] = 1 / math.sqrt(2)
    gv = neumann_vector(build_operator(ZERO, BC.NEU, 32), n, G, per.indices)
    assert gv.pairing == pytest.approx(1.0)


def test_neumann_pairing_large_n_mathieu():
    per = build_operator(COS, BC.PER_PLUS, 64)
    neu = build_operator(COS, BC.NEU, 128)
    for n in (8, 12, 16):
        pair = invariant_pair(per, n)
        gv = neumann_vector(neu, n, build_G(pair), per.indices)
        assert gv.pairing >= 71 / 72 and gv.distance <= 1 / 6


def test_neumann_conjugate_relation():
    spec = fixtures.mathieu_plus_one_sided()
    per = build_operator(spec, BC.PER_PLUS, 64)
    neu = build_operator(spec, BC.NEU, 128)
    gv = neumann_vector(neu, 6, build_G(invariant_pair(per, 6)), per.indices)
    conj_op = build_operator(spec.conj(), BC.NEU, 128).matrix
    g = gv.g
    assert np.linalg.norm(neu.matrix @ g - gv.nu * g) < 1e-8
    # for the bilinear pairing, L(conj v) applied to conj g gives conj(nu) conj g
    assert np.linalg.norm(conj_op @ g.conj() - np.conj(gv.nu) * g.conj()) < 1e-8


def test_dere_free_is_zero():
    per = build_operator(ZERO, BC.PER_PLUS, 16)
    pair = invariant_pair(per, 4)
    Gv = build_G(pair)
    gv = neumann_vector(build_operator(ZERO, BC.NEU, 32), 4, Gv, per.indices)
    assert dere_residual(pair, Gv, gv) == 0


@pytest.mark.parametrize("name,ns", [("mathieu", range(3, 6)), ("mathieu_plus_one_sided", range(5, 8))])
def test_dere_within_contract(name, ns):
    spec = fixtures.get(name)
    for n in ns:
        per = build_operator(spec, BC.for_parity(n), 128)
        pair = invariant_pair(per, n)
        Gv = build_G(pair)
        gv = neumann_vector(build_operator(spec, BC.NEU, 256), n, Gv, per.indices)
        scale = abs(pair.gamma) + abs(pair.z_plus - gv.z) + abs(pair.xi)
        assert dere_residual(pair, Gv, gv) <= 1e-7 * (scale + 1e-12)


def test_case_examples():
    assert case_classify(1, 1).label == "Case1"
    assert case_classify(0, 1e-3).label == "Case2a"
    assert case_classify(5, 1).label == "Case2b"
    assert case_classify(4, 1).label == "Case1"
    assert case_classify(1, 1, 1.0, 2.0).d0_ratio == 0.5

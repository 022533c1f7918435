import numpy as np
import pytest
from scipy import special

from hillspec import fixtures
from hillspec.opmatrix import BC, build_operator
from hillspec.potential import PotentialSpec
from hillspec.spectra import (
    EigenError,
    StructureError,
    choose_N,
    disk_index,
    eigenvalues,
    localize,
    pair_periodic,
    single_in_disk,
    triangle,
)

COS = fixtures.mathieu()


def test_free_neumann_spectrum():
    vals = eigenvalues(build_operator(PotentialSpec(()), BC.NEU, 8)).values
    assert np.allclose(vals[:6], [0, 1, 4, 9, 16, 25], atol=1e-12)


def test_free_periodic_double_eigenvalues():
    vals = eigenvalues(build_operator(PotentialSpec(()), BC.PER_PLUS, 8)).values
    assert np.allclose(vals[:5], [0, 4, 4, 16, 16], atol=1e-12)


@pytest.mark.parametrize("q", [0.5, 1.0, 3.0])
def test_mathieu_characteristic_values(q):
    spec = fixtures.mathieu(q)
    neu = eigenvalues(build_operator(spec, BC.NEU, 96)).values.real
    dir_ = eigenvalues(build_operator(spec, BC.DIR, 96)).values.real
    per = np.sort(np.concatenate([eigenvalues(build_operator(spec, bc, 48)).values.real for bc in (BC.PER_PLUS, BC.PER_MINUS)]))
    a = np.array([special.mathieu_a(m, q) for m in range(20)])
    b = np.array([special.mathieu_b(m, q) for m in range(1, 20)])
    assert np.allclose(neu[:20], a, atol=1e-9)
    assert np.allclose(dir_[:19], b, atol=1e-9)
    assert np.allclose(per[:39], np.sort(np.concatenate([a, b])), atol=1e-9)


def test_neumann_converges_under_refinement():
    lo = eigenvalues(build_operator(COS, BC.NEU, 128)).values[:20]
    hi = eigenvalues(build_operator(COS, BC.NEU, 256)).values[:20]
    assert np.max(np.abs(lo - hi)) < 1e-9


def test_triangular_fast_path_keeps_exact_doubles():
    res = eigenvalues(build_operator(fixtures.gasymov(), BC.PER_PLUS, 32))
    assert res.triangular
    vals = res.values
    for n in range(2, 30, 2):
        assert np.sum(vals == n * n) == 2


def test_eigen_residual_contract(any_fixture):
    res = eigenvalues(build_operator(any_fixture, BC.PER_MINUS, 48))
    assert res.max_relative_residual < 1e-10
    assert np.all(np.isfinite(res.error_estimate()))


def test_non_finite_matrix_rejected():
    with pytest.raises(EigenError):
        eigenvalues(np.array([[np.nan, 0], [0, 1.0]]))


def test_localize_example():
    loc = localize([0, 4, 4, 16, 16, 36, 36], BC.PER_PLUS, 2)
    assert loc.in_rectangle == [0, 4, 4]
    assert loc.disk(4) == [16, 16] and loc.disk(6) == [36, 36]


def test_disk_index_examples():
    for n in (5, 8, 13):
        assert disk_index(n * n + n / 8, BC.NEU) == n
        assert disk_index(n * n + n / 2, BC.NEU) is None


def test_choose_N_free_is_two():
    spectra = {bc: eigenvalues(build_operator(PotentialSpec(()), bc, 64)).values for bc in BC}
    assert choose_N(spectra, 16) == 2


def test_choose_N_stable_under_refinement():
    def N_at(K):
        spectra = {bc: eigenvalues(build_operator(COS, bc, K if bc.is_periodic else 2 * K)).values for bc in BC}
        return choose_N(spectra, 32)

    assert N_at(128) == N_at(192)


def test_choose_N_grows_with_potential_size():
    def N_of(spec):
        spectra = {bc: eigenvalues(build_operator(spec, bc, 128 if bc.is_periodic else 256)).values for bc in BC}
        return choose_N(spectra, 64)

    # the lowest eigenvalue of 40cos2x sits near -28, so R_N must reach it
    assert N_of(fixtures.mathieu(20.0)) > N_of(COS)


def test_pair_convention():
    loc = localize([4.1, 3.9], BC.PER_PLUS, 0)
    assert pair_periodic(loc, 2) == (4.1, 3.9)
    loc = localize([4 + 0.1j, 4 - 0.1j], BC.PER_PLUS, 0)
    assert pair_periodic(loc, 2)[0] == 4 + 0.1j


def test_pair_requires_two():
    with pytest.raises(StructureError):
        pair_periodic(localize([16.0], BC.PER_PLUS, 2), 4)
    with pytest.raises(StructureError):
        single_in_disk(localize([], BC.NEU, 2), 4)


def test_real_even_pairs_are_ordered():
    loc = localize(eigenvalues(build_operator(COS, BC.PER_PLUS, 64)).values, BC.PER_PLUS, 2)
    for n in range(4, 30, 2):
        lp, lm = pair_periodic(loc, n)
        assert abs(lp.imag) < 1e-10 and lp.real >= lm.real


def test_free_triangle_is_zero():
    t = triangle(6, (36, 36), 36, 36)
    assert t.gamma == 0 and t.delta_dir == 0 and t.delta_neu == 0 and t.z_star == 0


def test_triangle_invariant_under_constant_shift():
    shifted = COS.add_constant(0.7 - 0.2j)
    out = []
    for spec in (COS, shifted):
        e = {bc: eigenvalues(build_operator(spec, bc, 64 if bc.is_periodic else 128)).values for bc in BC}
        locs = {bc: localize(v - spec.coefficient(0), bc, 2) for bc, v in e.items()}
        out.append(triangle(6, pair_periodic(locs[BC.PER_PLUS], 6), single_in_disk(locs[BC.NEU], 6), single_in_disk(locs[BC.DIR], 6)))
    assert abs(out[0].gamma - out[1].gamma) < 1e-10
    assert abs(out[0].delta_neu - out[1].delta_neu) < 1e-10
    assert abs(out[0].delta_dir - out[1].delta_dir) < 1e-10

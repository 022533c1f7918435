import math

import numpy as np
import pytest

from hillspec import fixtures


def gauss_integral(f, a=0.0, b=math.pi, points=400):
    """Gauss-Legendre quadrature; spectrally accurate for smooth integrands."""
    x, w = np.polynomial.legendre.leggauss(points)
    t = 0.5 * (b - a) * x + 0.5 * (b + a)
    return 0.5 * (b - a) * np.sum(w * f(t))


@pytest.fixture
def cos2():
    return fixtures.mathieu()


@pytest.fixture(params=["mathieu", "mathieu_plus_one_sided", "asymmetric_pair", "gasymov", "mathieu_plus_i_cos4", "algebraic"])
def any_fixture(request):
    return fixtures.get(request.param)


ACCEPTANCE = {}


def record_criterion(number, ok, detail):
    ACCEPTANCE[number] = (bool(ok), detail)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

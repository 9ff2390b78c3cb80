import cmath
import math

import mpmath
import numpy as np
import pytest

from gl3twist import archimedean as ar
from gl3twist import gl3form

D3 = (0j, 0j, 0j)


def test_log_gamma_pole():
    with pytest.raises(ValueError):
        ar.log_gamma(-2.0)
    assert abs(ar.log_gamma(5.0) - math.log(24)) < 1e-14


def test_a_coefficient_d3():
    a = ar.a_coefficient(gl3form.d3_form())
    assert abs(a.value - 1.5 * float(mpmath.digamma(0.25))) < 1e-12
    assert a.discrepancy < 1e-7


def test_kappa():
    assert abs(ar.gamma_ratio_kappa(gl3form.sym2_delta_form()) - 1) < 1e-14
    f = gl3form.satake_form("m", {3: [1, 1, 1]}, gamma=(2.5j, -2.5j, 0))
    k = ar.gamma_ratio_kappa(f)
    kd = ar.gamma_ratio_kappa(gl3form.dual(f))
    assert abs(k * kd - 1) < 1e-12
    # equals prod Gamma((1/2+g)/2) / Gamma((1/2-g)/2) for Maass-type parameters
    ref = 1
    for g in f.gamma:
        ref *= complex(mpmath.gamma((0.5 + g) / 2) / mpmath.gamma((0.5 - g) / 2))
    assert abs(k - ref) < 1e-12


def _V_mp(y):
    # independent evaluation on Re s = 1.5 with mpmath quadrature (H = 1)
    g0 = mpmath.gamma(0.25) ** 3

    def f(t):
        s = 1.5 + 1j * t
        return mpmath.gamma((s + 0.5) / 2) ** 3 / g0 * mpmath.power(y, -s) / s
    return float(mpmath.re(mpmath.quad(f, [-40, -10, 0, 10, 40]) / (2 * mpmath.pi)))


@pytest.mark.parametrize("y", [0.3, 2.0, 7.0])
def test_V_accurate_vs_mpmath(y):
    assert abs(ar.V_accurate(D3, [y])[0].real - _V_mp(y)) < 1e-10


def test_V_limits():
    # V - 1 ~ y^{1/2} log^2 y near 0 (triple pole at s = -1/2)
    v = ar.V_accurate(D3, [1e-15, 1e-12, 1e-9, 40.0]).real
    gaps = np.abs(v[:3] - 1)
    assert gaps[0] < gaps[1] < gaps[2] and gaps[0] < 1e-4
    assert abs(v[3]) < 1e-15


def test_V_kernel_contour_shift():
    form = gl3form.d3_form()
    ys = np.array([0.1, 1.0, 5.0])
    vals = [ar.V_kernel(form, ys, ar.ContourSpec(u=u, T=20.0, nodes=8000), tol=1e-13)
            for u in (0.5, 1.0, 2.0)]
    assert max(np.max(np.abs(v - vals[0])) for v in vals) < 1e-9


def test_V_kernel_contour_errors():
    form = gl3form.d3_form()
    with pytest.raises(ar.ContourError):
        ar.V_kernel(form, 1.0, ar.ContourSpec(u=-0.5))
    with pytest.raises(ar.ContourError):
        ar.V_kernel(form, 1.0, ar.ContourSpec(T=1.0))


def test_V_derivative():
    y, h = 1.3, 1e-5
    fd = (ar.V_accurate(D3, [y * (1 + h)]) - ar.V_accurate(D3, [y * (1 - h)]))[0].real / (2 * h)
    assert abs(ar.V_accurate(D3, [y], deriv=True)[0].real - fd) < 1e-8


def test_cache_accuracy():
    c = ar.V_cache(gl3form.d3_form())
    assert c.interp_error < 1e-10
    ys = np.geomspace(1e-7, c.y_max * 0.9, 37)
    assert np.max(np.abs(c(ys) - ar.V_accurate(D3, ys).real)) < 1e-10
    b, _ = ar.shifted_line_bound(D3, c.y_max)
    assert b <= 1e-16


def test_bump_and_transforms():
    w = ar.SmoothWeight()
    t = np.linspace(1, 2, 200001)
    assert w.mass() == pytest.approx(np.trapezoid(ar.bump(t), t), rel=1e-9)
    for xi in (0.3, 2.0, 7.5):
        ref = np.trapezoid(ar.bump(t) * (np.cos(2 * np.pi * xi * t) + np.sin(2 * np.pi * xi * t)), t)
        assert abs(w.phi_tilde(xi) - ref) < 1e-10
    assert abs(w.phi_tilde(200.0)) < 1e-15


@pytest.mark.parametrize("wv", [0.5, 3 + 4j, 1 + 30j])
def test_phi_check_bound(wv):
    w = ar.SmoothWeight()
    assert abs(w.phi_check(wv)) <= ar.phi_check_bound(w, wv)

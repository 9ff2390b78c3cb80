import math
from fractions import Fraction

import pytest

from gl3twist import gl3form, symsq


def test_d3_local_series_are_binomials(d3):
    # phi x phi = zeta^9, sym^2 = zeta^6, sym^2 / dual = zeta^3
    loc = symsq.bc_coefficients(d3, 3, 8, exact=True)
    for h in range(9):
        assert loc.lam[h] == math.comb(h + 8, 8)
        assert loc.B[h] == math.comb(h + 5, 5)
        assert loc.C[h] == math.comb(h + 2, 2)


@pytest.mark.parametrize("p", [2, 3, 5, 7, 11])
def test_square_identity_exact(d3, sym2, p):
    assert symsq.verify_square_identity(d3, p, 6, exact=True) == 0
    assert symsq.verify_square_identity(sym2, p, 6, exact=True) == 0
    assert symsq.verify_square_identity(sym2, p, 6) < 1e-12


@pytest.mark.parametrize("p", [2, 3, 5, 7, 11])
def test_recursions_match_satake_expansion(sym2, p):
    r = symsq.recursion_residuals(sym2, p, 10)
    assert r["B"] < 1e-12 and r["C"] < 1e-12


def test_exact_values_are_fractions(sym2):
    loc = symsq.bc_coefficients(sym2, 2, 3, exact=True)
    assert all(isinstance(v, Fraction) for v in loc.C)


def test_tensor_factor_is_sym2_times_dual(sym2):
    s = 1.7
    for p in (3, 5, 11):
        lhs = symsq.tensor_local_factor(sym2, p, s)
        rhs = symsq.sym2_local_factor(sym2, p, s) * symsq.dual_local_factor(sym2, p, s)
        assert abs(lhs - rhs) < 1e-12 * abs(lhs)


def test_lambda_tensor_multiplicative(sym2):
    a = symsq.lambda_tensor(sym2, 12)
    assert abs(a - symsq.lambda_tensor(sym2, 4) * symsq.lambda_tensor(sym2, 3)) < 1e-12


def test_pole_detected(d3):
    with pytest.raises(ZeroDivisionError):
        symsq.sym2_local_factor(d3, 3, 0.0)


def test_depth_cap(sym2):
    with pytest.raises(ValueError):
        symsq.bc_coefficients(sym2, 3, 25)


def test_partial_sums_vs_pointwise(sym2):
    rep = symsq.partial_sum_abs_square_coeffs(sym2, [200])
    direct = sum(symsq.abs_square_coeff(sym2, n) for n in range(1, 201))
    assert rep.sums[0] == pytest.approx(direct, rel=1e-12)


def test_partial_sum_growth(sym2):
    rep = symsq.partial_sum_abs_square_coeffs(sym2, [10**3, 10**4])
    assert 0.8 < rep.slope < 1.15

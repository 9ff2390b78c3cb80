import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gl3twist import gl3form, moments
from gl3twist.arith import kronecker, mobius
from gl3twist.eulermain import MainTermError


@given(st.lists(st.tuples(st.sampled_from([1, 3, 5, 7, 11, 15, 21, 105, 2310 - 1]),
                          st.integers(1, 10**5)), min_size=1, max_size=30))
@settings(max_examples=30, deadline=None)
def test_compiled_character(pairs):
    pairs = [(d, n) for d, n in pairs if mobius(d) != 0]
    assert moments.chi_8d_kernel_check(pairs) == 0


def _l_half_mp(d):
    q = 8 * d
    chi = [0] + [kronecker(q, n) for n in range(1, q)]
    return float(mpmath.dirichlet(0.5, chi))


@pytest.mark.parametrize("d", [1, 5, 13])
def test_dirichlet_l_half_vs_mpmath(d):
    assert moments.dirichlet_l_half(d) == pytest.approx(_l_half_mp(d), rel=1e-10)


def test_d3_is_cube(d3):
    ds = [d for d in range(1, 30, 2) if mobius(d) != 0]
    ctx = moments.afe_context(d3, max(ds))
    vals = moments.central_values(ctx, ds)
    for d, v in zip(ds, vals):
        ref = moments.dirichlet_l_half(d) ** 3
        assert abs(v - ref) < 1e-8 * max(1, abs(ref))


def test_sym2_values_real(sym2):
    ds = [d for d in range(1, 80, 2) if mobius(d) != 0]
    vals = moments.central_values(moments.afe_context(sym2, max(ds)), ds)
    assert np.all(np.abs(vals.imag) <= 1e-12 * np.abs(vals))


def test_bad_d_rejected(d3):
    ctx = moments.afe_context(d3, 50)
    with pytest.raises(ValueError):
        moments.central_values(ctx, [9])
    with pytest.raises(ValueError):
        moments.central_values(ctx, [4])
    with pytest.raises(moments.TableTooShort):
        moments.central_values(ctx, [5001])


def test_support():
    assert moments.support_ds(0.4).size == 0
    ds = moments.support_ds(10)
    assert ds.tolist() == [11, 13, 15, 17, 19]


def test_empty_moment(d3):
    rep = moments.moment_report(d3, 1, 0.4)
    assert rep.count == 0 and rep.computed_moment == 0
    assert "no odd square-free" in rep.components["note"]


def test_main_term_rejects_d3(d3):
    with pytest.raises(MainTermError):
        moments.main_term_prediction(d3, 1, 100.0)


def test_moment_linear_in_weight(sym2):
    m = moments.twisted_first_moment(sym2, 3, 40.0)
    direct = sum(kronecker(8 * int(d), 3) * float(moments.archimedean.bump(d / 40.0)) * v
                 for d, v in zip(m.ds, m.values))
    assert abs(m.value - direct) < 1e-12 * max(1, abs(direct))


def test_report_json_roundtrip(sym2):
    rep = moments.moment_report(sym2, 1, 30.0, config={"X": 30.0})
    back = moments.MomentReport.from_json(rep.to_json())
    assert back.to_json() == rep.to_json()
    assert back.computed_moment == rep.computed_moment
    row = rep.csv_row().split(",")
    assert len(row) == len(moments.MomentReport.CSV_COLUMNS)


def test_poisson_small():
    chk = moments.poisson_verify(3, 200.0, 3.0)
    assert chk.residual < 1e-6 * max(1, abs(chk.lhs))
    with pytest.raises(ValueError):
        moments.poisson_verify(4, 200.0, 3.0)

import math

import mpmath
import numpy as np
import pytest

from gl3twist import eulermain as em
from gl3twist import gl3form
from gl3twist.arith import primes_up_to, squarefree_decompose


def test_prime_zeta_tail():
    p = primes_up_to(2 * 10**6).astype(float)
    direct = np.sum(p[p > 1000] ** -2.0)
    # the omitted part beyond 2e6 is below 1/(2e6 log 2e6)
    assert abs(em.prime_zeta_tail(1000, 2.0) - direct) < 1e-7


@pytest.mark.parametrize("l", [1, 3, 9, 45])
@pytest.mark.parametrize("s", [2.0, 1.3])
def test_local_series_matches_closed_form(sym2, l, s):
    tw = squarefree_decompose(l)
    for p in (3, 5, 7, 13):
        lhs = em._local_series(sym2, p, tw, s, 40)
        rhs = em.G_phi_p_local(sym2, p, tw, s) * em._sym2_local(sym2, p, s)
        if tw.divides_l(p):
            rhs *= p / (p + 1)
        assert abs(lhs - rhs) < 1e-12 * max(1, abs(lhs))


def test_even_prime_rejected(sym2):
    with pytest.raises(ValueError):
        em.G_phi_p_local(sym2, 2, 1, 1.0)


def test_L2_d3_is_zeta_power(d3):
    v = em.L2_sym2(d3, 2.0, 10**4).value
    ref = (math.pi**2 / 6 * 0.75) ** 6
    assert abs(v - ref) < 1e-8 * ref


def test_pole_orders(d3, sym2):
    assert em.pole_order(d3) == 6
    assert em.pole_order(sym2) == 1


def test_tail_correction_helps(sym2):
    far = em.G_phi_product(sym2, 1, 1.0, 10**5).value
    near = em.G_phi_product(sym2, 1, 1.0, 10**3)
    assert abs(near.value - far) < abs(near.raw - far)


def test_G_d3_direct(d3):
    # A = A' = 3 at every prime: compare with a long plain product
    P = 10**6
    primes = primes_up_to(P)
    primes = primes[primes > 2].astype(float)
    raw = np.prod(em._g_generic(primes, 3.0, 3.0, 1.0).real)
    got = em.G_phi_product(d3, 1, 1.0, 10**4).value.real
    assert abs(got - raw) < 1e-4 * abs(raw)


def test_residue_sym2(sym2):
    r = em.residue_L2_sym2(sym2, P=10**5, P_extrap=10**4)
    assert r.rel_diff < 0.01
    assert r.value > 0


def test_residue_rejects_d3(d3):
    with pytest.raises(em.MainTermError):
        em.residue_L2_sym2(d3, P=10**4)


def test_dirichlet_identity(sym2):
    chk = em.dirichlet_vs_product_check(sym2, 15, 2.0, M=10**3, direct_terms=200)
    assert chk.residual < 1e-10
    # the plain partial sum is close to the product as well (s = 2 converges fast)
    assert abs(chk.direct_partial - chk.lhs) < 1e-2 * abs(chk.lhs)


def test_c_phi_d3(d3):
    sel = em.compute_c_phi(d3)
    assert sel.c_phi == 88935 == 3 * 5 * 7**2 * 11**2
    assert all(abs(v) > em.ZERO_THRESHOLD for v in sel.local_factors.values())
    # (a, b) = (1, 1): 3 and 5 divide l1, so A(p,1) + 1/p != 0 is what matters
    assert (sel.a, sel.b) == (1, 1)


def test_local_ratio_and_determination(d3, sym2):
    assert em.local_ratio(d3, 5) == pytest.approx(16 / 8)
    same = em.determination_test(d3, d3)
    assert same.separating_prime is None
    diff = em.determination_test(d3, sym2)
    assert diff.separating_prime == 17
    with pytest.raises(ValueError):
        em.determination_test(d3, sym2, lo=5)


def test_C_phi_components(sym2):
    cp = em.C_phi(sym2, 1, P=10**4)
    assert cp.step_change < 1e-6
    assert np.isnan(cp.full)
    with pytest.raises(em.MainTermError):
        em.C_phi(gl3form.satake_form("x", {3: [1j, -1j, 1]}, self_dual=False), 1)

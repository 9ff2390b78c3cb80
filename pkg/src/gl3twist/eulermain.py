"""Main-term constants for the twisted first moment.

Local factors G_{phi,p}(s; l), their product over odd primes, the
symmetric-square L-function with the 2-factor removed (value or residue at
s = 1), the constant C_phi(l), the auxiliary modulus c_phi and the local
ratio used to tell two forms apart.

Truncated Euler products carry a tail correction: for large p,
log G_p(s) = (A - A'^2) p^{-2s} - (A^2 - A') p^{-1-s} + ..., with A = A(p,1)
and A' = A(1,p); the missing primes are accounted for by the empirical mean
of these coefficients times the prime zeta tail.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from . import archimedean
from .arith import TwistIndex, factorize, primes_up_to, squarefree_decompose
from .gl3form import Gl3Form, Sym2Satake, coeff_general, h_sequence

log = logging.getLogger(__name__)

ZERO_THRESHOLD = 1e-10
ZETA2 = math.pi**2 / 6


class PoleError(ZeroDivisionError):
    """A local factor hit a pole."""


class MainTermError(ValueError):
    """Main term requested outside the supported branch."""


# ---------------------------------------------------------------------------
# prime zeta tails
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _prime_sum(P: int, sigma: float) -> float:
    p = primes_up_to(P).astype(float)
    return float(np.sum(p ** (-sigma)))


def prime_zeta_tail(P: int, sigma: float) -> float:
    """sum_{p > P} p^{-sigma} for real sigma > 1."""
    if sigma <= 1:
        raise ValueError("prime zeta tail needs sigma > 1")
    return float(mpmath.primezeta(sigma)) - _prime_sum(int(P), float(sigma))


def _tail_mean(values: np.ndarray, primes: np.ndarray, P: int) -> complex:
    window = primes > P // 2
    if not window.any():
        window = np.ones_like(primes, dtype=bool)
    return complex(np.mean(values[window]))


# ---------------------------------------------------------------------------
# G_{phi,p}
# ---------------------------------------------------------------------------

def _g_generic(p, a, b, s):
    """Local factor for p not dividing l (arrays allowed)."""
    p = np.asarray(p, dtype=float)
    ps = p ** complex(s)
    x = 1 / ps
    den_pole = ps + b
    if np.any(np.abs(den_pole) < 1e-12):
        raise PoleError("p^s + A(1,p) = 0 in a local factor")
    num = ps * ps * a * a - ps * ps * b - ps * b * b + 2 * ps * a + 1
    corr = 1 - num / ((p + 1) * ps * ps * den_pole)
    return corr * (1 + b * x) * (1 - b * x + a * x * x - x**3)


def _g_l2(p, a, b, s):
    x = float(p) ** (-complex(s))
    return (1 + b * x) * (1 - b * x + a * x * x - x**3)


def _g_l1(p, a, b, s):
    x = float(p) ** (-complex(s))
    return (a + x) * (1 - b * x + a * x * x - x**3)


def G_phi_p_local(form: Gl3Form, p: int, twist: TwistIndex | int, s: complex) -> complex:
    """G_{phi,p}(s; l) for an odd prime p (three cases by p | l1, p | l2)."""
    if p % 2 == 0:
        raise ValueError("local factor defined at odd primes only")
    if not isinstance(twist, TwistIndex):
        twist = squarefree_decompose(twist)
    a, b, _ = form.local(p)
    if twist.divides_l1(p):
        return complex(_g_l1(p, a, b, s))
    if twist.divides_l(p):
        return complex(_g_l2(p, a, b, s))
    return complex(_g_generic(p, a, b, s))


@dataclass
class ProductValue:
    value: complex
    raw: complex
    tail: float
    P: int

    def __complex__(self):
        return complex(self.value)


def G_phi_product(form: Gl3Form, twist: TwistIndex | int, s: complex, P: int = 10**4,
                  tail_correct: bool = True) -> ProductValue:
    """prod_{3 <= p <= P} G_{phi,p}(s; l), with tail correction.

    ``tail`` is the size of the correction, which dominates the change
    from extending the product beyond P.
    """
    if not isinstance(twist, TwistIndex):
        twist = squarefree_decompose(twist)
    primes = primes_up_to(P)
    primes = primes[primes > 2]
    e1, e2, _ = form.source.elementary(primes)
    vals = np.array(_g_generic(primes, e1, e2, s), dtype=complex)
    for q in twist.primes:
        idx = np.searchsorted(primes, q)
        if idx < primes.size and primes[idx] == q:
            vals[idx] = G_phi_p_local(form, q, twist, s)
    raw = complex(np.prod(vals))
    # a zero local factor makes the product exactly 0
    if np.any(np.abs(vals) < ZERO_THRESHOLD):
        return ProductValue(0j, raw, 0.0, P)
    if not tail_correct:
        return ProductValue(raw, raw, float("nan"), P)
    sig = complex(s).real
    c2 = _tail_mean(e1 - e2 * e2, primes, P)
    c1 = _tail_mean(e1 * e1 - e2, primes, P)
    corr = c2 * prime_zeta_tail(P, 2 * sig) - c1 * prime_zeta_tail(P, 1 + sig)
    value = raw * complex(np.exp(corr))
    return ProductValue(value, raw, float(abs(value - raw)), P)


# ---------------------------------------------------------------------------
# symmetric square
# ---------------------------------------------------------------------------

def _power_sums(e1, e2, e3, K):
    p = [None] * (K + 1)
    p[1] = e1
    if K >= 2:
        p[2] = e1 * p[1] - 2 * e2
    if K >= 3:
        p[3] = e1 * p[2] - e2 * p[1] + 3 * e3
    for k in range(4, K + 1):
        p[k] = e1 * p[k - 1] - e2 * p[k - 2] + e3 * p[k - 3]
    return p


def _elementary_from_power(P, n):
    E = [np.ones_like(P[1])]
    for k in range(1, n + 1):
        acc = np.zeros_like(P[1])
        for i in range(1, k + 1):
            acc = acc + (-1) ** (i - 1) * E[k - i] * P[i]
        E.append(acc / k)
    return E


def sym2_inverse_polys(form: Gl3Form, primes: np.ndarray):
    """Coefficients c_0..c_6 (arrays over primes) of 1/L_p(s, sym^2) in
    x = p^{-s}, plus the first two sym^2 power sums."""
    e1, e2, e3 = form.source.elementary(primes)
    p = _power_sums(e1, e2, e3, 12)
    P = [None] + [(p[k] * p[k] + p[2 * k]) / 2 for k in range(1, 7)]
    E = _elementary_from_power(P, 6)
    coeffs = [(-1) ** k * E[k] for k in range(7)]
    return coeffs, P[1], P[2]


@dataclass
class L2Value:
    value: complex
    raw: complex
    tail: float
    P: int
    pole_order_estimate: float


def L2_sym2(form: Gl3Form, s: complex, P: int = 10**4, tail_correct: bool = True) -> L2Value:
    """prod_{3 <= p <= P} L_p(s, sym^2 phi) with a prime-zeta tail correction."""
    primes = primes_up_to(P)
    primes = primes[primes > 2]
    coeffs, P1, P2 = sym2_inverse_polys(form, primes)
    x = primes.astype(float) ** (-complex(s))
    inv = np.zeros(primes.size, dtype=complex)
    xp = np.ones_like(x)
    for c in coeffs:
        inv = inv + c * xp
        xp = xp * x
    if np.any(np.abs(inv) < 1e-14):
        raise PoleError("local sym^2 factor has a pole")
    logs = -np.log(inv)
    raw = complex(np.exp(np.sum(logs)))
    order = float(_tail_mean(P1, primes, P).real)
    sig = complex(s).real
    corr = 0j
    if tail_correct:
        # the prime average of the coefficients is the pole order (an integer);
        # the empirical window mean is too noisy to multiply a near-divergent tail
        m1 = round(float(np.mean(P1.real)))
        m2 = _tail_mean(P2, primes, P)
        if sig > 1:
            corr += m1 * prime_zeta_tail(P, sig)
        corr += 0.5 * m2 * prime_zeta_tail(P, 2 * sig)
    value = raw * complex(np.exp(corr))
    return L2Value(value, raw, float(abs(value - raw)), P, order)


def pole_order(form: Gl3Form, P: int = 10**4) -> int:
    """Order of the pole of L(s, sym^2 phi) at s = 1, read off from the
    prime average of its Dirichlet coefficients at primes."""
    primes = primes_up_to(P)
    primes = primes[primes > 2]
    _, P1, _ = sym2_inverse_polys(form, primes)
    return int(round(float(np.mean(P1.real))))


def _sym4_inverse(lam: np.ndarray, x: np.ndarray) -> np.ndarray:
    # (1 - x)(1 - 2cos2t x + x^2)(1 - 2cos4t x + x^2) with lam = 2 cos t
    c2 = lam * lam - 2          # 2 cos 2t
    c4 = c2 * c2 - 2            # 2 cos 4t
    return (1 - x) * (1 - c2 * x + x * x) * (1 - c4 * x + x * x)


@dataclass
class ResidueReport:
    value: float
    factorization: float
    extrapolation: float
    rel_diff: float
    c0_over_r: float
    dlog_sym4: float
    samples: dict = field(default_factory=dict)


def residue_L2_sym2(form: Gl3Form, P: int = 10**6, P_extrap: int | None = None,
                    deltas=(0.05, 0.025, 0.0125), check: bool = True) -> ResidueReport:
    """lim_{s->1} (s-1) L^{{2}}(s, sym^2 phi) for a symmetric-square lift.

    sym^2(sym^2 f) = sym^4 f + 1, so the residue is
    (1/2) prod_{odd p} L_p(1, sym^4 f).  The value is cross-checked by
    Richardson extrapolation of (s-1) L^{{2}}(s, sym^2 phi) from s = 1 + delta.
    """
    order = pole_order(form, min(P, 10**4))
    if order != 1:
        raise MainTermError(f"{form.label}: L(s, sym^2) has a pole of order {order} at s = 1, not 1")
    if not isinstance(form.source, Sym2Satake):
        raise MainTermError("residue available only for symmetric-square lifts")
    primes = primes_up_to(P)
    primes = primes[primes > 2]
    lam = form.source.lam(primes)
    x = 1 / primes.astype(float)
    inv = _sym4_inverse(lam, x)
    K1 = float(np.exp(-np.sum(np.log(inv))))
    fact = 0.5 * K1
    # d/ds log K at s = 1: sum_p (d/ds log L_p)
    xs = x
    dinv = (_sym4_inverse(lam, xs * (1 + 1e-7)) - _sym4_inverse(lam, xs * (1 - 1e-7))) / (2e-7)
    # d/ds x = -x log p
    dlogK = float(np.sum(dinv * xs * np.log(primes) / inv))
    c0_over_r = 2 * (np.euler_gamma + math.log(2)) + 2 * dlogK

    Pe = P_extrap or min(P, 10**5)
    samples = {}
    for dl in deltas:
        samples[dl] = dl * L2_sym2(form, 1 + dl, Pe).value.real
    ds = np.array(deltas)
    vs = np.array([samples[d] for d in deltas])
    coef = np.polyfit(ds, vs, len(ds) - 1)
    extrap = float(coef[-1])
    rel = abs(extrap - fact) / abs(fact)
    if check and rel > 0.01:
        raise MainTermError(f"residue mismatch: factorization {fact:.6g} vs extrapolation {extrap:.6g}")
    return ResidueReport(fact, fact, extrap, rel, float(c0_over_r), dlogK, samples)


# ---------------------------------------------------------------------------
# Dirichlet series vs Euler product
# ---------------------------------------------------------------------------

def _local_series(form, p, twist, s, hmax):
    a, b, c = form.local(p)
    h = h_sequence(a, b, c, 2 * hmax + 2)
    x = float(p) ** (-complex(s))
    if twist.divides_l1(p):
        return sum(h[2 * k + 1] * x**k for k in range(hmax + 1)) * p / (p + 1)
    if twist.divides_l(p):
        return sum(h[2 * k] * x**k for k in range(hmax + 1)) * p / (p + 1)
    return 1 + sum(h[2 * k] * x**k for k in range(1, hmax + 1)) * p / (p + 1)


@dataclass
class DirichletCheck:
    lhs: complex
    rhs: complex
    residual: float
    direct_partial: complex
    M: int


def dirichlet_vs_product_check(form: Gl3Form, twist: TwistIndex | int, s: complex,
                               M: int = 10**4, direct_terms: int = 2000) -> DirichletCheck:
    """Both sides of the Dirichlet-series / Euler-product identity.

    The left side is the Dirichlet series restricted to M-smooth odd m,
    i.e. the product over 3 <= p <= M of its local series, each summed from
    the coefficients A(p^k, 1) to full precision; the right side uses the
    closed-form local factors p/(p+1) G_{phi,p} L_p(sym^2) over the same
    primes.  ``direct_partial`` is the plain partial sum over odd m up to
    ``direct_terms``, reported for orientation only.
    """
    if not isinstance(twist, TwistIndex):
        twist = squarefree_decompose(twist)
    primes = primes_up_to(M)
    primes = primes[primes > 2]
    sig = complex(s).real
    lhs = 1 + 0j
    rhs = 1 + 0j
    for p in primes.tolist():
        hmax = max(2, int(math.ceil(40 / (sig * math.log(p)))) + 4)
        lhs *= _local_series(form, p, twist, s, hmax)
        loc = G_phi_p_local(form, p, twist, s) * _sym2_local(form, p, s)
        if twist.divides_l(p):
            loc *= p / (p + 1)
        rhs *= loc
    direct = _direct_partial(form, twist, s, direct_terms)
    return DirichletCheck(lhs, rhs, float(abs(lhs - rhs)), direct, M)


def _sym2_local(form, p, s):
    coeffs, _, _ = sym2_inverse_polys(form, np.array([p], dtype=np.int64))
    x = float(p) ** (-complex(s))
    return 1 / complex(sum(c[0] * x**k for k, c in enumerate(coeffs)))


def _direct_partial(form, twist, s, M):
    total = 0j
    for m in range(1, M + 1, 2):
        w = 1.0
        lm = twist.l * m
        for q in (factorize(lm) if lm > 1 else ()):
            w *= q / (q + 1)
        total += coeff_general(form, twist.l1 * m * m, 1) * m ** (-complex(s)) * w
    return total


# ---------------------------------------------------------------------------
# C_phi and c_phi
# ---------------------------------------------------------------------------

def G_phi_derivative(form: Gl3Form, twist, P: int = 10**4, h: float = 1e-4) -> tuple[complex, complex]:
    """G'_phi(1; l) by central differences with one Richardson step.

    Returns (derivative with step h, derivative with step h/2), both
    Richardson-improved, for the convergence check."""

    def G(s):
        return G_phi_product(form, twist, s, P).value

    def D(step):
        return (G(1 + step) - G(1 - step)) / (2 * step)

    d1, d2, d4 = D(h), D(h / 2), D(h / 4)
    return (4 * d2 - d1) / 3, (4 * d4 - d2) / 3


@dataclass
class CPhi:
    value: complex
    full: complex
    G: complex
    G_prime: complex
    G_prime_half: complex
    a: complex
    phi_log_ratio: float
    log_pi: float = math.log(math.pi)

    @property
    def step_change(self) -> float:
        ch = lambda gp: self.G * (2 / 3 * self.a - self.log_pi + self.phi_log_ratio) + 4 / 3 * gp
        return abs(ch(self.G_prime) - ch(self.G_prime_half)) / max(abs(self.value), 1e-300)


def C_phi(form: Gl3Form, twist, weight: archimedean.SmoothWeight | None = None,
          P: int = 10**4, c0_over_r: float | None = None) -> CPhi:
    """C_phi(l) = G (2a/3 - log pi + Phi'(0)/Phi(0)) + (4/3) G'(1; l).

    ``full`` adds G (log 8 + (2/3) c_1/R), the two constant terms that the
    residue computation at s = 0 also produces (from (8X/pi)^{3s/2} and from
    the constant term of L^{{2}}(1+2s, sym^2)); it is filled when
    ``c0_over_r`` (constant over residue of L^{{2}}(s, sym^2) at s = 1) is
    supplied.
    """
    if not form.self_dual:
        raise MainTermError("C_phi is defined for self-dual forms")
    weight = weight or archimedean.SmoothWeight()
    if not isinstance(twist, TwistIndex):
        twist = squarefree_decompose(twist)
    G = G_phi_product(form, twist, 1.0, P).value
    gp, gp2 = G_phi_derivative(form, twist, P)
    a = archimedean.a_coefficient(form).value
    ratio = weight.phi_check_deriv0() / weight.phi_check(0).real
    value = G * (2 / 3 * a - math.log(math.pi) + ratio) + 4 / 3 * gp
    full = complex("nan")
    if c0_over_r is not None:
        # L(1+2s) = R/s + c1 with R = r/2, c1 = c0, so c1/R = 2 c0 / r
        full = value + G * (math.log(8) + 2 / 3 * 2 * c0_over_r)
    return CPhi(complex(value), complex(full), complex(G), complex(gp), complex(gp2), complex(a), float(ratio))


@dataclass
class CPhiSelection:
    c_phi: int
    a: int
    b: int
    local_factors: dict[int, complex]


def compute_c_phi(form: Gl3Form) -> CPhiSelection:
    """Smallest (a, b) in {1,2}^2 making the local factors at 3, 5, 7, 11
    nonzero under l = 3^a 5^b 7^2 11^2."""
    for a in (1, 2):
        for b in (1, 2):
            l = 3**a * 5**b * 7**2 * 11**2
            tw = squarefree_decompose(l)
            loc = {p: G_phi_p_local(form, p, tw, 1.0) for p in (3, 5, 7, 11)}
            if all(abs(v) > ZERO_THRESHOLD for v in loc.values()):
                return CPhiSelection(l, a, b, loc)
    raise MainTermError(f"{form.label}: every candidate c_phi has a vanishing local factor")


# ---------------------------------------------------------------------------
# determination
# ---------------------------------------------------------------------------

def local_ratio(form: Gl3Form, p: int) -> complex:
    """(1 + p A(p,1)) / (p + A(1,p))."""
    a, b, _ = form.local(p)
    den = p + b
    if abs(den) < 1e-12:
        raise PoleError(f"p + A(1,p) = 0 at p = {p}")
    return (1 + p * a) / den


@dataclass
class PrimeComparison:
    p: int
    ratio_a: complex
    ratio_b: complex
    ratios_equal: bool
    coeffs_equal: bool
    positivity: float


@dataclass
class DeterminationResult:
    verdict: str
    separating_prime: int | None
    records: list[PrimeComparison]


def determination_test(form_a: Gl3Form, form_b: Gl3Form, lo: int = 17, hi: int = 97,
                       rtol: float = 1e-10) -> DeterminationResult:
    """Compare local ratios prime by prime on [lo, hi].

    Equal ratios at p force Re A(p,1) = Re A'(p,1), and then
    (p^2 + 2p Re A(p,1) + 1)(Im A(p,1) - Im A'(p,1)) = 0 with a positive
    first factor, so the coefficients agree.  Each record carries that
    factor and a direct coefficient comparison.
    """
    if lo < 13:
        raise ValueError("window must start at p >= 13")
    records = []
    first = None
    for p in primes_up_to(hi).tolist():
        if p < lo:
            continue
        for f in (form_a, form_b):
            bnd = 3 * p ** f.theta3_bound
            assert abs(f.A_1p(p)) <= bnd + 1e-9 and bnd < p, "Kim-Sarnak bound violated"
        ra, rb = local_ratio(form_a, p), local_ratio(form_b, p)
        same = abs(ra - rb) <= rtol * max(1.0, abs(ra), abs(rb))
        A, Ab = form_a.A_p1(p), form_b.A_p1(p)
        pos = p * p + 2 * p * A.real + 1
        assert pos > 0
        coeff_same = abs(A - Ab) <= rtol * max(1.0, abs(A))
        if same != coeff_same:
            raise AssertionError(f"ratio test and coefficient comparison disagree at p={p}")
        records.append(PrimeComparison(p, ra, rb, same, coeff_same, pos))
        if not same and first is None:
            first = p
    verdict = "indistinguishable on window" if first is None else f"separated at p={first}"
    return DeterminationResult(verdict, first, records)


# ---------------------------------------------------------------------------
# bundle
# ---------------------------------------------------------------------------

@dataclass
class MainTermConstants:
    G_phi_l: complex
    G_phi_deriv: complex
    L2_value_or_residue: complex
    C_phi_l: complex
    C_phi_full: complex
    kappa: complex
    a_coeff: complex
    c_phi: int
    branch: str
    diagnostics: dict = field(default_factory=dict)


def main_term_constants(form: Gl3Form, twist, weight=None, P: int = 10**4,
                        P_residue: int = 10**6) -> MainTermConstants:
    if not isinstance(twist, TwistIndex):
        twist = squarefree_decompose(twist)
    kappa = archimedean.gamma_ratio_kappa(form)
    a = archimedean.a_coefficient(form).value
    cphi = compute_c_phi(form).c_phi
    if form.self_dual:
        res = residue_L2_sym2(form, P_residue)
        cp = C_phi(form, twist, weight, P, c0_over_r=res.c0_over_r)
        return MainTermConstants(cp.G, cp.G_prime, res.value, cp.value, cp.full, kappa, a, cphi,
                                 "self_dual", {"residue": res, "C_phi": cp})
    G = G_phi_product(form, twist, 1.0, P)
    L2 = L2_sym2(form, 1.0, P)
    return MainTermConstants(G.value, complex("nan"), L2.value, complex("nan"), complex("nan"),
                             kappa, a, cphi, "non_self_dual", {"G": G, "L2": L2})

"""Rankin-Selberg and symmetric-square local coefficients.

With x = p^{-s}:

    L_p(phi x phi)   = sum_h lambda(p^h) x^h
    L_p(sym^2 phi)   = sum_h B(p^h) x^h  = L_p(phi x phi) / L_p(dual phi)
    L_p(sym^2)/L_p(dual) = sum_h C(p^h) x^h

and A(p^{2h}, 1) = C(p^h) + A(1,p) C(p^{h-1}).  Division by L_p(dual phi)
is multiplication by 1 - A(1,p)x + A(p,1)x^2 - x^3, which gives the B and
C recursions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .arith import factorize, primes_up_to
from .gl3form import Gl3Form, _multiplicative_fill, coeff_general, coeff_prime_power, h_sequence

H_MAX = 20


@dataclass
class SymSquareLocal:
    p: int
    lam: list
    B: list
    C: list


def _lam_prime_power(form: Gl3Form, p: int, h: int, exact: bool = False):
    # sum over k^3 m^2 n = p^h of A(n, m)^2, written additively 3i + 2j + r = h
    total = Fraction(0) if exact else 0j
    for i in range(h // 3 + 1):
        for j in range((h - 3 * i) // 2 + 1):
            r = h - 3 * i - 2 * j
            total += coeff_prime_power(form, p, r, j, exact=exact) ** 2
    return total


def lambda_tensor(form: Gl3Form, q: int, exact: bool = False):
    """Coefficient of q^{-s} in L(s, phi x phi).

    The term for k^3 m^2 n = q is A(n, m)^2 in the orientation where
    A(p^h, 1) is the h-th complete symmetric function of the Satake
    triple; for self-dual forms the orientation is immaterial.
    """
    if q < 1:
        raise ValueError("q must be positive")
    out = Fraction(1) if exact else 1 + 0j
    if q == 1:
        return out
    for p, h in factorize(q).items():
        out *= _lam_prime_power(form, p, h, exact)
    return out


def sym2_parameters(form: Gl3Form, p: int) -> np.ndarray:
    a, b, c = form.satake(p)
    return np.array([a * a, b * b, c * c, a * b, a * c, b * c], dtype=complex)


def sym2_local_factor(form: Gl3Form, p: int, s: complex) -> complex:
    """L_p(s, sym^2 phi) as a product of six inverse factors."""
    x = complex(p) ** (-s)
    factors = 1 - sym2_parameters(form, p) * x
    if np.any(np.abs(factors) < 1e-14):
        raise ZeroDivisionError(f"local sym^2 factor has a pole at p={p}, s={s}")
    return complex(1 / np.prod(factors))


def tensor_local_factor(form: Gl3Form, p: int, s: complex) -> complex:
    """L_p(s, phi x phi) from the nine products of Satake parameters."""
    t = np.asarray(form.satake(p))
    x = complex(p) ** (-s)
    return complex(1 / np.prod(1 - np.outer(t, t).ravel() * x))


def dual_local_factor(form: Gl3Form, p: int, s: complex) -> complex:
    e1, e2, e3 = form.local(p)
    x = complex(p) ** (-s)
    return 1 / (1 - e2 * x + e1 * e3 * x * x - e3 * e3 * x**3)


def _convolve_dual_inverse(seq, A_p1, A_1p):
    # multiply the series by 1 - A(1,p)x + A(p,1)x^2 - x^3
    out = []
    for h in range(len(seq)):
        v = seq[h]
        if h >= 1:
            v -= A_1p * seq[h - 1]
        if h >= 2:
            v += A_p1 * seq[h - 2]
        if h >= 3:
            v -= seq[h - 3]
        out.append(v)
    return out


def bc_coefficients(form: Gl3Form, p: int, H: int, exact: bool = False) -> SymSquareLocal:
    """lambda, B, C at p^h for 0 <= h <= H."""
    if H > H_MAX:
        raise ValueError(f"depth {H} exceeds {H_MAX}")
    if exact:
        ex = form.source.exact(p)
        if ex is None:
            raise ValueError(f"{form.label}: exact data unavailable at p={p}")
        A_p1, A_1p = ex[0], ex[1]
    else:
        A_p1, A_1p = form.A_p1(p), form.A_1p(p)
    lam = [_lam_prime_power(form, p, h, exact) for h in range(H + 1)]
    B = _convolve_dual_inverse(lam, A_p1, A_1p)
    C = _convolve_dual_inverse(B, A_p1, A_1p)
    return SymSquareLocal(p, lam, B, C)


def verify_square_identity(form: Gl3Form, p: int, H: int, exact: bool = False) -> float:
    """max_h |A(p^{2h},1) - C(p^h) - A(1,p) C(p^{h-1})| for h <= H."""
    if H > 10:
        raise ValueError("depth capped at 10")
    loc = bc_coefficients(form, p, H, exact)
    A_1p = form.source.exact(p)[1] if exact else form.A_1p(p)
    worst = 0
    for h in range(H + 1):
        rhs = loc.C[h] + (A_1p * loc.C[h - 1] if h else 0)
        r = abs(coeff_prime_power(form, p, 2 * h, 0, exact=exact) - rhs)
        worst = max(worst, r)
    return float(worst)


def recursion_residuals(form: Gl3Form, p: int, H: int) -> dict[str, float]:
    """Relative residuals of B and C against their Satake-side expansions."""
    loc = bc_coefficients(form, p, H)
    params = sym2_parameters(form, p)
    # coefficients of prod (1 - t x)^{-1} truncated at H
    ser = np.zeros(H + 1, dtype=complex)
    ser[0] = 1
    for t in params:
        for h in range(1, H + 1):
            ser[h] += t * ser[h - 1]
    e1, e2, e3 = form.local(p)
    dual_inv = [1, -e2, e1 * e3, -e3 * e3]
    cser = np.convolve(ser, dual_inv)[: H + 1]
    scale = max(1.0, float(np.max(np.abs(ser))))
    return {
        "B": float(np.max(np.abs(np.array(loc.B) - ser))) / scale,
        "C": float(np.max(np.abs(np.array(loc.C) - cser))) / max(1.0, float(np.max(np.abs(cser)))),
    }


@dataclass
class PartialSumReport:
    X: list[int]
    sums: list[float]
    ratios: list[float]
    slope: float


def partial_sum_abs_square_coeffs(form: Gl3Form, X: int | list[int]) -> PartialSumReport:
    """sum_{n <= X} |A(n^2, 1)| with the log-log slope across the X values."""
    Xs = sorted({int(x) for x in np.atleast_1d(X)})
    Xmax = Xs[-1]
    # A(n^2,1) is multiplicative in n: fill prime powers p^{2k}, then sieve
    table = np.zeros(Xmax + 1, dtype=float)
    table[1] = 1.0
    primes = primes_up_to(Xmax)
    e1, e2, e3 = form.source.elementary(primes)
    for idx, p in enumerate(primes.tolist()):
        kmax = int(math.log(Xmax) / math.log(p) + 1e-9)
        h = h_sequence(complex(e1[idx]), complex(e2[idx]), complex(e3[idx]), 2 * kmax)
        pk = 1
        for k in range(1, kmax + 1):
            pk *= p
            if pk > Xmax:
                break
            table[pk] = abs(h[2 * k])
    table = _multiplicative_fill(table, Xmax)
    csum = np.cumsum(table)
    sums = [float(csum[x]) for x in Xs]
    ratios = [s / x for s, x in zip(sums, Xs)]
    if len(Xs) >= 2:
        slope = float(np.polyfit(np.log(Xs), np.log(sums), 1)[0])
    else:
        slope = float("nan")
    return PartialSumReport(Xs, sums, ratios, slope)


def abs_square_coeff(form: Gl3Form, n: int) -> float:
    return abs(coeff_general(form, n * n, 1))

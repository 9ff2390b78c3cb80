"""Exact integer number theory: primes, Kronecker symbols, square-free
machinery and the quadratic Gauss sums G_k(n).

Everything here is pure integer arithmetic apart from the float views of
Gauss sums and the vectorised character tables used by the moment code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

PRIME_TABLE_LIMIT = 10**6


class ArithError(ValueError):
    """Raised for inputs outside the domain of an arithmetic routine."""


# ---------------------------------------------------------------------------
# primes and factorisation
# ---------------------------------------------------------------------------

def primes_up_to(n: int) -> np.ndarray:
    """All primes p <= n (Eratosthenes, odd-only bitmap)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n // 2 + 1, dtype=bool)  # index i <-> 2i+1
    sieve[0] = False
    for i in range(1, (math.isqrt(n) - 1) // 2 + 1):
        if sieve[i]:
            p = 2 * i + 1
            sieve[p * p // 2::p] = False
    odd = 2 * np.nonzero(sieve)[0] + 1
    odd = odd[odd <= n]
    return np.concatenate(([2], odd)).astype(np.int64)


@lru_cache(maxsize=1)
def _prime_table() -> tuple[int, ...]:
    return tuple(int(p) for p in primes_up_to(PRIME_TABLE_LIMIT))


def factorize(n: int) -> dict[int, int]:
    """Prime factorisation of |n| by trial division over the prime table.

    Raises if a cofactor larger than the square of the table limit survives.
    """
    n = abs(int(n))
    if n == 0:
        raise ArithError("cannot factor 0")
    out: dict[int, int] = {}
    for p in _prime_table():
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out[p] = e
    if n > 1:
        if n > PRIME_TABLE_LIMIT**2:
            raise ArithError(f"cofactor {n} exceeds the factorisation range")
        out[n] = out.get(n, 0) + 1
    return out


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = factorize(n)
    return len(f) == 1 and next(iter(f.values())) == 1


def euler_phi(n: int) -> int:
    r = n
    for p in factorize(n):
        r -= r // p
    return r


def smallest_prime_factor_table(n: int) -> np.ndarray:
    """spf[m] for 0 <= m <= n (spf[0] = spf[1] = 0)."""
    spf = np.zeros(n + 1, dtype=np.int32 if n < 2**31 else np.int64)
    for p in primes_up_to(math.isqrt(n)):
        block = spf[p * p::p]
        block[block == 0] = p
    rest = np.nonzero(spf[2:] == 0)[0] + 2
    spf[rest] = rest
    return spf


# ---------------------------------------------------------------------------
# Kronecker / Jacobi symbols
# ---------------------------------------------------------------------------

def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n) for any integer a and nonzero integer n."""
    a, n = int(a), int(n)
    if n == 0:
        raise ArithError("Kronecker symbol undefined for n = 0")
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    # factor out powers of two from n
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a/n) for odd positive n
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def chi_8d(d: int, m: int) -> int:
    """The primitive quadratic character chi_{8d}(m) = (8d/m)."""
    return kronecker(8 * d, m)


@lru_cache(maxsize=4096)
def _legendre_table(p: int) -> np.ndarray:
    tab = -np.ones(p, dtype=np.int8)
    tab[0] = 0
    r = np.arange(1, p, dtype=np.int64)
    tab[(r * r) % p] = 1
    return tab


def jacobi_table(d: int) -> np.ndarray:
    """Array t with t[r] = (r/d) for 0 <= r < d, d odd positive."""
    if d <= 0 or d % 2 == 0:
        raise ArithError("jacobi_table needs an odd positive modulus")
    tab = np.ones(d, dtype=np.int8)
    if d == 1:
        return tab
    r = np.arange(d)
    for p, e in factorize(d).items():
        if e % 2:
            tab *= _legendre_table(p)[r % p]
        else:
            tab *= (r % p != 0).astype(np.int8)
    return tab


def chi_8d_array(d: int, n: np.ndarray) -> np.ndarray:
    """Vectorised chi_{8d}(n) for odd positive d and positive integers n.

    For odd n, (8d/n) = (2/n)(d/n) and quadratic reciprocity turns (d/n)
    into (n/d)(-1)^{(d-1)(n-1)/4}, which is periodic in n modulo d.
    """
    n = np.asarray(n, dtype=np.int64)
    odd = (n & 1).astype(bool)
    two = np.where((n % 8 == 1) | (n % 8 == 7), 1, -1)
    recip = np.where(((d % 4) == 3) & ((n % 4) == 3), -1, 1)
    out = two * recip * jacobi_table(d)[n % d]
    return np.where(odd, out, 0).astype(np.int8)


# ---------------------------------------------------------------------------
# square-free machinery
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwistIndex:
    """Odd twist index l = l1 * l2**2 with l1 square-free."""

    l: int
    l1: int
    l2: int

    def __post_init__(self):
        if self.l % 2 == 0 or self.l < 1:
            raise ArithError(f"twist index must be odd and positive, got {self.l}")
        if self.l1 * self.l2 * self.l2 != self.l or mobius(self.l1) == 0:
            raise ArithError(f"inconsistent decomposition {self}")

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(sorted(factorize(self.l))) if self.l > 1 else ()

    def divides_l1(self, p: int) -> bool:
        return self.l1 % p == 0

    def divides_l(self, p: int) -> bool:
        return self.l % p == 0


def squarefree_decompose(l: int) -> TwistIndex:
    l = int(l)
    if l < 1 or l % 2 == 0:
        raise ArithError(f"twist index must be odd and positive, got {l}")
    l1 = l2 = 1
    if l > 1:
        for p, e in factorize(l).items():
            l1 *= p ** (e % 2)
            l2 *= p ** (e // 2)
    return TwistIndex(l, l1, l2)


def mobius(n: int) -> int:
    if n == 1:
        return 1
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def squarefree_indicator(d: int) -> int:
    return 1 if mobius(d) != 0 else 0


def mobius_block(start: int, stop: int) -> np.ndarray:
    """mu(d) for start <= d < stop via a segmented sieve (start >= 1)."""
    if start < 1 or stop < start:
        raise ArithError("mobius_block needs 1 <= start <= stop")
    m = stop - start
    mu = np.ones(m, dtype=np.int8)
    prod = np.ones(m, dtype=np.int64)
    d = np.arange(start, stop, dtype=np.int64)
    for p in primes_up_to(math.isqrt(max(stop - 1, 1))):
        p = int(p)
        first = (-start) % p
        mu[first::p] *= -1
        prod[first::p] *= p
        p2 = p * p
        mu[(-start) % p2::p2] = 0
    big = prod != d
    mu[big] *= -1  # one prime factor above sqrt(stop)
    return mu


def squarefree_block(start: int, stop: int) -> np.ndarray:
    return mobius_block(start, stop) != 0


def MY(d: int, Y: float) -> int:
    """Truncated Mobius approximation sum_{l^2 | d, l <= Y} mu(l)."""
    if Y < 1:
        raise ArithError("Y must be >= 1")
    total = 0
    for l in range(1, min(int(Y), math.isqrt(d)) + 1):
        if d % (l * l) == 0:
            total += mobius(l)
    return total


def RY(d: int, Y: float) -> int:
    """Remainder mu^2(d) - M_Y(d) = sum_{l^2 | d, l > Y} mu(l)."""
    return squarefree_indicator(d) - MY(d, Y)


def MY_block(start: int, stop: int, Y: float) -> np.ndarray:
    """M_Y(d) for start <= d < stop."""
    out = np.zeros(stop - start, dtype=np.int64)
    for l in range(1, int(Y) + 1):
        mu = mobius(l)
        if mu == 0:
            continue
        l2 = l * l
        out[(-start) % l2::l2] += mu
    return out


# ---------------------------------------------------------------------------
# Gauss sums
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussSumValue:
    """G_k(n) stored exactly as coeff * sqrt(radicand)."""

    n: int
    k: int
    coeff: int
    radicand: int

    @property
    def value(self) -> float:
        return self.coeff * math.sqrt(self.radicand)

    def __float__(self) -> float:
        return self.value


def _gauss_prime_power(k: int, p: int, beta: int) -> tuple[int, int]:
    if k == 0:
        alpha = math.inf
    else:
        alpha = 0
        kk = abs(k)
        while kk % p == 0:
            kk //= p
            alpha += 1
    if beta <= alpha:
        if beta % 2:
            return 0, 1
        return p**beta - p ** (beta - 1), 1
    if beta == alpha + 1:
        a = int(alpha)
        if beta % 2:
            return kronecker(k // p**a, p) * p**a, p
        return -(p**a), 1
    return 0, 1


def gauss_G(k: int, n: int) -> GaussSumValue:
    """Closed-form G_k(n) by multiplicativity over prime powers."""
    k, n = int(k), int(n)
    if n < 1 or n % 2 == 0:
        raise ArithError(f"G_k(n) needs odd positive n, got {n}")
    coeff, rad = 1, 1
    if n > 1:
        for p, beta in factorize(n).items():
            c, r = _gauss_prime_power(k, p, beta)
            if c == 0:
                return GaussSumValue(n, k, 0, 1)
            coeff *= c
            rad *= r
    return GaussSumValue(n, k, coeff, rad)


BRUTE_LIMIT = 10**4


def gauss_brute(k: int, n: int) -> complex:
    """G_k(n) from the defining character sum (quadratic cost oracle)."""
    k, n = int(k), int(n)
    if n < 1 or n % 2 == 0:
        raise ArithError(f"G_k(n) needs odd positive n, got {n}")
    if n > BRUTE_LIMIT:
        raise ArithError(f"n = {n} is beyond the brute-force oracle range")
    a = np.arange(n)
    chars = jacobi_table(n)[a].astype(float)
    tau = np.sum(chars * np.exp(2j * np.pi * ((a * k) % n) / n))
    pref = (1 - 1j) / 2 + kronecker(-1, n) * (1 + 1j) / 2
    return complex(pref * tau)

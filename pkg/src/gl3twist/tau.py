"""Ramanujan tau function and the normalised Hecke eigenvalues of Delta.

Production path: Delta = q * (sum_k (-1)^k (2k+1) q^{k(k+1)/2})^8, the
eighth power of Jacobi's cube of eta, raised exactly over the integers
with FLINT.  Two independent oracles are kept for small N: the literal
product q * prod (1 - q^n)^24 and (E4^3 - E6^2)/1728 from divisor sums.
"""

from __future__ import annotations

import logging
from functools import lru_cache
from pathlib import Path

import flint
import numpy as np

from .arith import primes_up_to

log = logging.getLogger(__name__)

CACHE_DIR = Path.home() / ".cache" / "gl3twist"


def tau_series(N: int) -> list[int]:
    """[tau(0), tau(1), ..., tau(N)] with tau(0) = 0, exact integers."""
    if N < 1:
        return [0] * (N + 1)
    coeffs = [int(c) for c in _delta_poly(N).coeffs()]
    return [0] + coeffs + [0] * (N - len(coeffs))


def _delta_poly(N: int) -> flint.fmpz_poly:
    """Delta / q truncated to q^{N-1}: coefficient i is tau(i + 1)."""
    # (prod (1-q^n))^3 = sum (-1)^k (2k+1) q^{k(k+1)/2}
    jac = [0] * N
    k = 0
    while k * (k + 1) // 2 < N:
        jac[k * (k + 1) // 2] = (-1) ** k * (2 * k + 1)
        k += 1
    return flint.fmpz_poly(jac).pow_trunc(8, N)


def tau_product_oracle(N: int) -> list[int]:
    """tau(n) for n <= N from the literal q-product (quadratic cost)."""
    series = [0] * N
    series[0] = 1
    for n in range(1, N):
        for _ in range(24):
            for i in range(N - 1, n - 1, -1):
                series[i] -= series[i - n]
    return [0] + series


def tau_eisenstein_oracle(N: int) -> list[int]:
    """tau(n) for n <= N from (E4^3 - E6^2)/1728 with divisor sums."""
    sig3 = [0] * (N + 1)
    sig5 = [0] * (N + 1)
    for d in range(1, N + 1):
        for m in range(d, N + 1, d):
            sig3[m] += d**3
            sig5[m] += d**5
    e4 = [1] + [240 * s for s in sig3[1:]]
    e6 = [1] + [-504 * s for s in sig5[1:]]

    def mul(a, b):
        out = [0] * (N + 1)
        for i, ai in enumerate(a):
            if ai:
                for j in range(N + 1 - i):
                    out[i + j] += ai * b[j]
        return out

    e4cube = mul(mul(e4, e4), e4)
    e6sq = mul(e6, e6)
    diff = [x - y for x, y in zip(e4cube, e6sq)]
    assert all(x % 1728 == 0 for x in diff)
    return [x // 1728 for x in diff]


def _cache_path(N: int) -> Path:
    return CACHE_DIR / f"delta_lambda_primes_{N}.npz"


@lru_cache(maxsize=4)
def delta_prime_eigenvalues(N: int) -> tuple[np.ndarray, np.ndarray]:
    """(primes p <= N, lambda(p) = tau(p) / p^{11/2}) for the discriminant form.

    Results are cached on disk; computing N = 10^7 from scratch takes
    roughly half a minute.
    """
    N = max(int(N), 2)
    for path in sorted(CACHE_DIR.glob("delta_lambda_primes_*.npz")):
        try:
            M = int(path.stem.rsplit("_", 1)[1])
        except ValueError:
            continue
        if M >= N:
            data = np.load(path)
            keep = data["p"] <= N
            return data["p"][keep], data["lam"][keep]
    log.info("computing tau(n) for n <= %d", N)
    delta = _delta_poly(N)
    primes = primes_up_to(N)
    lam = np.array([int(delta[p - 1]) / p**5.5 for p in primes.tolist()])
    del delta
    try:
        CACHE_DIR.mkdir(parents=True, exist_ok=True)
        np.savez(_cache_path(N), p=primes, lam=lam)
    except OSError:
        log.warning("could not write tau cache under %s", CACHE_DIR)
    return primes, lam

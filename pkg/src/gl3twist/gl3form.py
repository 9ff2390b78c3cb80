"""GL(3) coefficient systems.

A form is archimedean data (the Langlands parameters gamma_i) plus a
source of Satake triples (alpha(p), beta(p), gamma(p)) with product 1.
Hecke coefficients are generated from the local elementary symmetric
functions e1 = A(p,1), e2 = A(1,p), e3 = alpha*beta*gamma:

    h_k = A(p^k, 1) = e1 h_{k-1} - e2 h_{k-2} + e3 h_{k-3}
    A(p^a, p^b) = s_{(a+b, b, 0)} = h_{a+b} h_b - h_{a+b+1} h_{b-1}

the second line being the Jacobi-Trudi determinant for three variables.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Callable, Sequence

import numba
import numpy as np

from . import tau as tau_mod
from .arith import factorize, is_prime, primes_up_to

log = logging.getLogger(__name__)

THETA3 = 5 / 14
MEMORY_BUDGET = 4 * 10**7  # max table length


class FormError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Satake sources
# ---------------------------------------------------------------------------

class SatakeSource:
    """Base class: subclasses provide triples and elementary functions."""

    def triple(self, p: int) -> np.ndarray:
        raise NotImplementedError

    def elementary(self, primes: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        trip = np.array([self.triple(int(p)) for p in primes], dtype=complex).reshape(-1, 3)
        a, b, c = trip.T
        return a + b + c, a * b + a * c + b * c, a * b * c

    def exact(self, p: int):
        """(e1, e2, e3) as Fractions, or None when not available."""
        return None


class TrivialSatake(SatakeSource):
    """alpha = beta = gamma = 1 at every prime (the isobaric 1+1+1)."""

    def triple(self, p):
        return np.ones(3, dtype=complex)

    def elementary(self, primes):
        k = len(primes)
        return np.full(k, 3.0 + 0j), np.full(k, 3.0 + 0j), np.ones(k, dtype=complex)

    def exact(self, p):
        return Fraction(3), Fraction(3), Fraction(1)


class Sym2Satake(SatakeSource):
    """Symmetric-square lift of a GL(2) form with real eigenvalues lambda(p).

    ``supplier(N)`` returns (primes <= N, lambda(p)); triple (a^2, 1, a^-2)
    with a + 1/a = lambda(p).
    """

    def __init__(self, supplier: Callable[[int], tuple[np.ndarray, np.ndarray]],
                 exact_supplier: Callable[[int], Fraction] | None = None):
        self.supplier = supplier
        self.exact_supplier = exact_supplier
        self._N = 0
        self._lam: dict[int, float] = {}
        self._primes = np.zeros(0, dtype=np.int64)
        self._lams = np.zeros(0)
        self.deligne_violations: list[int] = []

    def _ensure(self, N: int):
        if N <= self._N:
            return
        N = max(N, 2 * self._N, 1000)
        primes, lam = self.supplier(N)
        self._primes, self._lams, self._N = primes, lam, N
        bad = primes[np.abs(lam) > 2 + 1e-9]
        if bad.size:
            self.deligne_violations = bad.tolist()
            log.warning("%d eigenvalues exceed the Deligne bound", bad.size)

    def lam(self, primes: np.ndarray) -> np.ndarray:
        primes = np.asarray(primes, dtype=np.int64)
        if primes.size == 0:
            return np.zeros(0)
        self._ensure(int(primes.max()))
        idx = np.searchsorted(self._primes, primes)
        if np.any(self._primes[np.minimum(idx, self._primes.size - 1)] != primes):
            raise FormError("eigenvalue requested at a non-prime")
        return self._lams[idx]

    def triple(self, p):
        lam = float(self.lam(np.array([p]))[0])
        theta = math.acos(max(-1.0, min(1.0, lam / 2)))
        a2 = cmath.exp(2j * theta)
        return np.array([a2, 1.0, 1 / a2], dtype=complex)

    def elementary(self, primes):
        lam = self.lam(primes)
        e = (lam * lam - 1).astype(complex)
        return e, e.copy(), np.ones(e.size, dtype=complex)

    def exact(self, p):
        if self.exact_supplier is None:
            return None
        lam2 = self.exact_supplier(p)
        e = lam2 - 1
        return e, e, Fraction(1)


class TableSatake(SatakeSource):
    """Explicit triples for finitely many primes."""

    def __init__(self, table: dict[int, Sequence[complex]]):
        self.table = {int(p): np.asarray(t, dtype=complex) for p, t in table.items()}
        for p, t in self.table.items():
            if abs(abs(np.prod(t)) - 1) > 1e-9:
                raise FormError(f"non-unitary Satake triple at p={p}: |abc| = {abs(np.prod(t))}")

    def triple(self, p):
        try:
            return self.table[int(p)]
        except KeyError:
            raise FormError(f"no Satake data for p = {p}") from None

    @property
    def max_prime(self) -> int:
        return max(self.table) if self.table else 1


class CallableSatake(SatakeSource):
    """Triples from a callable p -> (alpha, beta, gamma), with optional
    per-prime overrides (used to build synthetic test forms)."""

    def __init__(self, func: Callable[[int], Sequence[complex]],
                 overrides: dict[int, Sequence[complex]] | None = None):
        self.func = func
        self.overrides = {int(p): np.asarray(t, dtype=complex) for p, t in (overrides or {}).items()}

    def triple(self, p):
        t = self.overrides.get(int(p))
        if t is None:
            t = np.asarray(self.func(int(p)), dtype=complex)
        if abs(abs(np.prod(t)) - 1) > 1e-9:
            raise FormError(f"non-unitary Satake triple at p={p}")
        return t


class DualSatake(SatakeSource):
    """Contragredient: triple replaced by the pairwise products."""

    def __init__(self, inner: SatakeSource):
        self.inner = inner

    def triple(self, p):
        a, b, c = self.inner.triple(p)
        return np.array([a * b, a * c, b * c], dtype=complex)

    def elementary(self, primes):
        e1, e2, e3 = self.inner.elementary(primes)
        return e2, e1 * e3, e3 * e3

    def exact(self, p):
        ex = self.inner.exact(p)
        if ex is None:
            return None
        e1, e2, e3 = ex
        return e2, e1 * e3, e3 * e3


# ---------------------------------------------------------------------------
# the form
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Gl3Form:
    label: str
    gamma: tuple[complex, complex, complex]
    source: SatakeSource
    self_dual: bool
    theta3_bound: float = THETA3
    warnings: tuple[str, ...] = field(default=())

    def satake(self, p: int) -> np.ndarray:
        return self.source.triple(p)

    def local(self, p: int) -> tuple[complex, complex, complex]:
        e1, e2, e3 = self.source.elementary(np.array([p], dtype=np.int64))
        return complex(e1[0]), complex(e2[0]), complex(e3[0])

    def A_p1(self, p: int) -> complex:
        return self.local(p)[0]

    def A_1p(self, p: int) -> complex:
        return self.local(p)[1]


def _maass_warnings(gamma) -> tuple[str, ...]:
    out = []
    if abs(sum(gamma)) > 1e-9:
        out.append("sum of Langlands parameters is not 0")
    neg = sorted((-complex(g) for g in gamma), key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    conj = sorted((complex(g).conjugate() for g in gamma), key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    if any(abs(x - y) > 1e-9 for x, y in zip(neg, conj)):
        out.append("{-gamma_i} != {conj(gamma_i)}")
    return tuple(out)


def d3_form() -> Gl3Form:
    return Gl3Form("d3", (0j, 0j, 0j), TrivialSatake(), self_dual=True)


@lru_cache(maxsize=None)
def _delta_lambda_sq_exact(p: int) -> Fraction:
    t = tau_mod.tau_series(max(p, 128))[p]
    return Fraction(t * t, p**11)


def sym2_delta_form() -> Gl3Form:
    """Gelbart-Jacquet lift of the weight-12 discriminant form.

    Gamma factor Gamma_R(s+1) Gamma_R(s+11) Gamma_R(s+12), i.e. Langlands
    parameters (-1, -11, -12) in the Gamma((s - gamma)/2) normalisation.
    """
    gamma = (-1 + 0j, -11 + 0j, -12 + 0j)
    src = Sym2Satake(tau_mod.delta_prime_eigenvalues, _delta_lambda_sq_exact)
    return Gl3Form("sym2delta", gamma, src, self_dual=True, warnings=_maass_warnings(gamma))


def sym2_form(label: str, supplier, gamma, exact_supplier=None) -> Gl3Form:
    src = Sym2Satake(supplier, exact_supplier)
    return Gl3Form(label, tuple(complex(g) for g in gamma), src, self_dual=True,
                   warnings=_maass_warnings(gamma))


def satake_form(label: str, triples, gamma=(0, 0, 0), self_dual: bool | None = None) -> Gl3Form:
    """Form from a {p: triple} table or a callable p -> triple."""
    if callable(triples):
        src = CallableSatake(triples)
    elif isinstance(triples, SatakeSource):
        src = triples
    else:
        src = TableSatake(triples)
    gamma = tuple(complex(g) for g in gamma)
    if self_dual is None:
        self_dual = _looks_self_dual(src, gamma)
    return Gl3Form(label, gamma, src, self_dual=self_dual, warnings=_maass_warnings(gamma))


def _looks_self_dual(src: SatakeSource, gamma) -> bool:
    if isinstance(src, TableSatake):
        primes = np.array(sorted(src.table), dtype=np.int64)
    else:
        primes = primes_up_to(100)
    if primes.size == 0:
        return True
    e1, e2, _ = src.elementary(primes)
    conj_ok = all(abs(complex(g).imag) < 1e-12 for g in gamma) or not _maass_warnings(gamma)
    return bool(np.allclose(e1, e2, atol=1e-10) and np.allclose(e1.imag, 0, atol=1e-10) and conj_ok)


def read_satake_file(path: str | Path, label: str | None = None) -> Gl3Form:
    """Parse ``p re(a) im(a) re(b) im(b) re(c) im(c)`` records.

    ``#`` starts a comment.  An optional directive ``# gamma: g1 g2 g3``
    (Python complex literals) sets the Langlands parameters; the default
    is (0, 0, 0).
    """
    path = Path(path)
    table: dict[int, list[complex]] = {}
    gamma = (0j, 0j, 0j)
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.strip()
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.lower().startswith("gamma:"):
                gamma = tuple(complex(x) for x in body.split(":", 1)[1].split())
                if len(gamma) != 3:
                    raise FormError(f"{path}:{lineno}: gamma needs three values")
            continue
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 7:
            raise FormError(f"{path}:{lineno}: expected 7 fields, got {len(parts)}")
        p = int(parts[0])
        if not is_prime(p):
            raise FormError(f"{path}:{lineno}: {p} is not prime")
        vals = [float(x) for x in parts[1:]]
        table[p] = [complex(vals[0], vals[1]), complex(vals[2], vals[3]), complex(vals[4], vals[5])]
    return satake_form(label or path.stem, table, gamma)


def write_satake_file(form: Gl3Form, primes, path: str | Path):
    lines = [f"# gamma: {' '.join(repr(complex(g)) for g in form.gamma)}"]
    for p in primes:
        t = form.satake(int(p))
        lines.append(f"{int(p)} " + " ".join(f"{float(z.real)!r} {float(z.imag)!r}" for z in t))
    Path(path).write_text("\n".join(lines) + "\n")


def build_form(kind: str) -> Gl3Form:
    """Form selector used by the CLI: ``d3``, ``sym2delta`` or ``satake:<path>``."""
    if kind == "d3":
        return d3_form()
    if kind in ("sym2delta", "sym2", "sym2_gl2"):
        return sym2_delta_form()
    if kind.startswith("satake:"):
        return read_satake_file(kind.split(":", 1)[1])
    raise FormError(f"unknown form selector {kind!r}")


def dual(form: Gl3Form) -> Gl3Form:
    """Contragredient form: pairwise-product Satake data, conjugated gamma.

    For Maass-type parameters ({-gamma} = {conj gamma}) the conjugate set
    is the negated set.
    """
    if isinstance(form.source, DualSatake):
        src = form.source.inner
    else:
        src = DualSatake(form.source)
    gamma = tuple(complex(g).conjugate() for g in form.gamma)
    label = form.label[:-len("~")] if form.label.endswith("~") else form.label + "~"
    if form.self_dual:
        return form
    return Gl3Form(label, gamma, src, self_dual=False, warnings=form.warnings)


# ---------------------------------------------------------------------------
# coefficients
# ---------------------------------------------------------------------------

def h_sequence(e1, e2, e3, K: int) -> list:
    """[h_0, ..., h_K] from the three-term recursion (works for Fractions)."""
    h = [e1 * 0 + 1]
    for k in range(1, K + 1):
        v = e1 * h[k - 1]
        if k >= 2:
            v -= e2 * h[k - 2]
        if k >= 3:
            v += e3 * h[k - 3]
        h.append(v)
    return h


def schur_from_h(h: Sequence, a: int, b: int):
    """A(p^a, p^b) = h_{a+b} h_b - h_{a+b+1} h_{b-1}."""
    hb1 = h[b - 1] if b >= 1 else 0
    return h[a + b] * h[b] - h[a + b + 1] * hb1


def coeff_prime_power(form: Gl3Form, p: int, a: int, b: int, exact: bool = False):
    """A(p^a, p^b); exact=True returns a Fraction when the source allows."""
    if a < 0 or b < 0:
        return 0
    if exact:
        ex = form.source.exact(p)
        if ex is None:
            raise FormError(f"{form.label}: no exact local data at p={p}")
        h = h_sequence(*ex, a + b + 1)
        return schur_from_h(h, a, b)
    e1, e2, e3 = form.local(p)
    h = h_sequence(e1, e2, e3, a + b + 1)
    return complex(schur_from_h(h, a, b))


def coeff_general(form: Gl3Form, m: int, n: int, exact: bool = False):
    """A(m, n) = prod_p A(p^{v_p(m)}, p^{v_p(n)})."""
    if m < 1 or n < 1:
        raise FormError("A(m, n) needs positive arguments")
    fm = factorize(m) if m > 1 else {}
    fn = factorize(n) if n > 1 else {}
    out = Fraction(1) if exact else 1 + 0j
    for p in sorted(set(fm) | set(fn)):
        out *= coeff_prime_power(form, p, fm.get(p, 0), fn.get(p, 0), exact=exact)
    return out


@dataclass
class CoeffTable:
    """Dense table with a[n] = A(n, 1) for 1 <= n <= N (a[0] unused)."""

    N: int
    a: np.ndarray
    label: str = ""

    def __getitem__(self, n):
        return self.a[n]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.a)


@numba.njit(cache=True)
def _multiplicative_fill(a, N):
    # a holds prime-power values on entry; fill the rest by a linear sieve
    spf = np.zeros(N + 1, dtype=np.int32)
    primes = np.empty(N // 2 + 10, dtype=np.int32)
    np_ = 0
    ppow = np.zeros(N + 1, dtype=np.int32)
    for n in range(2, N + 1):
        if spf[n] == 0:
            spf[n] = n
            primes[np_] = n
            np_ += 1
            ppow[n] = n
        else:
            p = spf[n]
            m = n // p
            if spf[m] == p:
                ppow[n] = ppow[m] * p
            else:
                ppow[n] = p
            q = ppow[n]
            if q != n:
                a[n] = a[q] * a[n // q]
        p_n = spf[n]
        for j in range(np_):
            p = primes[j]
            if p > p_n or p * n > N:
                break
            spf[p * n] = p
    return a


def coeff_table(form: Gl3Form, N: int, budget: int = MEMORY_BUDGET) -> CoeffTable:
    """A(n, 1) for n <= N by a multiplicative sieve over prime powers."""
    N = int(N)
    if N > budget:
        raise FormError(f"table length {N} exceeds the memory budget {budget}")
    primes = primes_up_to(N)
    e1, e2, e3 = form.source.elementary(primes)
    real = form.self_dual and np.all(np.abs(e1.imag) < 1e-12) and np.all(np.abs(e2.imag) < 1e-12)
    a = np.zeros(N + 1, dtype=complex)
    if N >= 1:
        a[1] = 1
    # prime powers p^k <= N
    h_prev2 = np.zeros(primes.size, dtype=complex)
    h_prev1 = np.ones(primes.size, dtype=complex)
    h_cur = e1.astype(complex)
    powers = primes.copy()
    k = 1
    live = np.ones(primes.size, dtype=bool)
    while True:
        live &= powers <= N
        if not live.any():
            break
        a[powers[live]] = h_cur[live]
        k += 1
        h_next = e1 * h_cur - e2 * h_prev1 + e3 * h_prev2
        h_prev2, h_prev1, h_cur = h_prev1, h_cur, h_next
        with np.errstate(over="ignore"):
            powers = np.where(live, powers * primes, N + 1)
    if real:
        a = _multiplicative_fill(a.real.copy(), N)
    else:
        a = _multiplicative_fill(a, N)
    return CoeffTable(N, a, form.label)


def check_kim_sarnak(form: Gl3Form, P: int) -> float:
    """max_p |A(p,1)| / (3 p^{5/14}) over p <= P; must be <= 1."""
    primes = primes_up_to(P)
    e1, _, _ = form.source.elementary(primes)
    return float(np.max(np.abs(e1) / (3 * primes.astype(float) ** THETA3)))


def hecke_bilinear_residual(form: Gl3Form, M: int = 60) -> float:
    """max relative residual of A(m1,1)A(1,m2) = sum_{d | (m1,m2)} A(m1/d, m2/d)
    over m1, m2 <= M."""
    cache: dict[tuple[int, int], complex] = {}

    def A(m, n):
        key = (m, n)
        if key not in cache:
            cache[key] = complex(coeff_general(form, m, n))
        return cache[key]

    worst = 0.0
    for m1 in range(1, M + 1):
        for m2 in range(1, M + 1):
            g = math.gcd(m1, m2)
            terms = [A(m1 // d, m2 // d) for d in range(1, g + 1) if g % d == 0]
            lhs = A(m1, 1) * A(1, m2)
            scale = max(1.0, abs(lhs), sum(abs(t) for t in terms))
            worst = max(worst, abs(lhs - sum(terms)) / scale)
    return worst


def generating_series_residual(form: Gl3Form, p: int, H: int = 12) -> float:
    """Coefficientwise residual of sum_h A(p^h,1) x^h * prod (1 - t x) = 1."""
    e1, e2, e3 = form.local(p)
    h = h_sequence(e1, e2, e3, H)
    poly = [1, -e1, e2, -e3]
    prod = np.convolve(np.array(h, dtype=complex), np.array(poly, dtype=complex))[: H + 1]
    prod[0] -= 1
    return float(np.max(np.abs(prod)))

"""Central values L(1/2, phi x chi_{8d}), the twisted first moment and its
predicted main term, plus a harness for the Poisson summation identity
behind the square-free sieve.

Central values come from the approximate functional equation

    L(1/2, phi x chi_{8d}) = S + kappa * conj(S),
    S = sum_n A(n,1) V(n (pi/8d)^{3/2}) chi_{8d}(n) / sqrt(n),

with a cached kernel V (see archimedean.VCache) and a shared coefficient
table.  The inner sum over n runs in a compiled loop, parallel over d.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field

import numba
import numpy as np
from scipy import special

from . import archimedean
from .arith import (
    MY_block,
    TwistIndex,
    gauss_G,
    jacobi_table,
    kronecker,
    mobius,
    mobius_block,
    squarefree_decompose,
)
from .eulermain import (
    ZETA2,
    C_phi,
    G_phi_product,
    L2_sym2,
    MainTermError,
    pole_order,
    residue_L2_sym2,
)
from .gl3form import CoeffTable, Gl3Form, coeff_table, dual

log = logging.getLogger(__name__)


class TableTooShort(ValueError):
    pass


# ---------------------------------------------------------------------------
# compiled AFE kernel
# ---------------------------------------------------------------------------

@numba.njit(cache=True, inline="always")
def _chi8d(n, d, jac_d):
    r = n & 7
    c = 1 if (r == 1 or r == 7) else -1
    if (d & 3) == 3 and (n & 3) == 3:
        c = -c
    return c * jac_d[n % d]


@numba.njit(cache=True)
def _afe_one(a, jac_d, d, logc, N, x0, dx, f, g):
    total = a[0] * 0.0
    nf = f.size
    for n in range(1, N + 1, 2):
        chi = _chi8d(n, d, jac_d)
        if chi == 0:
            continue
        ly = math.log(n) + logc
        r = (ly - x0) / dx
        i = int(r)
        if i > nf - 2:
            break
        t = r - i
        t2 = t * t
        t3 = t2 * t
        v = ((2 * t3 - 3 * t2 + 1) * f[i] + (t3 - 2 * t2 + t) * dx * g[i]
             + (-2 * t3 + 3 * t2) * f[i + 1] + (t3 - t2) * dx * g[i + 1])
        total += chi * a[n] * v / math.sqrt(n)
    return total


@numba.njit(cache=True, parallel=True)
def _afe_many(a, ds, jac_flat, offsets, logcs, Ns, x0, dx, f, g):
    out = np.zeros(ds.size, dtype=np.complex128)
    for k in numba.prange(ds.size):
        jac_d = jac_flat[offsets[k]:offsets[k + 1]]
        out[k] = _afe_one(a, jac_d, ds[k], logcs[k], Ns[k], x0, dx, f, g)
    return out


def chi_8d_kernel_check(pairs) -> int:
    """Number of disagreements between the compiled character and kronecker."""
    bad = 0
    for d, n in pairs:
        jac = jacobi_table(d)
        got = int(_chi8d(int(n), int(d), jac)) if n % 2 else 0
        if got != kronecker(8 * d, n):
            bad += 1
    return bad


# ---------------------------------------------------------------------------
# central values
# ---------------------------------------------------------------------------

@dataclass
class AFEContext:
    form: Gl3Form
    cache: archimedean.VCache
    table: CoeffTable
    kappa: complex

    def length(self, d: int) -> int:
        c = (math.pi / (8 * d)) ** 1.5
        return int(self.cache.y_max / c)


def afe_context(form: Gl3Form, d_max: int, cache: archimedean.VCache | None = None,
                table: CoeffTable | None = None) -> AFEContext:
    cache = cache or archimedean.V_cache(form)
    N = int(cache.y_max / (math.pi / (8 * d_max)) ** 1.5) + 1
    if table is None or table.N < N:
        table = coeff_table(form, N)
    return AFEContext(form, cache, table, archimedean.gamma_ratio_kappa(form))


def central_values(ctx: AFEContext, ds) -> np.ndarray:
    """L(1/2, phi x chi_{8d}) for odd square-free positive d."""
    ds = np.asarray(list(ds), dtype=np.int64)
    if ds.size == 0:
        return np.zeros(0, dtype=complex)
    for d in ds.tolist():
        if d < 1 or d % 2 == 0 or mobius(d) == 0:
            raise ValueError(f"d = {d} is not odd, positive and square-free")
    Ns = np.array([ctx.length(int(d)) for d in ds], dtype=np.int64)
    if Ns.max() > ctx.table.N:
        raise TableTooShort(f"need A(n,1) up to {Ns.max()}, table has {ctx.table.N}")
    logcs = 1.5 * np.log(math.pi / (8.0 * ds))
    if logcs.min() < ctx.cache.log_y0:
        raise TableTooShort("d beyond the kernel grid")
    jacs = [jacobi_table(int(d)) for d in ds]
    offsets = np.zeros(ds.size + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([j.size for j in jacs])
    jac_flat = np.concatenate(jacs).astype(np.int8)
    c = ctx.cache
    S = _afe_many(ctx.table.a, ds, jac_flat, offsets, logcs, Ns, c.log_y0, c.dlog, c.f, c.g)
    return S + ctx.kappa * np.conj(S)


def central_value(form: Gl3Form, d: int, ctx: AFEContext | None = None) -> complex:
    ctx = ctx or afe_context(form, d)
    return complex(central_values(ctx, [d])[0])


def dirichlet_l_half(d: int) -> float:
    """L(1/2, chi_{8d}) from its own smoothed expansion.

    chi_{8d} is even and primitive with conductor q = 8d and root number 1,
    so L(1/2) = 2 sum chi(n) n^{-1/2} Gamma(1/4, pi n^2 / q) / Gamma(1/4).
    """
    q = 8 * d
    nmax = int(math.sqrt(q * 60 / math.pi)) + 2
    total = 0.0
    for n in range(1, nmax + 1):
        chi = kronecker(q, n)
        if chi:
            total += chi / math.sqrt(n) * special.gammaincc(0.25, math.pi * n * n / q)
    return 2 * total


# ---------------------------------------------------------------------------
# moment and prediction
# ---------------------------------------------------------------------------

def support_ds(X: float) -> np.ndarray:
    """Odd square-free d with X < d < 2X."""
    lo = int(math.floor(X)) + 1
    hi = int(math.ceil(2 * X))
    if hi <= lo:
        return np.zeros(0, dtype=np.int64)
    mu = mobius_block(lo, hi)
    d = np.arange(lo, hi, dtype=np.int64)
    keep = (mu != 0) & (d % 2 == 1) & (d > X) & (d < 2 * X)
    return d[keep]


@dataclass
class MomentReport:
    form: str
    l: int
    X: float
    count: int
    computed_moment: complex
    predicted_main: complex
    ratio: complex
    branch: str
    predicted_full: complex = complex("nan")
    ratio_full: complex = complex("nan")
    max_length: int = 0
    kernel_y_max: float = float("nan")
    seconds: float = 0.0
    components: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def to_json(self) -> str:
        def enc(v):
            if isinstance(v, complex):
                return {"re": v.real, "im": v.imag}
            if isinstance(v, dict):
                return {k: enc(x) for k, x in v.items()}
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            return v

        return json.dumps({k: enc(v) for k, v in asdict(self).items()})

    @classmethod
    def from_json(cls, text: str) -> "MomentReport":
        raw = json.loads(text)

        def dec(v):
            if isinstance(v, dict) and set(v) == {"re", "im"}:
                return complex(v["re"], v["im"])
            if isinstance(v, dict):
                return {k: dec(x) for k, x in v.items()}
            return v

        return cls(**{k: dec(v) for k, v in raw.items()})

    CSV_COLUMNS = ("form", "l", "X", "count", "re_moment", "im_moment", "re_pred", "im_pred", "ratio", "seconds")

    def csv_row(self) -> str:
        vals = [self.form, self.l, self.X, self.count,
                self.computed_moment.real, self.computed_moment.imag,
                self.predicted_main.real, self.predicted_main.imag,
                abs(self.ratio) if self.ratio == self.ratio else float("nan"), self.seconds]
        buf = io.StringIO()
        csv.writer(buf, lineterminator="").writerow(
            [f"{v:.15g}" if isinstance(v, float) else v for v in vals])
        return buf.getvalue()


@dataclass
class MomentResult:
    value: complex
    ds: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    chis: np.ndarray
    max_length: int


def twisted_first_moment(form: Gl3Form, twist: TwistIndex | int, X: float,
                         weight: archimedean.SmoothWeight | None = None,
                         ctx: AFEContext | None = None) -> MomentResult:
    """sum over odd square-free d of chi_{8d}(l) L(1/2, phi x chi_{8d}) Phi(d/X)."""
    weight = weight or archimedean.SmoothWeight()
    if not isinstance(twist, TwistIndex):
        twist = squarefree_decompose(twist)
    ds = support_ds(X)
    if ds.size == 0:
        return MomentResult(0j, ds, np.zeros(0, complex), np.zeros(0), np.zeros(0), 0)
    ctx = ctx or afe_context(form, int(ds.max()))
    vals = central_values(ctx, ds)
    w = weight(ds / X)
    chis = np.array([kronecker(8 * int(d), twist.l) for d in ds], dtype=float)
    terms = chis * w * vals
    # ordered pairwise summation (numpy sum is pairwise and deterministic)
    total = complex(np.sum(terms))
    return MomentResult(total, ds, vals, w, chis, ctx.length(int(ds.max())))


@dataclass
class Prediction:
    value: complex
    full: complex
    branch: str
    components: dict


def _prod_l(twist: TwistIndex) -> float:
    out = 1.0
    for p in twist.primes:
        out *= p / (p + 1)
    return out


def main_term_prediction(form: Gl3Form, twist: TwistIndex | int, X: float,
                         weight: archimedean.SmoothWeight | None = None,
                         P: int = 10**4, P_residue: int = 10**6) -> Prediction:
    """Main term of the twisted first moment.

    ``value`` follows the stated formula.  On the self-dual branch ``full``
    also includes G (log 8 + (2/3) c_1/R), which the residue at s = 0
    contains as well.
    """
    weight = weight or archimedean.SmoothWeight()
    if not isinstance(twist, TwistIndex):
        twist = squarefree_decompose(twist)
    phi0 = weight.phi_check(0).real
    pl = _prod_l(twist)
    sq = math.sqrt(twist.l1)
    if form.self_dual:
        order = pole_order(form)
        if order != 1:
            raise MainTermError(
                f"{form.label}: L(s, sym^2) has a pole of order {order} at s = 1; "
                "the self-dual main term needs a simple pole")
        res = residue_L2_sym2(form, P_residue)
        cp = C_phi(form, twist, weight, P, c0_over_r=res.c0_over_r)
        pref = res.value * phi0 / (ZETA2 * sq) * pl * X
        logterm = math.log(X / twist.l1 ** (2 / 3))
        val = pref * (cp.G * logterm + cp.value)
        full = pref * (cp.G * logterm + cp.full)
        comps = {"residue": res.value, "phi_check0": phi0, "G": cp.G, "G_prime": cp.G_prime,
                 "C_phi": cp.value, "C_phi_full": cp.full, "a": cp.a, "log_X_l1": logterm,
                 "prod_l": pl, "residue_extrapolated": res.extrapolation}
        return Prediction(complex(val), complex(full), "self_dual", comps)
    kappa = archimedean.gamma_ratio_kappa(form)
    G = G_phi_product(form, twist, 1.0, P).value
    L2 = L2_sym2(form, 1.0, P).value
    L2d = L2_sym2(dual(form), 1.0, P).value
    val = 2 * phi0 * X / (3 * ZETA2 * sq) * pl * (G * L2 + kappa * np.conj(G) * L2d)
    comps = {"phi_check0": phi0, "G": G, "L2": L2, "L2_dual": L2d, "kappa": kappa, "prod_l": pl}
    return Prediction(complex(val), complex(val), "non_self_dual", comps)


def moment_report(form: Gl3Form, l: int, X: float, weight=None, config: dict | None = None,
                  ctx: AFEContext | None = None) -> MomentReport:
    t0 = time.perf_counter()
    twist = squarefree_decompose(l)
    mom = twisted_first_moment(form, twist, X, weight, ctx)
    if mom.ds.size == 0:
        return MomentReport(form.label, l, X, 0, 0j, 0j, complex("nan"),
                            "self_dual" if form.self_dual else "non_self_dual",
                            seconds=time.perf_counter() - t0, config=config or {},
                            components={"note": "no odd square-free d in (X, 2X)"})
    pred = main_term_prediction(form, twist, X, weight)
    ratio = mom.value / pred.value if pred.value else complex("nan")
    ratio_full = mom.value / pred.full if pred.full else complex("nan")
    cache = ctx.cache if ctx else archimedean.V_cache(form)
    return MomentReport(form.label, l, X, int(mom.ds.size), mom.value, pred.value, ratio, pred.branch,
                        pred.full, ratio_full, mom.max_length, cache.y_max,
                        time.perf_counter() - t0, pred.components, config or {})


# ---------------------------------------------------------------------------
# Poisson summation harness
# ---------------------------------------------------------------------------

@dataclass
class PoissonCheck:
    lhs: float
    rhs: float
    residual: float
    k_terms: int


def poisson_verify(n: int, X: float, Y: float, weight: archimedean.SmoothWeight | None = None,
                   xi_cut: float = 200.0) -> PoissonCheck:
    """Both sides of the Poisson identity for S_M((d/n); F) with F = Phi.

    The k-sum is cut where kX/(2 alpha^2 n) > xi_cut; |Phi~(xi)| is negligible
    there (checked on entry against 1e-15, the quadrature floor).
    """
    weight = weight or archimedean.SmoothWeight()
    if n % 2 == 0:
        raise ValueError("n must be odd")
    n = abs(int(n))
    tail = abs(weight.phi_tilde(xi_cut))
    if tail > 1e-15:
        raise ValueError(f"Phi~ not negligible at the cut ({tail:.1e})")
    lo, hi = int(math.floor(X)) + 1, int(math.ceil(2 * X))
    d = np.arange(lo, hi, dtype=np.int64)
    MY = MY_block(lo, hi, Y)
    jac = jacobi_table(n)[d % n].astype(float) if n > 1 else np.ones(d.size)
    odd = d % 2 == 1
    lhs = float(np.sum((MY * jac * weight(d / X))[odd]) / X)

    rhs = 0.0
    terms = 0
    cache: dict[float, float] = {}
    for alpha in range(1, int(Y) + 1):
        mu = mobius(alpha)
        if mu == 0 or math.gcd(alpha, 2 * n) != 1:
            continue
        scale = X / (2 * alpha * alpha * n)
        kmax = int(xi_cut / scale) + 1
        inner = 0.0
        for k in range(-kmax, kmax + 1):
            gk = gauss_G(k, n).value
            if gk == 0:
                continue
            xi = k * scale
            if xi not in cache:
                cache[xi] = weight.phi_tilde(xi)
            inner += (-1) ** (k & 1) * gk * cache[xi]
            terms += 1
        rhs += mu / alpha**2 * inner
    rhs *= kronecker(2, n) / (2 * n)
    return PoissonCheck(lhs, rhs, abs(lhs - rhs), terms)

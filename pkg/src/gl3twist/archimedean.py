"""Gamma-factor analysis: the AFE kernel V, the gamma ratio kappa, the
Laurent coefficient a, and the smooth weight Phi with its transforms.

The normalised gamma factor is

    G(s) = prod_i Gamma((s + 1/2 - g_i)/2) / Gamma((1/2 - g_i)/2),

so G(0) = 1, and

    V(y) = (1/2 pi i) int_{(u)} G(s) y^{-s} H(s) ds / s,    H(s) = exp(c s^2).

c = 1 is the textbook choice.  Central values do not depend on H, and with
c = 0 the kernel decays much faster in y, so the moment code uses c = 0.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numba
import numpy as np
from scipy import integrate, special

log = logging.getLogger(__name__)


class ContourError(ValueError):
    """Contour parameters cannot reach the requested accuracy."""


def log_gamma(z):
    """Principal branch of log Gamma(z); z must avoid 0, -1, -2, ..."""
    z = np.asarray(z, dtype=complex)
    bad = (np.abs(z.imag) < 1e-300) & (z.real <= 0) & (np.abs(z.real - np.round(z.real)) < 1e-14)
    if np.any(bad):
        raise ValueError("log_gamma evaluated at a pole")
    out = special.loggamma(z)
    return out if out.ndim else complex(out)


def _gamma_tuple(obj) -> tuple[complex, ...]:
    g = getattr(obj, "gamma", obj)
    return tuple(complex(x) for x in g)


def log_gamma_ratio(gamma, s):
    """log G(s) for an array of s."""
    gamma = _gamma_tuple(gamma)
    s = np.asarray(s, dtype=complex)
    out = np.zeros_like(s)
    for g in gamma:
        out = out + log_gamma((s + 0.5 - g) / 2) - log_gamma((0.5 - g) / 2)
    return out


def gamma_ratio_kappa(form) -> complex:
    """kappa = prod Gamma((1/2 - conj g)/2) / Gamma((1/2 - g)/2).

    For Maass-type parameters ({-g} = {conj g}) this is
    prod Gamma((1/2 + g)/2) / Gamma((1/2 - g)/2); for real parameters it
    is 1.  Either way it is the factor relating the two halves of the
    approximate functional equation.
    """
    gamma = _gamma_tuple(form)
    total = 0j
    for g in gamma:
        total += log_gamma((0.5 - g.conjugate()) / 2) - log_gamma((0.5 - g) / 2)
    return complex(np.exp(total))


@dataclass
class LaurentA:
    finite_difference: complex
    digamma: complex

    @property
    def value(self) -> complex:
        return self.digamma

    @property
    def discrepancy(self) -> float:
        return abs(self.finite_difference - self.digamma)


def a_coefficient(form, h: float = 1e-3) -> LaurentA:
    """a = G'(0), by Richardson-extrapolated central differences and by
    the closed form (1/2) sum psi((1/2 - g)/2)."""
    gamma = _gamma_tuple(form)

    def G(s):
        return complex(np.exp(log_gamma_ratio(gamma, np.array([s]))[0]))

    def D(step):
        return (G(step) - G(-step)) / (2 * step)

    fd = (4 * D(h / 2) - D(h)) / 3
    dg = 0.5 * sum(complex(special.digamma((0.5 - g) / 2)) for g in gamma)
    return LaurentA(fd, dg)


# ---------------------------------------------------------------------------
# the kernel V
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContourSpec:
    u: float = 1.0
    T: float = 12.0
    nodes: int = 2400


def _line_integral(gamma, logy, u, T, nodes, h_scale, deriv=False):
    """(1/2pi) int_{-T}^{T} G(s) y^{-s} H(s) w(s) dt on s = u + it, by the
    trapezoid rule; w = 1/s, or -1 for the derivative y V'(y)."""
    t = np.linspace(-T, T, nodes + 1)
    s = u + 1j * t
    base = log_gamma_ratio(gamma, s) + h_scale * s * s
    wt = -np.ones_like(s) if deriv else 1 / s
    dt = t[1] - t[0]
    logy = np.atleast_1d(np.asarray(logy, dtype=float))
    out = np.empty(logy.size, dtype=complex)
    chunk = max(1, 2**22 // s.size)
    trap = np.full(s.size, dt)
    trap[0] = trap[-1] = dt / 2
    coef = np.exp(base) * wt * trap
    for i in range(0, logy.size, chunk):
        ly = logy[i:i + chunk]
        out[i:i + chunk] = np.exp(-np.outer(ly, s)) @ coef
    return out / (2 * np.pi)


def _endpoint_size(gamma, u, T, h_scale, logy):
    s = u + 1j * T
    return float(np.exp((log_gamma_ratio(gamma, np.array([s]))[0] + h_scale * s * s).real - u * logy) / abs(s))


def V_kernel(form, y, contour: ContourSpec = ContourSpec(), h_scale: float = 1.0,
             tol: float = 1e-12, deriv: bool = False):
    """V(y) by trapezoid quadrature on Re s = contour.u, |Im s| <= T.

    Raises ContourError when the integrand at the truncation height is
    not below ``tol``.  With deriv=True returns y V'(y).
    """
    gamma = _gamma_tuple(form)
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise ValueError("V needs y > 0")
    if contour.u <= 0:
        raise ContourError("contour must lie right of s = 0")
    logy = np.log(np.atleast_1d(y))
    worst = max(_endpoint_size(gamma, contour.u, contour.T, h_scale, float(ly)) for ly in logy)
    if worst > tol:
        raise ContourError(f"integrand at height T={contour.T} is {worst:.2e} > {tol:.1e}")
    out = _line_integral(gamma, logy, contour.u, contour.T, contour.nodes, h_scale, deriv)
    return out if y.ndim else complex(out[0])


def _auto_height(gamma, u, h_scale, rel=1e-18) -> float:
    ref = abs(np.exp(log_gamma_ratio(gamma, np.array([u + 0j]))[0]))
    T = 8.0
    while T < 2000:
        if _endpoint_size(gamma, u, T, h_scale, 0.0) * abs(u + 1j * T) < rel * max(ref, 1e-300):
            return T
        T *= 1.25
    raise ContourError("no truncation height found")


def V_accurate(gamma, y, h_scale: float = 0.0, step: float = 0.02, deriv: bool = False):
    """V(y) (or y V'(y)) for any y > 0 to near double precision.

    For y >= 1 the line Re s = 1 is used.  For y < 1 the line is moved left
    of s = 0 (picking up the residue 1) so that y^{-s} stays small.
    """
    gamma = _gamma_tuple(gamma)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    logy = np.log(y)
    out = np.empty(y.size, dtype=complex)
    left_u = -min(0.25, 0.5 * (0.5 - max(g.real for g in gamma)))
    right_u = 1.0
    for u, mask in ((right_u, logy >= 0), (left_u, logy < 0)):
        if not mask.any():
            continue
        T = _auto_height(gamma, u, h_scale)
        nodes = int(math.ceil(2 * T / step))
        vals = _line_integral(gamma, logy[mask], u, T, nodes, h_scale, deriv)
        if u < 0 and not deriv:
            vals = vals + 1.0
        out[mask] = vals
    return out


def shifted_line_bound(gamma, y: float, h_scale: float = 0.0, A_grid=None) -> tuple[float, float]:
    """Certified-style bound |V(y)| <= y^{-A} (1/2pi) int |G H / s| on Re s = A,
    minimised over A.  Returns (bound, best A)."""
    gamma = _gamma_tuple(gamma)
    if A_grid is None:
        A_grid = np.arange(2.0, 41.0, 2.0)
    best = (math.inf, float("nan"))
    for A in A_grid:
        M = _line_abs_integral(gamma, float(A), h_scale)
        b = math.exp(M - A * math.log(y))
        if b < best[0]:
            best = (b, float(A))
    return best


@lru_cache(maxsize=256)
def _line_abs_integral(gamma, A, h_scale) -> float:
    # log of (1/2pi) int |G(A+it) H(A+it)| / |A+it| dt
    T = _auto_height(gamma, A, h_scale, rel=1e-12)
    t = np.linspace(-T, T, 8001)
    s = A + 1j * t
    lg = (log_gamma_ratio(gamma, s) + h_scale * s * s).real - np.log(np.abs(s))
    m = lg.max()
    val = integrate.trapezoid(np.exp(lg - m), t) / (2 * np.pi)
    return float(m + math.log(val) + 0.01)  # small safety margin for the quadrature


@numba.njit(cache=True)
def _hermite_eval(x0, dx, f, g, x):
    n = f.size
    out = np.empty(x.size, dtype=f.dtype)
    for k in range(x.size):
        r = (x[k] - x0) / dx
        i = int(math.floor(r))
        if i < 0:
            i = 0
        if i > n - 2:
            i = n - 2
        t = r - i
        t2 = t * t
        t3 = t2 * t
        h00 = 2 * t3 - 3 * t2 + 1
        h10 = t3 - 2 * t2 + t
        h01 = -2 * t3 + 3 * t2
        h11 = t3 - t2
        out[k] = h00 * f[i] + h10 * dx * g[i] + h01 * f[i + 1] + h11 * dx * g[i + 1]
    return out


@dataclass
class VCache:
    """Cubic Hermite table of V and dV/dlog y on a uniform grid in log y.

    Beyond ``y_max`` the kernel is below ``tol`` by the shifted-line bound
    and is treated as 0.  Below the grid, V is computed directly.
    """

    gamma: tuple
    h_scale: float
    log_y0: float
    dlog: float
    f: np.ndarray
    g: np.ndarray
    y_max: float
    tol: float
    real: bool
    tail_A: float = float("nan")
    interp_error: float = float("nan")
    meta: dict = field(default_factory=dict)

    @property
    def log_y1(self) -> float:
        return self.log_y0 + self.dlog * (self.f.size - 1)

    def __call__(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        ly = np.log(y)
        out = _hermite_eval(self.log_y0, self.dlog, self.f, self.g, ly)
        out = np.where(y > self.y_max, 0, out)
        low = ly < self.log_y0
        if low.any():
            direct = V_accurate(self.gamma, y[low], self.h_scale)
            out[low] = direct.real if self.real else direct
        return out


def _is_real_kernel(gamma) -> bool:
    # G(conj s) = conj G(s) iff the parameter multiset is closed under conjugation
    gs = sorted(gamma, key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    cs = sorted((g.conjugate() for g in gamma), key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    return all(abs(a - b) < 1e-12 for a, b in zip(gs, cs))


def find_y_max(gamma, h_scale: float = 0.0, tol: float = 1e-16) -> tuple[float, float]:
    """Smallest y (on a geometric grid) whose shifted-line bound is <= tol."""
    y = 1.0
    while True:
        b, A = shifted_line_bound(gamma, y, h_scale)
        if b <= tol:
            return y, A
        y *= 1.05
        if y > 1e8:
            raise ContourError("kernel does not decay on the searched range")


@lru_cache(maxsize=8)
def _build_cache(gamma, h_scale, tol, dlog, y_min):
    y_max, A = find_y_max(gamma, h_scale, tol)
    ly0, ly1 = math.log(y_min), math.log(y_max)
    n = int(math.ceil((ly1 - ly0) / dlog)) + 1
    grid = ly0 + dlog * np.arange(n)
    ys = np.exp(grid)
    f = V_accurate(gamma, ys, h_scale)
    g = V_accurate(gamma, ys, h_scale, deriv=True)
    real = _is_real_kernel(gamma)
    if real:
        f, g = f.real.copy(), g.real.copy()
    cache = VCache(gamma, h_scale, ly0, dlog, f, g, y_max, tol, real, tail_A=A)
    # interpolation error at cell midpoints on a sample
    mid = np.exp(grid[:-1:max(1, n // 200)] + dlog / 2)
    exact = V_accurate(gamma, mid, h_scale)
    err = np.abs(cache(mid) - (exact.real if real else exact))
    cache.interp_error = float(err.max())
    log.info("V cache: %d nodes, y_max=%.3g, interpolation error %.2e", n, y_max, cache.interp_error)
    return cache


def V_cache(form, h_scale: float = 0.0, tol: float = 1e-16, dlog: float = 0.005,
            y_min: float = 1e-9) -> VCache:
    return _build_cache(_gamma_tuple(form), float(h_scale), float(tol), float(dlog), float(y_min))


# ---------------------------------------------------------------------------
# smooth weight
# ---------------------------------------------------------------------------

def bump(t):
    """exp(-1/((t-1)(2-t))) on (1, 2), zero elsewhere."""
    t = np.asarray(t, dtype=float)
    inside = (t > 1) & (t < 2)
    out = np.zeros_like(t)
    ti = t[inside]
    out[inside] = np.exp(-1.0 / ((ti - 1) * (2 - ti)))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SmoothWeight:
    """Phi supported on (1,2), with adaptive-quadrature transforms."""

    a: float = 1.0
    b: float = 2.0
    epsabs: float = 1e-15
    epsrel: float = 1e-12
    limit: int = 400

    def __call__(self, t):
        return bump(t)

    def _quad(self, fn, **kw):
        val, err = integrate.quad(fn, self.a, self.b, epsabs=self.epsabs, epsrel=self.epsrel,
                                  limit=self.limit, **kw)
        return val

    def phi_check(self, w: complex) -> complex:
        """int Phi(y) y^w dy."""
        w = complex(w)
        if w.real <= -1:
            raise ValueError("needs Re w > -1")
        re = self._quad(lambda y: bump(y) * (y ** w).real)
        im = self._quad(lambda y: bump(y) * (y ** w).imag) if w.imag else 0.0
        return complex(re, im)

    def phi_check_deriv0(self) -> float:
        """d/dw phi_check at w = 0, i.e. int Phi(y) log y dy."""
        return self._quad(lambda y: bump(y) * math.log(y))

    def mass(self) -> float:
        return self.phi_check(0).real

    def phi_tilde(self, xi: float, F=None, support=None) -> float:
        """int (cos 2 pi xi x + sin 2 pi xi x) F(x) dx (F = Phi by default)."""
        return phi_tilde(F or bump, xi, support or (self.a, self.b))


def phi_tilde(F, xi: float, support=(1.0, 2.0), limit: int = 400) -> float:
    a, b = support
    omega = 2 * math.pi * xi
    if omega == 0:
        return integrate.quad(F, a, b, epsabs=1e-15, epsrel=1e-12, limit=limit)[0]
    # QAWO handles oscillation; F is smooth and compactly supported
    c = integrate.quad(F, a, b, weight="cos", wvar=omega, epsabs=1e-15, limit=limit)[0]
    s = integrate.quad(F, a, b, weight="sin", wvar=omega, epsabs=1e-15, limit=limit)[0]
    return c + s


def phi_check_bound(weight: SmoothWeight, w: complex, nu: int = 3) -> float:
    """The integration-by-parts bound 2^{Re w + nu} Phi_(nu) / prod |w+j|, with
    Phi_(nu) estimated from finite-difference derivatives of the bump."""
    t = np.linspace(1, 2, 20001)
    vals = bump(t)
    norms = [integrate.trapezoid(np.abs(vals), t)]
    d = vals
    for _ in range(nu):
        d = np.gradient(d, t)
        norms.append(integrate.trapezoid(np.abs(d), t))
    prod = 1.0
    for j in range(1, nu + 1):
        prod *= abs(w + j)
    return 2 ** (complex(w).real + nu) * max(norms) / prod

"""Command-line front end.

    gl3twist coeffs    --form F --n N
    gl3twist gauss     --k K --n N
    gl3twist lvalue    --form F --d 5,13,21
    gl3twist moment    --form F --X X --l L
    gl3twist verify    --suite {hecke,dirichlet,recursions,poisson,vcontour,all}
    gl3twist determine --form A --form B

Exit status: 0 on success, 1 when a verification fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from dataclasses import asdict, dataclass, field

import numba
import numpy as np

from . import archimedean, eulermain, gl3form, moments, symsq
from .arith import ArithError, gauss_G, gauss_brute, mobius

log = logging.getLogger("gl3twist")

SUITES = ("hecke", "dirichlet", "recursions", "poisson", "vcontour", "all")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    form: list[str] = field(default_factory=list)
    X: float | None = None
    l: int = 1
    Y: float | None = None
    d: str | None = None
    k: int | None = None
    n: int | None = None
    out: str | None = None
    format: str = "json"
    threads: int | None = None
    suite: str = "all"

    def header(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gl3twist", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=("coeffs", "gauss", "lvalue", "moment", "verify", "determine"))
    ap.add_argument("--form", action="append", default=[],
                    help="d3 | sym2delta | satake:<path> (twice for determine)")
    ap.add_argument("--X", type=float)
    ap.add_argument("--l", type=int, default=1)
    ap.add_argument("--Y", type=float)
    ap.add_argument("--d", help="comma-separated list of odd square-free d")
    ap.add_argument("--k", type=int)
    ap.add_argument("--n", type=int)
    ap.add_argument("--out")
    ap.add_argument("--format", choices=("csv", "json"), default="json")
    ap.add_argument("--threads", type=int)
    ap.add_argument("--suite", choices=SUITES, default="all")
    return ap


def _validate(cfg: RunConfig) -> None:
    sub = cfg.subcommand
    if cfg.threads is not None and cfg.threads < 1:
        raise UsageError("--threads must be positive")
    if sub != "determine" and len(cfg.form) > 1:
        raise UsageError("only determine takes two --form values")
    if sub == "determine" and len(cfg.form) != 2:
        raise UsageError("determine needs exactly two --form values")
    if sub == "gauss":
        if cfg.k is None or cfg.n is None:
            raise UsageError("gauss needs --k and --n")
        if cfg.n < 1 or cfg.n % 2 == 0:
            raise UsageError("--n must be odd and positive")
    if sub == "coeffs" and (cfg.n is None or cfg.n < 1):
        raise UsageError("coeffs needs --n >= 1")
    if sub == "lvalue":
        if not cfg.d:
            raise UsageError("lvalue needs --d")
        for d in _parse_ds(cfg.d):
            if d < 1 or d % 2 == 0 or mobius(d) == 0:
                raise UsageError(f"d = {d} is not odd, positive and square-free")
    if sub == "moment":
        if cfg.X is None or cfg.X <= 0:
            raise UsageError("moment needs --X > 0")
        if cfg.l < 1:
            raise UsageError("--l must be positive")
    if sub == "verify" and cfg.suite in ("poisson",):
        if cfg.n is not None and cfg.n % 2 == 0:
            raise UsageError("poisson needs odd --n")


def _parse_ds(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise UsageError(f"bad --d list: {text}") from exc


def _form(cfg: RunConfig, i: int = 0) -> gl3form.Gl3Form:
    sel = cfg.form[i] if len(cfg.form) > i else "sym2delta"
    try:
        return gl3form.build_form(sel)
    except (gl3form.FormError, OSError, ValueError) as exc:
        raise UsageError(f"--form {sel}: {exc}") from exc


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _cnum(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_coeffs(cfg: RunConfig) -> int:
    form = _form(cfg)
    tab = gl3form.coeff_table(form, cfg.n)
    vals = np.asarray(tab.a[1:cfg.n + 1], dtype=complex)
    if cfg.format == "csv":
        rows = ["n,re_A,im_A"] + [f"{i},{v.real:.15g},{v.imag:.15g}" for i, v in enumerate(vals, 1)]
        _emit(cfg, "\n".join(rows))
    else:
        _emit(cfg, json.dumps({"config": cfg.header(), "form": form.label,
                               "A": [_cnum(v) for v in vals]}))
    return 0


def cmd_gauss(cfg: RunConfig) -> int:
    closed = gauss_G(cfg.k, cfg.n)
    try:
        brute = gauss_brute(cfg.k, cfg.n)
    except ArithError:
        brute = None
    if cfg.format == "csv":
        b = "" if brute is None else f"{brute.real:.15g}"
        _emit(cfg, f"k,n,closed,brute\n{cfg.k},{cfg.n},{closed.value:.15g},{b}")
    else:
        _emit(cfg, json.dumps({"config": cfg.header(), "closed": closed.value,
                               "closed_exact": f"{closed.coeff}*sqrt({closed.radicand})",
                               "brute": None if brute is None else _cnum(brute)}))
    if brute is not None and abs(brute - closed.value) > 1e-9:
        return 1
    return 0


def cmd_lvalue(cfg: RunConfig) -> int:
    form = _form(cfg)
    ds = _parse_ds(cfg.d)
    ctx = moments.afe_context(form, max(ds))
    vals = moments.central_values(ctx, ds)
    if cfg.format == "csv":
        rows = ["d,re_L,im_L"] + [f"{d},{v.real:.15g},{v.imag:.15g}" for d, v in zip(ds, vals)]
        _emit(cfg, "\n".join(rows))
    else:
        _emit(cfg, json.dumps({"config": cfg.header(), "form": form.label,
                               "values": {str(d): _cnum(v) for d, v in zip(ds, vals)}}))
    return 0


def cmd_moment(cfg: RunConfig) -> int:
    form = _form(cfg)
    if moments.support_ds(cfg.X).size and form.self_dual:
        order = eulermain.pole_order(form)
        if order != 1:
            raise UsageError(f"{form.label}: sym^2 pole of order {order} at s = 1; "
                             "the main term needs a simple pole")
    rep = moments.moment_report(form, cfg.l, cfg.X, config=cfg.header())
    if cfg.format == "csv":
        hdr = "# " + json.dumps(cfg.header())
        note = rep.components.get("note")
        lines = [hdr] + ([f"# {note}"] if note else []) + [",".join(rep.CSV_COLUMNS), rep.csv_row()]
        _emit(cfg, "\n".join(lines))
    else:
        _emit(cfg, rep.to_json())
    return 0


def _suite_hecke(cfg):
    out = []
    for f in (gl3form.d3_form(), gl3form.sym2_delta_form()):
        r = gl3form.hecke_bilinear_residual(f, 60)
        out.append((f"hecke {f.label}", r, r < 1e-12))
    return out


def _suite_dirichlet(cfg):
    form = _form(cfg)
    out = []
    for l in ((cfg.l,) if cfg.l != 1 else (1, 3, 9, 15, 45)):
        chk = eulermain.dirichlet_vs_product_check(form, l, 2.0, M=10**4)
        out.append((f"dirichlet {form.label} l={l}", chk.residual, chk.residual < 1e-6))
    return out


def _suite_recursions(cfg):
    out = []
    for f in (gl3form.d3_form(), gl3form.sym2_delta_form()):
        for p in (2, 3, 5, 7, 11):
            r = symsq.verify_square_identity(f, p, 6, exact=True)
            out.append((f"square identity {f.label} p={p} exact", r, r == 0))
            res = symsq.recursion_residuals(f, p, 6)
            worst = max(res.values())
            out.append((f"B/C recursion {f.label} p={p}", worst, worst < 1e-10))
    return out


def _suite_poisson(cfg):
    if cfg.n is not None:
        cases = [(cfg.n, cfg.X or 1000.0, cfg.Y or 10.0)]
    else:
        cases = [(3, 500.0, 5.0), (5, 500.0, 5.0), (15, 1000.0, 10.0)]
    out = []
    for n, X, Y in cases:
        chk = moments.poisson_verify(n, X, Y)
        out.append((f"poisson n={n} X={X:g} Y={Y:g}", chk.residual,
                    chk.residual < 1e-6 * max(abs(chk.lhs), 1.0)))
    return out


def _suite_vcontour(cfg):
    form = _form(cfg)
    ys = np.array([0.05, 0.5, 1.0, 3.0, 10.0])
    vals = [archimedean.V_kernel(form, ys, archimedean.ContourSpec(u=u, T=20.0, nodes=8000),
                                 tol=1e-13) for u in (0.5, 1.0, 2.0)]
    r = float(max(np.max(np.abs(v - vals[0])) for v in vals[1:]))
    return [(f"V contour shift {form.label}", r, r < 1e-9)]


_SUITES = {"hecke": _suite_hecke, "dirichlet": _suite_dirichlet, "recursions": _suite_recursions,
           "poisson": _suite_poisson, "vcontour": _suite_vcontour}


def cmd_verify(cfg: RunConfig) -> int:
    names = [s for s in _SUITES if cfg.suite in (s, "all")]
    results = []
    for name in names:
        results.extend(_SUITES[name](cfg))
    ok = all(r[2] for r in results)
    if cfg.format == "json":
        _emit(cfg, json.dumps({"config": cfg.header(), "passed": ok,
                               "checks": [{"name": n, "residual": r, "pass": bool(p)}
                                          for n, r, p in results]}))
    else:
        lines = ["name,residual,pass"] + [f"{n},{r:.6g},{'PASS' if p else 'FAIL'}" for n, r, p in results]
        _emit(cfg, "\n".join(lines))
    return 0 if ok else 1


def cmd_determine(cfg: RunConfig) -> int:
    a, b = _form(cfg, 0), _form(cfg, 1)
    res = eulermain.determination_test(a, b)
    if cfg.format == "csv":
        rows = ["p,ratio_a,ratio_b,same"] + [f"{r.p},{r.ratio_a.real:.15g},{r.ratio_b.real:.15g},{int(r.same)}"
                                             for r in res.records]
        _emit(cfg, "\n".join([f"# {res.verdict}"] + rows))
    else:
        _emit(cfg, json.dumps({"config": cfg.header(), "verdict": res.verdict,
                               "separating_prime": res.separating_prime}))
    return 0


COMMANDS = {"coeffs": cmd_coeffs, "gauss": cmd_gauss, "lvalue": cmd_lvalue, "moment": cmd_moment,
            "verify": cmd_verify, "determine": cmd_determine}


def run(argv: list[str] | None = None) -> int:
    try:
        ns = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = RunConfig(**vars(ns))
    try:
        _validate(cfg)
        if cfg.threads:
            numba.set_num_threads(min(cfg.threads, numba.config.NUMBA_NUM_THREADS))
        return COMMANDS[cfg.subcommand](cfg)
    except UsageError as exc:
        print(f"gl3twist: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    logging.basicConfig(level=logging.WARNING)
    # numba falls back from an old TBB on its own; the notice is noise
    warnings.filterwarnings("ignore", message=".*TBB.*")
    sys.exit(run())


if __name__ == "__main__":
    main()

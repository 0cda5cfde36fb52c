"""Command-line entry point: ``vdlab <verb> ...``.

Every verb prints one JSON document on stdout.  With ``--out DIR`` the
document (and, for ``curve``, one CSV per functional) is also written to
DIR.  Exit codes: 0 pass, 1 a checked inequality or verdict failed,
2 bad input, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig
from .deficiency import KINDS, bergweiler_bock_check, estimate, sum_check
from .errors import InputError, NumericError, VDLabError
from .expr import Z, parse
from .nevanlinna import (
    ahlfors_shimizu,
    area_characteristic,
    characteristic,
    counting_curve,
    dumps,
    integrated_count,
    log_max_modulus_curve,
    max_modulus_curve,
    normalize_target,
    proximity_curve,
    target_label,
)
from .odes import LinearODE, disc_samples, integrate_base, residual, standardness_verdicts
from .odes.verdicts import THEOREMS
from .sets import (
    IntervalUnion,
    LogPowerXi,
    borel_exceptional,
    log_deriv_check,
    measures,
    min_modulus_check,
    parse_generator,
    zero_count_lemma_check,
)

EXIT_PASS, EXIT_VIOLATED, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

FUNCTIONALS = ("m", "n", "N", "T", "T0", "A", "L", "M")
LEMMAS = ("borel", "zero-count", "min-modulus", "log-deriv")


def _config(args) -> RunConfig:
    kw = RunConfig.parse_grid(args.grid) if args.grid else {}
    if args.tol is not None:
        kw["rtol"] = args.tol
        kw["atol"] = args.tol * 1e-2
    return RunConfig(tail_fraction=args.tail, m=args.m_exponent, out=args.out,
                     seed=args.seed, **kw)


def _emit(doc: dict, cfg: RunConfig, name: str, extra_files: dict | None = None):
    text = dumps(doc)
    print(text)
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.json").write_text(text + "\n", encoding="utf-8")
        for fname, content in (extra_files or {}).items():
            (out / fname).write_text(content, encoding="utf-8")


def _curve_summary(c) -> dict:
    return {"label": c.label, "target": target_label(c.target), "r": c.r.tolist(),
            "values": c.values.tolist(),
            "accuracy_flags": ["ok" if ok else "unconverged" for ok in c.flags]}


# ---------------------------------------------------------------------------
# verbs


def cmd_curve(args, cfg: RunConfig) -> int:
    f = parse(args.expr)
    grid, quad, a = cfg.grid, cfg.quad, normalize_target(args.target)
    wanted = [w.strip() for w in args.functionals.split(",") if w.strip()]
    unknown = [w for w in wanted if w not in FUNCTIONALS]
    if unknown:
        raise InputError(f"unknown functional(s) {unknown}; choose from {list(FUNCTIONALS)}")
    makers = {
        "m": lambda: proximity_curve(f, a, grid, quad),
        "n": lambda: counting_curve(f, a, grid),
        "N": lambda: integrated_count(f, a, grid),
        "T": lambda: characteristic(f, grid, quad),
        "T0": lambda: ahlfors_shimizu(f, grid, quad)[0],
        "A": lambda: area_characteristic(f, grid, quad),
        "L": lambda: log_max_modulus_curve(f, a, grid, quad),
        "M": lambda: max_modulus_curve(f, grid, quad),
    }
    curves, files = {}, {}
    for name in wanted:
        c = makers[name]()
        curves[name] = _curve_summary(c)
        files[f"curve_{name}.csv"] = c.to_csv()
    doc = {"command": "curve", "expr": str(f), "config": cfg.to_dict(), "curves": curves}
    _emit(doc, cfg, "curve", files)
    return EXIT_PASS


def cmd_deficiency(args, cfg: RunConfig) -> int:
    f = parse(args.expr)
    kind = args.kind.upper()
    targets = [normalize_target(t) for t in (args.target or ["inf"])]
    grid, quad = cfg.grid, cfg.quad
    ests = [estimate(kind, f, a, grid, cfg.tail_fraction, quad) for a in targets]
    doc = {"command": "deficiency", "expr": str(f), "kind": kind, "config": cfg.to_dict(),
           "estimates": [e.to_dict() for e in ests], "checks": []}
    ok = True
    if kind in ("N", "E") and len(ests) > 1:
        check = sum_check(ests)
        doc["checks"].append({"check": "sum", **check})
        ok &= check["pass"]
    if kind == "E":
        for a in targets:
            check = bergweiler_bock_check(f, a, grid, cfg.tail_fraction, quad=quad)
            doc["checks"].append(check)
            ok &= check["pass"]
    doc["pass"] = bool(ok)
    _emit(doc, cfg, "deficiency")
    return EXIT_PASS if ok else EXIT_VIOLATED


def _numeric_solutions(ode: LinearODE, cfg: RunConfig, rays: int):
    return integrate_base(ode, cfg.grid.r, n_rays=rays, jets=list(ode.jets))


def cmd_verify_ode(args, cfg: RunConfig) -> int:
    ode = LinearODE.from_file(args.file)
    z = disc_samples(args.samples, args.radius, cfg.seed)
    doc = {"command": "verify-ode", "equation": ode.to_dict(), "config": cfg.to_dict(),
           "residual_threshold": args.threshold, "solutions": []}
    ok = True
    theorems = _theorem_list(args.theorems)
    for k, f in enumerate(ode.solutions):
        res = residual(ode, f, z)
        passed = res <= math.log(args.threshold)
        ok &= passed
        verdicts = standardness_verdicts(ode, f, cfg.grid, tail_fraction=cfg.tail_fraction,
                                         m=cfg.m, theorems=theorems, quad=cfg.quad)
        doc["solutions"].append({
            "index": k, "solution": str(f),
            "max_relative_residual": math.exp(res) if res > -745 else 0.0,
            "samples": int(len(z)), "radius": args.radius, "pass": bool(passed),
            "verdicts": [v.to_dict() for v in verdicts],
        })
    if ode.jets and not ode.solutions:
        for k, sol in enumerate(_numeric_solutions(ode, cfg, args.rays)):
            doc["solutions"].append({"index": k, "jet": str(sol.jet.values),
                                     "integration": sol.meta})
    doc["pass"] = bool(ok)
    _emit(doc, cfg, "verify_ode")
    return EXIT_PASS if ok else EXIT_VIOLATED


def _theorem_list(text):
    if not text:
        return THEOREMS
    out = [t.strip() for t in text.split(",") if t.strip()]
    bad = [t for t in out if t not in THEOREMS]
    if bad:
        raise InputError(f"unknown theorem id(s) {bad}; choose from {list(THEOREMS)}")
    return tuple(out)


def cmd_standardness(args, cfg: RunConfig) -> int:
    ode = LinearODE.from_file(args.file)
    theorems = _theorem_list(args.theorems)
    targets = tuple(normalize_target(t) for t in args.target) if args.target else (1, 2, 1j)
    if ode.solutions:
        sols, base = list(ode.solutions), None
    elif ode.jets:
        sols = _numeric_solutions(ode, cfg, args.rays)
        base = sols if len(sols) == ode.order else None
    else:
        raise InputError("the equation file lists neither solutions nor jets")
    chosen = range(len(sols)) if args.solution is None else [args.solution]
    doc = {"command": "standardness", "equation": ode.to_dict(), "config": cfg.to_dict(),
           "results": []}
    violated = False
    for k in chosen:
        if not 0 <= k < len(sols):
            raise InputError(f"solution index {k} out of range")
        verdicts = standardness_verdicts(ode, sols[k], cfg.grid, base=base,
                                         tail_fraction=cfg.tail_fraction, m=cfg.m,
                                         targets=targets, theorems=theorems, quad=cfg.quad)
        violated |= any(v.verdict == "violated" for v in verdicts)
        doc["results"].append({"solution": k, "verdicts": [v.to_dict() for v in verdicts]})
    _emit(doc, cfg, "standardness")
    return EXIT_VIOLATED if violated else EXIT_PASS


def _real_function(text: str):
    """Parse an expression in r and return a vectorised log|F(r)| and F(r)."""
    f = parse(text, {"r": Z})

    def log_abs(r):
        return np.asarray(f.eval_log(np.asarray(r, dtype=float) + 0j).logmod, dtype=float)

    def value(r):
        return np.real(f.evaluate(np.asarray(r, dtype=float) + 0j))

    return f, log_abs, value


def cmd_lemma(args, cfg: RunConfig) -> int:
    grid, quad = cfg.grid, cfg.quad
    if args.lemma == "borel":
        F, log_F, _ = _real_function(args.F)
        phi_expr, _, phi = _real_function(args.phi)
        report = borel_exceptional(log_F, phi, LogPowerXi(args.xi_m), args.C, args.r0, args.R,
                                   points=args.points)
        report.update(F=str(F), phi=str(phi_expr))
    elif args.lemma == "zero-count":
        report = zero_count_lemma_check(parse(args.g), grid, cfg.m, quad=quad)
    elif args.lemma == "min-modulus":
        report = min_modulus_check(parse(args.g), grid, args.delta, cfg.m, quad=quad)
    else:
        report = log_deriv_check(parse(args.g), grid, args.k, args.j, quad=quad)
    doc = {"command": "lemma", "config": cfg.to_dict(), "report": report}
    _emit(doc, cfg, f"lemma_{args.lemma}")
    return EXIT_PASS if report["pass"] else EXIT_VIOLATED


def cmd_density(args, cfg: RunConfig) -> int:
    if (args.file is None) == (args.generator is None):
        raise InputError("give exactly one of --file or --generator")
    if args.file is not None:
        E = IntervalUnion.from_json(Path(args.file).read_text(encoding="utf-8"))
    else:
        E = parse_generator(args.generator, args.R)
    doc = {"command": "density", "config": cfg.to_dict(),
           "source": args.generator or str(args.file), "report": measures(E, args.R).to_dict()}
    _emit(doc, cfg, "density")
    return EXIT_PASS


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", help="r_min:r_max[:points_per_decade[:spacing]] "
                                       "(default 1:50:200:geometric)")
    common.add_argument("--tol", type=float, help="relative quadrature tolerance (default 1e-10)")
    common.add_argument("--tail", type=float, default=0.25, help="tail fraction of the grid")
    common.add_argument("--m-exponent", type=float, default=1.5,
                        help="exponent m > 1 in log-power conditions")
    common.add_argument("--out", help="directory for JSON/CSV output")
    common.add_argument("--seed", type=int, default=0, help="seed for random sample points")

    p = argparse.ArgumentParser(prog="vdlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"vdlab {__version__}")
    sub = p.add_subparsers(dest="verb", required=True)

    c = sub.add_parser("curve", parents=[common], help="growth functionals on a grid")
    c.add_argument("expr")
    c.add_argument("--functionals", default="T", help=f"comma list from {','.join(FUNCTIONALS)}")
    c.add_argument("--target", default="inf", help="target a for m, n, N, L")
    c.set_defaults(run=cmd_curve)

    d = sub.add_parser("deficiency", parents=[common], help="deviation estimates")
    d.add_argument("expr")
    d.add_argument("--kind", default="N", choices=list(KINDS) + [k.lower() for k in KINDS])
    d.add_argument("--target", action="append", help="target value (repeatable)")
    d.set_defaults(run=cmd_deficiency)

    v = sub.add_parser("verify-ode", parents=[common], help="residuals and verdicts")
    v.add_argument("file")
    v.add_argument("--samples", type=int, default=1000)
    v.add_argument("--radius", type=float, default=10.0)
    v.add_argument("--threshold", type=float, default=1e-9)
    v.add_argument("--theorems", default="T1.1,T2.2,C2.4",
                   help=f"comma list from {','.join(THEOREMS)}")
    v.add_argument("--rays", type=int, default=512)
    v.set_defaults(run=cmd_verify_ode)

    s = sub.add_parser("standardness", parents=[common], help="all hypothesis verdicts")
    s.add_argument("file")
    s.add_argument("--solution", type=int, help="index of the solution (default: all)")
    s.add_argument("--theorems", help=f"comma list from {','.join(THEOREMS)}")
    s.add_argument("--target", action="append", help="corroboration target (repeatable)")
    s.add_argument("--rays", type=int, default=512)
    s.set_defaults(run=cmd_standardness)

    lm = sub.add_parser("lemma", parents=[common], help="growth-lemma checkers")
    lm.add_argument("lemma", choices=LEMMAS)
    lm.add_argument("--g", default="(exp(z)-1)/z", help="function for the entire-function lemmas")
    lm.add_argument("--F", default="exp(r)", help="Borel: F(r) as an expression in r")
    lm.add_argument("--phi", default="r", help="Borel: phi(r) as an expression in r")
    lm.add_argument("--xi-m", type=float, default=2.0, help="Borel: xi(x) = log^m x")
    lm.add_argument("--C", type=float, default=2.0, help="Borel: growth factor C > 1")
    lm.add_argument("--r0", type=float, default=2.0)
    lm.add_argument("--R", type=float, default=100.0)
    lm.add_argument("--points", type=int, default=2000, help="Borel: initial scan points")
    lm.add_argument("--delta", type=float, default=0.1, help="min-modulus: density budget")
    lm.add_argument("--k", type=int, default=1, help="log-deriv: upper derivative order")
    lm.add_argument("--j", type=int, default=0, help="log-deriv: lower derivative order")
    lm.set_defaults(run=cmd_lemma)

    dn = sub.add_parser("density", parents=[common], help="measures and density proxies")
    dn.add_argument("--file", help="JSON array of [a, b) pairs")
    dn.add_argument("--generator", help="'comb <period> <width>', 'decay <b>^-n', 'empty'")
    dn.add_argument("--R", type=float, default=1000.0)
    dn.set_defaults(run=cmd_density)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        return args.run(args, cfg)
    except InputError as exc:
        print(f"vdlab: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericError as exc:
        print(f"vdlab: numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, ValueError) as exc:
        print(f"vdlab: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except VDLabError as exc:
        print(f"vdlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VIOLATED


if __name__ == "__main__":
    sys.exit(main())

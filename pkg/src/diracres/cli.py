"""Command-line front end.

Exit codes: 0 when nothing mismatches (flagged conventions do not fail a run),
1 when a check or comparison mismatches or a numeric guard trips, 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .checks import DEFAULT_DIMS, SUITES, run_checks
from .clifford import gen, spinor_trace
from .perturbations import GaugeContext, PerturbationSpec, build_psi
from .ring import DomainError

WRES_KINDS = ("scalar", "one-form", "two-form", "general", "product", "conformal")
BOUNDARY_PSI = ("general", "one-form", "two-form", "scalar")


def _all_blades(n):
    from itertools import combinations

    return tuple(b for k in range(n + 1) for b in combinations(range(1, n + 1), k))


def _perturbation(kind: str, n: int) -> PerturbationSpec:
    if kind == "scalar":
        return PerturbationSpec("scalar-f")
    if kind == "one-form":
        # Psi = i c(eta) for a real one-form eta
        return PerturbationSpec("one-form-i-c-eta")
    if kind == "two-form":
        return PerturbationSpec("two-form")
    return PerturbationSpec("general-multivector", blades=_all_blades(n))


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dims(arg):
    return DEFAULT_DIMS if arg is None else (arg,)


def cmd_verify(args) -> int:
    from .report import VerificationReport

    dims = _dims(args.dim)
    records = run_checks(args.suite, dims, workers=args.workers)
    rep = VerificationReport(args.suite, dims, records, timing=not args.no_timing)
    _emit(rep.to_json() if args.format == "json" else rep.to_text(), args.out)
    return rep.exit_code()


def cmd_report(args) -> int:
    from .report import VerificationReport

    dims = _dims(args.dim)
    rep = VerificationReport("all", dims, run_checks("all", dims, workers=args.workers), timing=not args.no_timing)
    _emit(rep.to_json(), args.out)
    c = rep.counts()
    sys.stderr.write(f"{c['match']} match, {c['mismatch']} mismatch, {c['flagged-convention']} flagged-convention\n")
    return rep.exit_code()


def cmd_wres(args) -> int:
    from .heat import wres_conformal, wres_interior, wres_product_interior

    n = args.dim
    ctx = GaugeContext(n)
    kind = args.perturbation
    if kind == "product":
        spec = _perturbation("general", n)
        dens = wres_product_interior(spec, ctx)
        statement = f"Wres[(D_Psi D)^(-1)] = integral over M of [{dens}] dvol   (n={n}, general Psi)"
    elif kind == "conformal":
        out = wres_conformal(ctx, exponential=args.exponential)
        dens = out["integrated"]
        statement = f"Wres[f D^(-1) g D^(-1)] = integral over M of [{dens}] dvol   (n={n})"
        if args.exponential:
            statement += f"\nwith f = g = e^(-2h): integral over M of [{out['exponential']}] dvol"
    else:
        dens, statement = wres_interior(_perturbation(kind, n), ctx)
    if args.format == "json":
        _emit(json.dumps({"perturbation": kind, "dim": n, "density": str(dens), "statement": statement}, indent=2) + "\n", None)
    else:
        _emit(statement + "\n", None)
    return 0


def cmd_boundary(args) -> int:
    from .boundary import boundary_phi, boundary_terms, load_fixtures

    fixtures = load_fixtures(args.fixtures)
    spec = None
    if args.case != "thm-3.2":
        # a real one-form sum b_k c_k here, not the i c(eta) form used for residues
        spec = PerturbationSpec("one-form") if args.perturbation == "one-form" else _perturbation(args.perturbation, 4)
    terms = boundary_terms(args.case, spec, fixtures)
    phi = boundary_phi(args.case, spec, fixtures)
    doc = {"case": args.case, "terms": {k: str(v) for k, v in terms.items()}, "phi": str(phi)}
    if spec is not None:
        psi = build_psi(spec, GaugeContext(4))
        doc["psi"] = str(psi)
        doc["Tr[c(dx_n) Psi]"] = str(spinor_trace(gen(4, 4) * psi))
    if args.format == "json":
        _emit(json.dumps(doc, indent=2) + "\n", None)
    else:
        lines = [f"case {args.case}"]
        if "psi" in doc:
            lines.append(f"Psi = {doc['psi']}")
            lines.append(f"Tr[c(dx_n) Psi] = {doc['Tr[c(dx_n) Psi]']}")
        lines += [f"term {k}: {v}" for k, v in doc["terms"].items()]
        lines.append(f"Phi = {doc['phi']}")
        _emit("\n".join(lines) + "\n", None)
    return 0


def cmd_torus(args) -> int:
    from .torus import TorusConfig, fit_and_compare

    cfg = TorusConfig(
        cutoff=args.cutoff,
        t_min=args.tmin,
        t_max=args.tmax,
        steps=args.steps,
        perturbation=args.perturbation,
        value=args.value,
        rep=args.rep,
        tail_tolerance=args.tail_tol,
        workers=args.workers,
    )
    _emit(json.dumps(fit_and_compare(cfg), indent=2) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="diracres", description="Exact checks for perturbed Dirac operators.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run an identity suite")
    v.add_argument("--suite", choices=SUITES + ("all",), default="all")
    v.add_argument("--dim", type=int, default=None, help="dimension for dimension-generic checks (default 4, 6, 8)")
    v.add_argument("--format", choices=("json", "text"), default="text")
    v.add_argument("--out", default=None)
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--no-timing", action="store_true", help="zero the wall-time fields for byte-stable output")
    v.set_defaults(func=cmd_verify)

    w = sub.add_parser("wres", help="print a residue density")
    w.add_argument("--perturbation", choices=WRES_KINDS, required=True, help="one-form means Psi = i c(eta)")
    w.add_argument("--dim", type=int, default=4)
    w.add_argument("--exponential", action="store_true", help="conformal case with f = g = e^(-2h)")
    w.add_argument("--format", choices=("json", "text"), default="text")
    w.set_defaults(func=cmd_wres)

    b = sub.add_parser("boundary", help="assemble the boundary term Phi")
    b.add_argument("--case", choices=("thm-2.10", "prop-2.15", "thm-3.2"), required=True)
    b.add_argument("--perturbation", choices=BOUNDARY_PSI, default="general", help="one-form means Psi = sum b_k c(e_k)")
    b.add_argument("--fixtures", default=None, help="boundary constants file (default: bundled)")
    b.add_argument("--format", choices=("json", "text"), default="text")
    b.set_defaults(func=cmd_boundary)

    t = sub.add_parser("torus", help="fit the heat trace on the flat 4-torus")
    t.add_argument("--perturbation", choices=("none", "scalar", "two-form"), default="none")
    t.add_argument("--value", type=float, default=0.0)
    t.add_argument("--cutoff", type=int, default=30)
    t.add_argument("--tmin", type=float, default=0.02)
    t.add_argument("--tmax", type=float, default=0.2)
    t.add_argument("--steps", type=int, default=20)
    t.add_argument("--tail-tol", type=float, default=1e-5)
    t.add_argument("--rep", type=int, choices=(0, 1), default=0)
    t.add_argument("--workers", type=int, default=1)
    t.add_argument("--out", default=None)
    t.set_defaults(func=cmd_torus)

    r = sub.add_parser("report", help="run every suite and write the JSON report")
    r.add_argument("--out", required=True)
    r.add_argument("--dim", type=int, default=None)
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--no-timing", action="store_true")
    r.set_defaults(func=cmd_report)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, ValueError) as exc:
        # bad flag values that argparse cannot see (odd dimension, tmin >= tmax, ...)
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except RuntimeError as exc:
        # missing fixtures, tail bound or fit guards
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

"""Command line driver.

Commands:
- verify: check zeta*(X,1) = chi(X,1) up to sign and powers of two on a record file
- compute: print one quantity for a field or a record
- fuzz: run the randomized identity check
- catalog: list the bundled fiber types and number fields

Exit codes: 0 when everything passes, 1 on a verification failure, 2 on bad input.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Sequence

import mpmath

from .fibers import MalformedFiber, component_group, delta_Rv, fiber_catalog, fls_check
from .fields import FieldError, field_catalog, lookup_field
from .numeric import (DEFAULT_REL_TOL, InvalidComparison, configured_digits, equal_up_to_two_power,
                      to_real, working_precision)
from .periods import archimedean_period, det_gamma_from_period
from .records import ParseError, ValidationError, bundled_records, load_records
from .special_values import (InconsistentRecord, RankMismatch, Verdict, brauer_order, bsd_rhs, chi_S,
                             chi_X1, identity_fuzz, tamagawa_from_fibers, verify_equivalence,
                             zeta_star_S, zeta_star_X)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2

INPUT_ERRORS = (ParseError, ValidationError, FieldError, MalformedFiber, InconsistentRecord,
                RankMismatch, InvalidComparison)


class InputError(RuntimeError):
    pass


def _num(x, digits: int) -> str:
    if x is None:
        return "null"
    if isinstance(x, (int, Fraction)):
        return str(x)
    if isinstance(x, mpmath.mpc):
        return f"{mpmath.nstr(x.real, digits)}{'+' if x.imag >= 0 else '-'}{mpmath.nstr(abs(x.imag), digits)}j"
    return mpmath.nstr(x, digits)


def _records(path: str | None):
    return bundled_records() if path in (None, "-bundled") else load_records(path)


def _digits(args) -> int:
    if args.precision is not None:
        if args.precision < 15:
            raise InputError("--precision must be at least 15")
        return args.precision
    return configured_digits()


# -- verify -----------------------------------------------------------------

def verdict_dict(v: Verdict, digits: int) -> dict:
    return {
        "record": v.record,
        "passed": v.passed,
        "exact": v.exact,
        "two_power": v.two_power,
        "sign_flip": v.sign_flip,
        "pi0_two_power": v.pi0_two_power,
        "zeta_star_X1": _num(v.lhs, digits),
        "chi_X1": _num(v.rhs, digits),
        "trace": [{"label": t.label, "value": _num(t.value, digits), "symbolic": t.symbolic} for t in v.trace],
        "diagnostics": list(v.diagnostics),
    }


def run_verify(path: str | None, tolerance: str | None, digits: int) -> dict:
    with working_precision(digits):
        recs = _records(path)
        verdicts = []
        for rec in recs:
            with working_precision(max(digits, rec.precision or 0)):
                verdicts.append(verify_equivalence(rec, tolerance))
    shown = min(digits, 30)
    passed = sum(v.passed for v in verdicts)
    return {
        "config": {"file": path or "bundled dataset", "precision": digits,
                   "tolerance": tolerance or "per record", "seed": None},
        "summary": {"records": len(verdicts), "passed": passed, "failed": len(verdicts) - passed,
                    "first_failure": next((v.record for v in verdicts if not v.passed), None)},
        "verdicts": [verdict_dict(v, shown) for v in verdicts],
    }


def _print_report(rep: dict) -> None:
    for v in rep["verdicts"]:
        status = "PASS" if v["passed"] else "FAIL"
        k = v["two_power"]
        rel = "not a power of two" if k is None else f"ratio = {'-' if v['sign_flip'] else '+'}2^{k}"
        print(f"{status}  {v['record']:<22} zeta*(X,1) = {_short(v['zeta_star_X1'])}  "
              f"chi(X,1) = {_short(v['chi_X1'])}  {rel}{' (exact)' if v['exact'] else ''}")
        for d in v["diagnostics"]:
            print(f"      {d}")
    s = rep["summary"]
    print(f"{s['passed']}/{s['records']} records pass")
    if s["first_failure"]:
        print(f"first failing record: {s['first_failure']}")


def _short(s: str) -> str:
    if s == "null":
        return "-"
    try:
        return mpmath.nstr(mpmath.mpf(s), 12)
    except (ValueError, TypeError):
        return s


def cmd_verify(args) -> int:
    digits = _digits(args)
    if args.tolerance is not None:
        try:
            if not 0 < to_real(args.tolerance) < 1:
                raise InputError("--tolerance must lie in (0, 1)")
        except (ValueError, TypeError):
            raise InputError(f"--tolerance {args.tolerance!r} is not a number") from None
    rep = run_verify(args.file, args.tolerance, digits)
    if args.json:
        print(json.dumps(rep, indent=2, sort_keys=True))
    else:
        _print_report(rep)
    return EXIT_OK if rep["summary"]["failed"] == 0 else EXIT_FAIL


# -- compute -----------------------------------------------------------------

FIELD_QUANTITIES = ("cnf", "cnf0", "zeta-s1", "zeta-s0", "chi-s1", "chi-s0", "regulator")
RECORD_QUANTITIES = ("zeta-x", "chi-x", "bsd", "period", "tamagawa", "brauer", "fibers")


def compute_field(q: str, name: str, digits: int) -> list[tuple[str, str]]:
    f = lookup_field(name)
    with working_precision(digits):
        if q in ("cnf", "cnf0"):
            r = 1 if q == "cnf" else 0
            chi, zeta = chi_S(f, r), zeta_star_S(f, r)
            k = equal_up_to_two_power(chi, zeta)
            rel = "not a power of two" if k is None else f"{'-' if k.sign_flip else '+'}2^{k.k}"
            return [(f"chi(S,{r})", _num(chi, digits)), (f"zeta*(S,{r})", _num(zeta, digits)),
                    ("chi/zeta*", rel)]
        if q == "regulator":
            return [("R", _num(to_real(f.R), digits))]
        r = 1 if q.endswith("1") else 0
        if q.startswith("zeta"):
            return [(f"zeta*(S,{r})", _num(zeta_star_S(f, r), digits))]
        return [(f"chi(S,{r})", _num(chi_S(f, r), digits))]


def compute_record(q: str, rec, digits: int) -> list[tuple[str, str]]:
    with working_precision(max(digits, rec.precision or 0)):
        if q == "zeta-x":
            return [("zeta*(X,1)", _num(zeta_star_X(rec), digits))]
        if q == "chi-x":
            return [("chi(X,1)", _num(chi_X1(rec), digits))]
        if q == "bsd":
            if rec.genus == 0:
                return [("BSD right side", "1 (trivial Jacobian)")]
            lv = rec.jacobian.L
            rhs = bsd_rhs(rec)
            return [("L*(J,1)", _num(lv, digits)), ("BSD right side", _num(rhs, digits)),
                    ("ratio", _num(lv / rhs, digits))]
        if q == "period":
            if rec.genus == 0:
                return [("P_inf", "1 (trivial Jacobian)")]
            pd = det_gamma_from_period(rec.jacobian, rec.field)
            return [("P_inf", _num(archimedean_period(rec.jacobian, rec.field), digits)),
                    ("|det gamma|", _num(pd.modulus, digits)), ("i-power", str(pd.i_power)),
                    ("pi0 factor", str(pd.pi0_factor))]
        if q == "tamagawa":
            return [("prod c_v", str(tamagawa_from_fibers(rec)))]
        if q == "brauer":
            return [("[Br(X)]", str(brauer_order(rec)))]
        out = []
        for fb in rec.fibers:
            cg = component_group(fb)
            chk = fls_check(fb)
            out.append((fb.label, f"#Phi = {cg.phi_order}, c_v = {fb.c_v}, Delta(R_v) = {delta_Rv(fb)}, "
                                  f"local identity {'holds' if chk.ok else 'fails'}"))
        return out or [("fibers", "none")]


def cmd_compute(args) -> int:
    digits = _digits(args)
    q = args.quantity
    if q in FIELD_QUANTITIES:
        if args.record is not None:
            raise InputError(f"{q} is a field quantity; use --field")
        rows = compute_field(q, args.field or "Q", digits)
    elif q in RECORD_QUANTITIES:
        if args.record is None:
            raise InputError(f"{q} needs --record ID")
        recs = {r.id: r for r in _records(args.file)}
        if args.record not in recs:
            raise InputError(f"no record {args.record!r}; known: {', '.join(recs)}")
        rows = compute_record(q, recs[args.record], digits)
    else:
        raise InputError(f"unknown quantity {q!r}; choose from {', '.join(FIELD_QUANTITIES + RECORD_QUANTITIES)}")
    if args.json:
        print(json.dumps(dict(rows), indent=2))
    else:
        width = max(len(k) for k, _ in rows)
        for k, v in rows:
            print(f"{k:<{width}}  {v}")
    return EXIT_OK


# -- fuzz and catalog ----------------------------------------------------------------

def cmd_fuzz(args) -> int:
    if args.trials < 0:
        raise InputError("--trials must be non-negative")
    rep = identity_fuzz(args.seed, args.trials)
    out = {
        "config": {"seed": rep.seed, "trials": rep.trials},
        "counterexamples": len(rep.counterexamples),
        "two_power_histogram": {str(k): v for k, v in rep.two_powers.items()},
        "negative_control_detected": rep.control_detected,
    }
    if args.json:
        print(json.dumps(out, indent=2, sort_keys=True))
    else:
        print(f"seed {rep.seed}, {rep.trials} trials: {len(rep.counterexamples)} counterexamples")
        print("powers of two seen: " + ", ".join(f"2^{k} x{n}" for k, n in rep.two_powers.items()))
        print(f"negative control (Geisser constraint broken): {'detected' if rep.control_detected else 'MISSED'}")
        for c in rep.counterexamples[:5]:
            print(f"  counterexample ({c['chain']}): ratio {c['ratio']}")
    return EXIT_OK if not rep.counterexamples and rep.control_detected else EXIT_FAIL


def cmd_catalog(args) -> int:
    show_fields = args.fields or not args.fibers
    show_fibers = args.fibers or not args.fields
    if show_fibers:
        print("fiber types:")
        for name, t in fiber_catalog().items():
            f = t.at(2)
            cg = component_group(f)
            print(f"  {name:<26} genus {t.genus}  components {f.size:<2}  #Phi {str(cg.phi_order):<4}"
                  f"  index {t.index}  period {t.period}")
    if show_fields:
        print("number fields:")
        with working_precision(configured_digits()):
            for name, f in field_catalog().items():
                print(f"  {name:<14} d = {f.d_F:<6} (r1, r2) = ({f.r1}, {f.r2})  h = {f.h}  w = {f.w}"
                      f"  R = {mpmath.nstr(to_real(f.R), 15)}")
    return EXIT_OK


# -- entry point -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zetabsd", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="verify every record in a file (default: bundled dataset)")
    v.add_argument("file", nargs="?", default=None)
    v.add_argument("--tolerance", default=None, help=f"relative tolerance (default: per record, {DEFAULT_REL_TOL})")
    v.add_argument("--precision", type=int, default=None, help="decimal digits (default: $ZETABSD_PRECISION or 50)")
    v.add_argument("--json", action="store_true")
    v.set_defaults(run=cmd_verify)

    c = sub.add_parser("compute", help="print one quantity")
    c.add_argument("quantity", help=", ".join(FIELD_QUANTITIES + RECORD_QUANTITIES))
    g = c.add_mutually_exclusive_group()
    g.add_argument("--field", default=None, help="field name or alias, e.g. 'Q(i)'")
    g.add_argument("--record", default=None, help="record id")
    c.add_argument("--file", default=None, help="record file (default: bundled dataset)")
    c.add_argument("--precision", type=int, default=None)
    c.add_argument("--json", action="store_true")
    c.set_defaults(run=cmd_compute)

    f = sub.add_parser("fuzz", help="randomized check of the identity behind the equivalence")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--trials", type=int, default=10000)
    f.add_argument("--json", action="store_true")
    f.set_defaults(run=cmd_fuzz)

    k = sub.add_parser("catalog", help="list bundled fiber types and number fields")
    k.add_argument("--fibers", action="store_true")
    k.add_argument("--fields", action="store_true")
    k.set_defaults(run=cmd_catalog)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except (InputError, *INPUT_ERRORS) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as e:
        # configured_digits rejects a bad environment override this way
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

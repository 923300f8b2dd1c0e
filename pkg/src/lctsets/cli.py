"""Command-line tool.

Exit codes: 0 success / standardized / consistent; 1 refutation; 2 unknown;
3 usage or parse error.  Diagnostics go to stderr, data to stdout.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from . import geomsets, serialize, setops
from .derived import Certificate, No, Witness, certify, derived_set, standardized_near
from .dsl import DslError, eval_expr, parse_expression
from .oracle import detect_accumulation, enumerate_family, fit_standardized
from .setfam import SetFamily, Unknown, UnknownResult, member, rat

EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 3


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2)
        raise _ArgError(message)


def _default_cap() -> int:
    try:
        return max(1, int(os.environ.get("LCT_DEFAULT_CAP", "100")))
    except ValueError:
        return 100


def _parse_interval(text: str):
    if ".." not in text:
        raise _ArgError(f"interval must look like a..b, got {text!r}")
    a, b = text.split("..", 1)
    try:
        return rat(a), rat(b)
    except (ValueError, ZeroDivisionError) as exc:
        raise _ArgError(f"bad interval endpoint: {exc}")


def _eval(text: str):
    return eval_expr(parse_expression(text))


def _build_parser() -> _Parser:
    p = _Parser(prog="lctsets", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    enum = sub.add_parser("enum", help="enumerate a family on a window")
    enum.add_argument("expr")
    enum.add_argument("--interval", required=True)
    enum.add_argument("--cap", type=int, default=None)
    enum.add_argument("--format", choices=("json", "csv", "text"), default="text")

    der = sub.add_parser("derived", help="symbolic derived set")
    der.add_argument("expr")
    der.add_argument("-k", type=int, default=1)

    chk = sub.add_parser("check", help="standardized-near decision")
    chk.add_argument("expr")
    chk.add_argument("--near", required=True)

    cert = sub.add_parser("certify", help="standardization certificate")
    cert.add_argument("expr")

    fit = sub.add_parser("fit", help="bounded-numerator fit near a point")
    fit.add_argument("expr")
    fit.add_argument("--near", required=True)
    fit.add_argument("--interval", required=True)
    fit.add_argument("--cap", type=int, default=None)
    fit.add_argument("--numerator-bound", type=int, default=64)

    vp = sub.add_parser("verify-paper", help="run the built-in verification cases")
    vp.add_argument(
        "--case",
        choices=("ex14", "ex15", "ex16", "lem28", "thm17", "walls"),
        default=None,
    )
    return p


def _cmd_enum(ns) -> int:
    cap = ns.cap if ns.cap is not None else _default_cap()
    window = _parse_interval(ns.interval)
    value = _eval(ns.expr)
    sample = enumerate_family(value, window, cap)
    if ns.format == "csv":
        sys.stdout.write(serialize.sample_to_csv(sample))
    elif ns.format == "json":
        print(serialize.dumps(serialize.sample_to_obj(sample)))
    else:
        print(" ".join(serialize.rat_str(v) for v in sample.values))
    return EXIT_OK


def _cmd_derived(ns) -> int:
    value = _eval(ns.expr)
    if not isinstance(value, SetFamily):
        print("error: derived sets need a symbolic family", file=sys.stderr)
        return EXIT_USAGE
    out = derived_set(value, ns.k)
    print(serialize.dumps(serialize.family_to_obj(out)))
    return EXIT_OK


def _cmd_check(ns) -> int:
    value = _eval(ns.expr)
    if not isinstance(value, SetFamily):
        print("error: check needs a symbolic family", file=sys.stderr)
        return EXIT_USAGE
    got = standardized_near(value, rat(ns.near))
    if isinstance(got, Witness):
        print(serialize.dumps(serialize.witness_to_obj(got)))
        return EXIT_OK
    if isinstance(got, No):
        print(got.reason, file=sys.stderr)
        return EXIT_REFUTED
    print(got.reason, file=sys.stderr)
    return EXIT_UNKNOWN


def _cmd_certify(ns) -> int:
    value = _eval(ns.expr)
    if not isinstance(value, SetFamily):
        print("error: certify needs a symbolic family", file=sys.stderr)
        return EXIT_USAGE
    cert = certify(value)
    print(serialize.dumps(serialize.certificate_to_obj(cert)))
    if cert.verdict == "standardized":
        return EXIT_OK
    if cert.verdict == "not_standardized":
        return EXIT_REFUTED
    return EXIT_UNKNOWN


def _cmd_fit(ns) -> int:
    cap = ns.cap if ns.cap is not None else _default_cap()
    window = _parse_interval(ns.interval)
    value = _eval(ns.expr)
    sample = enumerate_family(value, window, cap)
    report = fit_standardized(sample, rat(ns.near), ns.numerator_bound)
    print(serialize.dumps(serialize.fit_to_obj(report)))
    if report.verdict == "consistent":
        return EXIT_OK
    if report.verdict == "inconsistent":
        return EXIT_REFUTED
    return EXIT_UNKNOWN


# ---------------------------------------------------------------------------
# built-in verification cases


def _case_ex14() -> bool:
    d2 = geomsets.diag_lct(2)
    from .setfam import In

    hit = member(d2, Fraction(5, 6), 500)
    ok = isinstance(hit, In)
    ok &= certify(geomsets.diag_lct(1)).depth == 2
    cert = certify(d2)
    ok &= cert.verdict == "standardized" and cert.depth == 3
    second = derived_set(d2, 2)
    ok &= any(
        getattr(a, "elements", ()) == (Fraction(0),) for a in second.atoms
    )
    return ok


def _case_ex15() -> bool:
    ok = True
    for k in range(1, 5):
        for c2 in range(0, k + 1):
            a2 = k - c2
            for a1 in range(0, k + 1):
                coeff = Fraction(c2 * (k - a1), k)
                for c1 in range(1, 40):
                    den = c1 * c2 + a1 * c2 + a2 * c1
                    if den <= 0:
                        continue
                    lhs = Fraction(c1 + c2, den)
                    rhs = Fraction(1, k) + coeff / (k * c1 + a1 * c2)
                    ok &= lhs == rhs
    ok &= geomsets._ht2_value(0, 0, 2, 3) == Fraction(5, 6)
    sample = enumerate_family(geomsets.ht2(), (Fraction(1, 5), 1), 30)
    clusters = detect_accumulation(sample, Fraction(1, 512))
    targets = [Fraction(1, k) for k in (2, 3, 4, 5)]
    ok &= all(any(c.contains(t) for c in clusters) for t in targets[:2])
    return ok


def _case_ex16() -> bool:
    ok = True
    for m in range(1, 6):
        for n in range(1, 2001):
            ok &= Fraction(5 * n + m, 6 * n + m) == Fraction(5, 6) + Fraction(
                m, 36 * n + 6 * m
            )
    g = geomsets.gamma16()
    cert = certify(g)
    ok &= cert.verdict == "standardized" and cert.depth == 2
    d1 = derived_set(g, 1)
    ok &= len(d1.atoms) == 1 and getattr(d1.atoms[0], "elements", ()) == (
        Fraction(5, 6),
    )
    sample = enumerate_family(g, (Fraction(5, 6), Fraction(1)), 200)
    rep = fit_standardized(sample, Fraction(5, 6))
    ok &= rep.verdict == "consistent"
    return ok


def _case_lem28() -> bool:
    ok = True
    F = setops.hyperstandard([0, 1])
    ok &= certify(setops.dgamma(F)).verdict == "standardized"
    G = setops.gamma_plus(setops.clip(F, 0, 1))
    ok &= certify(G).verdict == "standardized"
    H = geomsets.ht1()
    ok &= certify(setops.quotient_by_n(H)).verdict == "standardized"
    return ok


def _case_thm17() -> bool:
    ok = True
    for k in range(2, 7):
        for ip in range(1, 7):
            for a in range(1, 2001):
                if k * a - ip < 1:
                    continue
                ok &= Fraction(a, k * a - ip) == Fraction(1, k) + Fraction(
                    ip, k * (k * a - ip)
                )
    d1 = derived_set(geomsets.ct3_branch(2, 1), 1)
    ok &= len(d1.atoms) == 1 and getattr(d1.atoms[0], "elements", ()) == (
        Fraction(1, 2),
    )
    return ok


def _case_walls() -> bool:
    walls = geomsets.kmoduli_walls()
    elems = walls.atoms[0].elements
    ok = len(elems) == 9 and max(elems) == Fraction(9, 11)
    hyper = setops.hyperstandard([0, 1, 4])
    from .setfam import In

    ok &= all(isinstance(member(hyper, e, 500), In) for e in elems)
    return ok


_CASES = {
    "ex14": _case_ex14,
    "ex15": _case_ex15,
    "ex16": _case_ex16,
    "lem28": _case_lem28,
    "thm17": _case_thm17,
    "walls": _case_walls,
}


def _cmd_verify_paper(ns) -> int:
    names = [ns.case] if ns.case else list(_CASES)
    all_ok = True
    for name in names:
        try:
            ok = _CASES[name]()
        except UnknownResult:
            ok = False
        print(f"{name:8s} {'PASS' if ok else 'FAIL'}")
        all_ok &= ok
    return EXIT_OK if all_ok else EXIT_REFUTED


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except _ArgError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if ns.command == "enum":
            return _cmd_enum(ns)
        if ns.command == "derived":
            return _cmd_derived(ns)
        if ns.command == "check":
            return _cmd_check(ns)
        if ns.command == "certify":
            return _cmd_certify(ns)
        if ns.command == "fit":
            return _cmd_fit(ns)
        if ns.command == "verify-paper":
            return _cmd_verify_paper(ns)
    except DslError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _ArgError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnknownResult as exc:
        print(f"unknown: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

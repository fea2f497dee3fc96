"""Command-line interface.

Exit status 0 on success, 1 on a domain error (its token is printed on
stderr as ``error: TOKEN: message``), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Sequence

from .cfrac import cf_expand, maillet_root_witnesses
from .constructor import (
    certify_steered,
    erdos_split_prod,
    erdos_split_sum,
    implicit_pair,
    orbit_construct,
    steer,
)
from .core import SCHEDULES, certify_level, series_constant
from .errors import LiouvilleError, ParseError
from .expindep import alg_indep_exp, burger_annihilator, exponent_basis, lin_indep_exp
from .poly import BivarPolyQ, PolyQ
from .reals import Interval
from .serialize import (
    MAP_GRAMMAR,
    REAL_GRAMMAR,
    bundle_json,
    certificate_json,
    parse_map,
    parse_real,
    verify_document,
)


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _stamp(args) -> bool:
    return not args.no_timestamp


# -- subcommands ----------------------------------------------------------------

def cmd_construct(args) -> int:
    digits = [int(d) for d in args.digits.split(",")]
    x = series_constant(args.base, args.schedule, digits)
    cert = certify_level(x, args.level)
    _emit(certificate_json(cert, timestamp=_stamp(args)), args.output)
    return 0


def cmd_certify(args) -> int:
    x = parse_real(args.x)
    cert = certify_level(x, args.level, depth=args.depth, precision=args.precision)
    _emit(certificate_json(cert, timestamp=_stamp(args)), args.output)
    return 0


def cmd_verify(args) -> int:
    with open(args.file, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"not a JSON document: {exc}") from None
    n = verify_document(doc)
    print(f"valid ({n} certificate{'s' if n != 1 else ''})")
    return 0


def cmd_split_sum(args) -> int:
    _, _, certs = erdos_split_sum(parse_real(args.t), args.level)
    _emit(bundle_json([certificate_json(c, timestamp=_stamp(args)) for c in certs], "split-sum"),
          args.output)
    return 0


def cmd_split_prod(args) -> int:
    _, _, certs = erdos_split_prod(parse_real(args.t), args.level, args.seed)
    _emit(bundle_json([certificate_json(c, timestamp=_stamp(args)) for c in certs], "split-prod"),
          args.output)
    return 0


def cmd_steer(args) -> int:
    maps = [parse_map(s) for s in args.map]
    lo, hi = args.interval
    _, point, log = steer(maps, Interval(lo, hi), args.level, args.seed)
    certs = certify_steered(point, args.level)
    entries = [certificate_json(c, log if i == 0 else None, _stamp(args)) for i, c in enumerate(certs)]
    _emit(bundle_json(entries, "steer"), args.output)
    return 0


def cmd_implicit_pair(args) -> int:
    P = BivarPolyQ.parse(args.poly)
    I, J = Interval(*args.x_interval), Interval(*args.y_interval)
    _, _, certs = implicit_pair(P, I, J, args.level, args.seed)
    _emit(bundle_json([certificate_json(c, timestamp=_stamp(args)) for c in certs], "implicit-pair"),
          args.output)
    return 0


def cmd_orbit(args) -> int:
    phi = parse_map(args.map)
    xi, certs = orbit_construct(phi, args.depth, args.level, Interval(*args.interval), args.seed)
    entries = [certificate_json(c, timestamp=_stamp(args)) for _, c in sorted(certs.items())]
    _emit(bundle_json(entries, "orbit"), args.output)
    return 0


def cmd_cfrac(args) -> int:
    print(cf_expand(parse_real(args.x), args.depth))
    return 0


def cmd_maillet_root(args) -> int:
    print(json.dumps(maillet_root_witnesses(parse_real(args.x), args.power, args.depth)))
    return 0


def cmd_expindep(args) -> int:
    polys = [_univariate(p) for p in args.polys]
    if args.mode == "linear":
        v = lin_indep_exp(polys)
        print(v.status)
        if not v.independent:
            i, j = v.witness
            print(f"g{i} - g{j} is constant")
    else:
        v = alg_indep_exp(polys)
        print(v.status)
        if not v.independent:
            rel = v.witness
            print("relation: " + " ".join(str(a) for a in rel.a) + f" ; constant {rel.c}")
    return 0


def cmd_exponent_basis(args) -> int:
    eb = exponent_basis([_univariate(p) for p in args.polys])
    for j, f in enumerate(eb.basis, 1):
        print(f"f{j} = {f}")
    for i, (row, c) in enumerate(zip(eb.lam, eb.c), 1):
        print(f"g{i}: lambda = {list(row)} ; constant {c}")
    return 0


def _univariate(text: str) -> PolyQ:
    terms = BivarPolyQ.parse(text.replace("z", "X")).terms
    return PolyQ.from_terms(terms)


def cmd_burger(args) -> int:
    A = burger_annihilator(_univariate(args.minpoly), BivarPolyQ.parse(args.compose))
    print(A)
    return 0


# -- parser ---------------------------------------------------------------------

POLY_GRAMMAR = """\
poly    := poly ('+' | '-' | '*') poly | poly '/' CONST | '-' poly | poly ('^' | '**') NAT
         | '(' poly ')' | INT | VAR
univariate arguments use z (x and X are accepted too); bivariate ones use x, y (or X, Y).
examples: z^3 - 2*z + 1/2, x^2*y - 3, (y-1/5)*(y-1/2) + x/1000"""


def _out_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("-o", "--output", help="write the certificate JSON here (default stdout)")
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp metadata")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="liouvillekit",
        description="Certified Liouville numbers, splits and exponential independence.",
        epilog="real expressions:\n" + REAL_GRAMMAR + "\n\nmap specs:\n" + MAP_GRAMMAR
        + "\n\npolynomials:\n" + POLY_GRAMMAR,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="certify a series constant sum d_k b^-(e_k)")
    p.add_argument("--base", type=int, default=10)
    p.add_argument("--schedule", choices=sorted(SCHEDULES), default="factorial")
    p.add_argument("--digits", default="1", help="comma-separated repeating digit pattern")
    p.add_argument("--level", type=_positive, default=4)
    _out_opts(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("certify", help="find witnesses for levels 1..N")
    p.add_argument("x", help="real expression")
    p.add_argument("--level", type=_positive, required=True)
    p.add_argument("--depth", type=_positive, default=64)
    p.add_argument("--precision", type=_positive, default=1024)
    _out_opts(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify", help="re-check a certificate file")
    p.add_argument("file")
    p.set_defaults(func=cmd_verify)

    for name, fn in (("split-sum", cmd_split_sum), ("split-prod", cmd_split_prod)):
        p = sub.add_parser(name, help=f"{name.replace('-', ' ')} of T into two Liouville numbers")
        p.add_argument("t", metavar="T", help="real expression")
        p.add_argument("--level", type=_positive, required=True)
        if name == "split-prod":
            p.add_argument("--seed", type=int, default=None)
        _out_opts(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("steer", help="steer a point so every map image is certified")
    p.add_argument("--map", action="append", default=[], metavar="SPEC")
    p.add_argument("--interval", nargs=2, type=_rational, metavar=("LO", "HI"), required=True)
    p.add_argument("--level", type=_positive, required=True)
    p.add_argument("--seed", type=int, default=None)
    _out_opts(p)
    p.set_defaults(func=cmd_steer)

    p = sub.add_parser("implicit-pair", help="Liouville pair on the curve P(x, y) = 0")
    p.add_argument("--poly", required=True, help="polynomial in x and y")
    p.add_argument("--x-interval", nargs=2, type=_rational, default=[Fraction(1, 10), Fraction(9, 10)])
    p.add_argument("--y-interval", nargs=2, type=_rational, default=[Fraction(1, 10), Fraction(9, 10)])
    p.add_argument("--level", type=_positive, required=True)
    p.add_argument("--seed", type=int, default=None)
    _out_opts(p)
    p.set_defaults(func=cmd_implicit_pair)

    p = sub.add_parser("orbit", help="certify phi^k(xi) for |k| <= depth")
    p.add_argument("--map", required=True, metavar="SPEC")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--level", type=_positive, required=True)
    p.add_argument("--interval", nargs=2, type=_rational, default=[Fraction(0), Fraction(1)])
    p.add_argument("--seed", type=int, default=None)
    _out_opts(p)
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("cfrac", help="certified continued fraction prefix")
    p.add_argument("x")
    p.add_argument("--depth", type=_positive, required=True)
    p.set_defaults(func=cmd_cfrac)

    p = sub.add_parser("maillet-root", help="convergent indices with both parts perfect P-th powers")
    p.add_argument("x")
    p.add_argument("--power", type=_positive, required=True)
    p.add_argument("--depth", type=_positive, required=True)
    p.set_defaults(func=cmd_maillet_root)

    p = sub.add_parser("expindep", help="independence of e^{g_1}, ..., e^{g_n}")
    p.add_argument("--mode", choices=("linear", "algebraic"), required=True)
    p.add_argument("polys", nargs="+", metavar="POLY")
    p.set_defaults(func=cmd_expindep)

    p = sub.add_parser("exponent-basis", help="integer coordinates of exponents over a basis")
    p.add_argument("polys", nargs="+", metavar="POLY")
    p.set_defaults(func=cmd_exponent_basis)

    p = sub.add_parser("burger", help="annihilator P(F(X, Y))")
    p.add_argument("--minpoly", required=True)
    p.add_argument("--compose", required=True)
    p.set_defaults(func=cmd_burger)
    return ap


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "orbit" and args.depth < 0:
        parser.error("--depth must be nonnegative")
    try:
        return args.func(args)
    except LiouvilleError as exc:
        print(f"error: {exc.token}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Certificate files, map specs and real-number expressions.

A certificate file is JSON.  Integers that may exceed a double (witness
numerators and denominators, rationals inside recipes) are decimal strings.
The ``digest`` field is the SHA-256 of the canonical JSON of the subject and
witnesses, so the timestamp in ``meta`` is outside the verified region.
"""

from __future__ import annotations

import ast
import datetime
import hashlib
import json
import sys
from fractions import Fraction
from functools import lru_cache
from typing import Any

from . import __version__
from .constructor import (
    ConstructionLog,
    check_monotone_slice,
    split_prod_parts,
    split_sum_parts,
    steer,
    steered_image,
)
from .core import LiouvilleCertificate, SeriesConstant, Witness, series_constant, verify_certificate
from .errors import InvalidWitness, ParseError
from .maps import (
    CatalogMap,
    Composition,
    Elementary,
    ImplicitMap,
    InverseMap,
)
from .poly import BivarPolyQ
from .reals import ExactReal, Interval, elem_eval, field_op, negate

FORMAT = "liouvillekit-certificate"
VERSION = 1

if hasattr(sys, "set_int_max_str_digits"):
    # witnesses from deep steering runs have tens of thousands of digits
    sys.set_int_max_str_digits(0)


# -- JSON helpers -----------------------------------------------------------

def jsonable(obj: Any) -> Any:
    """Recursively replace Fractions and big ints by decimal strings."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, int):
        return obj if abs(obj) < 1 << 53 else str(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, Interval):
        return [str(obj.lo), str(obj.hi)]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical(obj: Any) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, separators=(",", ":"))


def _q(v) -> Fraction:
    try:
        return Fraction(v)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ParseError(f"not a rational number: {v!r}") from None


# -- certificates -------------------------------------------------------------

def witness_json(w: Witness) -> dict:
    return {"n": w.n, "p": str(w.p), "q": str(w.q)}


def log_json(log: ConstructionLog) -> dict:
    return {
        "maps": list(log.maps), "I0": log.I0, "N": log.N, "seed": log.seed,
        "stages": [{"map": s.map_index, "n": s.level, "p": str(s.p), "q": str(s.q),
                    "before": s.before, "after": s.after, "image": s.image}
                   for s in log.stages],
    }


def certificate_json(cert: LiouvilleCertificate, log: ConstructionLog | None = None,
                     timestamp: bool = True) -> dict:
    body = {"subject": cert.subject, "witnesses": [witness_json(w) for w in cert.witnesses]}
    out = {"format": FORMAT, "version": VERSION, **jsonable(body),
           "digest": hashlib.sha256(canonical(body).encode()).hexdigest(),
           "meta": {"tool": "liouvillekit", "tool_version": __version__}}
    if timestamp:
        out["meta"]["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    if log is not None:
        out["log"] = jsonable(log_json(log))
    return out


def bundle_json(certs: list[dict], label: str | None = None) -> dict:
    out = {"format": FORMAT, "version": VERSION, "certificates": certs}
    if label:
        out["label"] = label
    return out


def load_certificate(entry: dict) -> tuple[ExactReal, LiouvilleCertificate]:
    """Rebuild subject and witnesses from one certificate entry, checking the digest."""
    if entry.get("format") != FORMAT or entry.get("version") != VERSION:
        raise ParseError("unknown certificate format or version")
    body = {"subject": entry["subject"], "witnesses": entry["witnesses"]}
    if hashlib.sha256(canonical(body).encode()).hexdigest() != entry.get("digest"):
        raise InvalidWitness("digest does not match subject and witnesses")
    try:
        ws = tuple(Witness(int(w["n"]), int(w["p"]), int(w["q"])) for w in entry["witnesses"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidWitness(f"malformed witness: {exc}") from None
    x = real_from_recipe(entry["subject"])
    return x, LiouvilleCertificate(entry["subject"], ws)


def verify_document(doc: dict) -> int:
    """Verify a certificate or bundle; returns the number of certificates checked."""
    entries = doc["certificates"] if "certificates" in doc else [doc]
    for entry in entries:
        x, cert = load_certificate(entry)
        if not cert.is_contiguous():
            raise InvalidWitness("witness levels are not 1..N")
        if not verify_certificate(x, cert):
            bad = next(w for w in cert.witnesses if not verify_certificate(x, LiouvilleCertificate(None, (w,))))
            raise InvalidWitness(f"witness at level {bad.n} fails 0 < |x - p/q| <= q^-n")
    return len(entries)


# -- recipes back to reals ----------------------------------------------------

def real_from_recipe(rec: dict | None) -> ExactReal:
    if rec is None:
        raise ParseError("subject has no recipe")
    return _real_cached(canonical(rec))


@lru_cache(maxsize=256)
def _real_cached(key: str) -> ExactReal:
    rec = json.loads(key)
    kind = rec.get("kind")
    if kind == "series":
        digits = [int(d) for d in rec["digits"]]
        return series_constant(int(rec["base"]), rec["schedule"], digits)
    if kind == "derived-arith":
        op = rec["op"]
        if op == "const":
            return ExactReal.rational(_q(rec["value"]))
        args = [real_from_recipe(a) for a in rec["args"]]
        if op == "neg":
            return negate(args[0])
        return field_op(op, *args)
    if kind == "elementary":
        fn = rec["fn"]
        arg = real_from_recipe(rec["arg"])
        if fn in ("exp", "sqrt"):
            return elem_eval(fn, arg)
        if fn == "pow_rational":
            return elem_eval(fn, arg, _q(rec["param"]))
        if fn in ("inverse", "implicit"):
            f = map_from_json(rec["map"] if fn == "implicit" else
                              {"variant": "inverse", "base": rec["map"]})
            return f.apply(arg)
        raise ParseError(f"unknown elementary function {fn!r}")
    if kind == "steered":
        point = _steered_point(canonical({k: rec[k] for k in ("maps", "interval", "level", "seed")}))
        return point if rec["role"] == "point" else steered_image(point, int(rec["index"]))
    if kind == "split-sum":
        xi, eta = split_sum_parts(real_from_recipe(rec["t"]))
        return xi if rec["part"] == "xi" else eta
    if kind == "split-prod":
        xi, eta = split_prod_parts(real_from_recipe(rec["t"]), int(rec["level"]), rec["seed"])
        return xi if rec["part"] == "xi" else eta
    raise ParseError(f"unknown recipe kind {kind!r}")


@lru_cache(maxsize=64)
def _steered_point(key: str) -> ExactReal:
    rec = json.loads(key)
    maps = [map_from_json(m) for m in rec["maps"]]
    I0 = Interval(_q(rec["interval"][0]), _q(rec["interval"][1]))
    return steer(maps, I0, int(rec["level"]), rec["seed"])[1]


def map_from_json(d: dict) -> CatalogMap:
    v = d["variant"]
    if v == "identity":
        return Elementary("identity")
    if v == "pow":
        return Elementary("pow", _q(d["r"]))
    if v == "compose":
        return Composition(map_from_json(d["outer"]), map_from_json(d["inner"]))
    if v == "inverse":
        base = map_from_json(d["base"])
        if "bracket" in d:
            return InverseMap(base, Interval(_q(d["bracket"][0]), _q(d["bracket"][1])))
        return InverseMap(base)
    if v == "implicit":
        P = BivarPolyQ.parse(d["poly"])
        dom = Interval(_q(d["domain"][0]), _q(d["domain"][1]))
        J = Interval(_q(d["J"][0]), _q(d["J"][1]))
        ys, xs = check_monotone_slice(P, dom, J)
        return ImplicitMap(P, dom, J, ys, xs)
    return Elementary(v, real_from_recipe(d["t"]), d.get("text"))


# -- real-number expressions ------------------------------------------------

REAL_GRAMMAR = """\
expr    := expr ('+' | '-' | '*' | '/') expr | '-' expr | expr ('^' | '**') expr | '(' expr ')'
         | INT | 'e' | 'L' | sqrt(expr) | exp(expr) | series(BASE [, DIGIT])
exponents must be rational constants; L is the base-10 factorial series
sum 10^-(k!), series(b, d) is sum d * b^-(k!)."""


def parse_real(text: str) -> ExactReal:
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse real {text!r}: {exc.msg}") from None
    return _real_node(tree.body, text)


def _const_value(node, text) -> Fraction:
    x = _real_node(node, text)
    if x.exact is None:
        raise ParseError(f"exponent must be a rational constant in {text!r}")
    return x.exact


def _real_node(node, text) -> ExactReal:
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
        return ExactReal.rational(node.value)
    if isinstance(node, ast.Name):
        if node.id == "L":
            return series_constant(10, "factorial", 1)
        if node.id == "e":
            return elem_eval("exp", 1)
        raise ParseError(f"unknown name {node.id!r} in {text!r}")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _real_node(node.operand, text)
        return negate(inner) if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            base = _real_node(node.left, text)
            r = _const_value(node.right, text)
            if r.denominator == 1 and base.exact is not None:
                return ExactReal.rational(base.exact ** int(r))
            return elem_eval("pow_rational", base, r)
        ops = {ast.Add: "add", ast.Sub: "sub", ast.Mult: "mul", ast.Div: "div"}
        op = ops.get(type(node.op))
        if op is None:
            raise ParseError(f"unsupported operator in {text!r}")
        return field_op(op, _real_node(node.left, text), _real_node(node.right, text))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
        name, args = node.func.id, node.args
        if name in ("sqrt", "exp") and len(args) == 1:
            return elem_eval(name, _real_node(args[0], text))
        if name == "series" and len(args) in (1, 2):
            vals = [_const_value(a, text) for a in args]
            if any(v.denominator != 1 for v in vals):
                raise ParseError(f"series arguments must be integers in {text!r}")
            return series_constant(int(vals[0]), "factorial", int(vals[1]) if len(vals) == 2 else 1)
    raise ParseError(f"unsupported syntax in real expression {text!r}")


# -- map specs ----------------------------------------------------------------

MAP_GRAMMAR = """\
spec  := term ('.' term)*          f.g means f after g
term  := 'id' | KIND ':' REAL | 'pow:' P '/' Q | 'pow:' P
KIND  := sub | add | scale | recip | sqrtdiff | expscale"""

_KINDS = {"sub": "sub", "add": "add", "scale": "scale", "recip": "recip",
          "sqrtdiff": "sqrtdiff", "expscale": "expscale"}


def _split_top(spec: str) -> list[str]:
    """Split on '.' outside parentheses."""
    parts, depth, cur = [], 0, ""
    for ch in spec:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "." and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    return parts


def parse_map(spec: str) -> CatalogMap:
    terms = _split_top(spec.strip())
    if any(not t.strip() for t in terms):
        raise ParseError(f"empty term in map spec {spec!r}")
    maps = [_parse_term(t.strip(), spec) for t in terms]
    out = maps[-1]
    for f in reversed(maps[:-1]):
        out = Composition(f, out)
    return out


def _parse_term(term: str, spec: str) -> CatalogMap:
    if term == "id":
        return Elementary("identity")
    kind, sep, arg = term.partition(":")
    if not sep or not arg:
        raise ParseError(f"map term {term!r} in {spec!r} must look like KIND:VALUE")
    if kind == "pow":
        try:
            r = Fraction(arg)
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"pow exponent {arg!r} is not a rational P/Q") from None
        if r == 0:
            raise ParseError("pow exponent must be nonzero")
        return Elementary("pow", r)
    if kind not in _KINDS:
        raise ParseError(f"unknown map kind {kind!r} in {spec!r}")
    return Elementary(_KINDS[kind], parse_real(arg), arg)

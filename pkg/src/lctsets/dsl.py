"""Text DSL for declaring families and queries.

Grammar::

    program := stmt*
    stmt    := 'set' IDENT '=' expr
    expr    := '{' rat (',' rat)* '}'
             | 'fam' '(' rat ';' mono ('+' mono)* ')'
             | call | IDENT
    mono    := rat '/' var ('*' var)*
    var     := IDENT '[' INT (',' INT ',' INT)? ']'    # min, or min,q,r
    call    := NAME '(' (arg (',' arg)*)? ')'
    arg     := expr | rat | INT
    rat     := '-'? INT ('/' INT)?

Errors carry line:column, the offending token, and a machine-readable code:
E_SYNTAX, E_UNBOUND, E_ARITY, E_TYPE.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from .setfam import (
    FiniteAtom,
    Monomial,
    Parameter,
    PolyAtom,
    SetFamily,
    family,
    finite,
    finite_family,
)
from . import geomsets, setops

Value = Union[SetFamily, geomsets.Generator]


class DslError(Exception):
    def __init__(self, code: str, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {code}: {message}")
        self.code = code
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class SetLit:
    items: Tuple[Fraction, ...]


@dataclass(frozen=True)
class VarNode:
    name: str
    min: int
    q: Optional[int] = None
    r: Optional[int] = None


@dataclass(frozen=True)
class MonoNode:
    coeff: Fraction
    vars: Tuple[VarNode, ...]


@dataclass(frozen=True)
class FamLit:
    base: Fraction
    monos: Tuple[MonoNode, ...]


@dataclass(frozen=True)
class NumArg:
    value: Fraction


@dataclass(frozen=True)
class Ident:
    name: str


@dataclass(frozen=True)
class Call:
    name: str
    args: Tuple[object, ...]


Expr = Union[SetLit, FamLit, Ident, Call]


# ---------------------------------------------------------------------------
# lexer

_PUNCT = set("{}()[],;+-/*=")


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident' | 'int' | punct char | 'eof'
    text: str
    line: int
    col: int


def _tokenize(text: str) -> List[Token]:
    toks: List[Token] = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            toks.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(Token("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch in _PUNCT:
            toks.append(Token(ch, ch, line, col))
            i += 1
            col += 1
            continue
        raise DslError("E_SYNTAX", f"unexpected character {ch!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, kind: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            raise DslError(
                "E_SYNTAX",
                f"expected {kind!r}, found {t.text or 'end of input'!r}",
                t.line,
                t.col,
            )
        return self.next()

    def fail(self, msg: str):
        t = self.peek()
        raise DslError("E_SYNTAX", f"{msg} (found {t.text or 'end of input'!r})", t.line, t.col)

    # rat := '-'? INT ('/' INT)?
    def rat(self) -> Fraction:
        neg = False
        if self.peek().kind == "-":
            self.next()
            neg = True
        t = self.expect("int")
        num = int(t.text)
        den = 1
        if self.peek().kind == "/" and self.peek(1).kind == "int":
            self.next()
            den = int(self.expect("int").text)
            if den == 0:
                raise DslError("E_SYNTAX", "zero denominator", t.line, t.col)
        f = Fraction(num, den)
        return -f if neg else f

    def var(self) -> VarNode:
        name = self.expect("ident").text
        self.expect("[")
        mn = int(self.expect("int").text)
        q = r = None
        if self.peek().kind == ",":
            self.next()
            q = int(self.expect("int").text)
            self.expect(",")
            r = int(self.expect("int").text)
        self.expect("]")
        return VarNode(name, mn, q, r)

    def mono(self) -> MonoNode:
        coeff = self.rat()
        self.expect("/")
        vs = [self.var()]
        while self.peek().kind == "*":
            self.next()
            vs.append(self.var())
        return MonoNode(coeff, tuple(vs))

    def expr(self) -> Expr:
        t = self.peek()
        if t.kind == "{":
            self.next()
            items = [self.rat()]
            while self.peek().kind == ",":
                self.next()
                items.append(self.rat())
            self.expect("}")
            return SetLit(tuple(items))
        if t.kind == "ident" and t.text == "fam":
            self.next()
            self.expect("(")
            base = self.rat()
            self.expect(";")
            monos = [self.mono()]
            while self.peek().kind == "+":
                self.next()
                monos.append(self.mono())
            self.expect(")")
            return FamLit(base, tuple(monos))
        if t.kind == "ident":
            name = self.next().text
            if self.peek().kind == "(":
                self.next()
                args: List[object] = []
                if self.peek().kind != ")":
                    args.append(self.arg())
                    while self.peek().kind == ",":
                        self.next()
                        args.append(self.arg())
                self.expect(")")
                return Call(name, tuple(args))
            return Ident(name)
        self.fail("expected an expression")

    def arg(self) -> object:
        t = self.peek()
        if t.kind in ("int", "-"):
            return NumArg(self.rat())
        return self.expr()

    def program(self) -> List[Tuple[str, Expr]]:
        out: List[Tuple[str, Expr]] = []
        while self.peek().kind != "eof":
            kw = self.expect("ident")
            if kw.text != "set":
                raise DslError("E_SYNTAX", "statements start with 'set'", kw.line, kw.col)
            name = self.expect("ident").text
            self.expect("=")
            out.append((name, self.expr()))
        return out


def parse_expression(text: str) -> Expr:
    p = _Parser(text)
    e = p.expr()
    t = p.peek()
    if t.kind != "eof":
        raise DslError("E_SYNTAX", f"trailing input {t.text!r}", t.line, t.col)
    return e


def parse_program(text: str) -> List[Tuple[str, Expr]]:
    return _Parser(text).program()


# ---------------------------------------------------------------------------
# printer


def _rat_str(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def print_expr(e) -> str:
    if isinstance(e, SetLit):
        return "{" + ", ".join(_rat_str(x) for x in e.items) + "}"
    if isinstance(e, FamLit):
        monos = " + ".join(
            _rat_str(m.coeff)
            + "/"
            + "*".join(
                f"{v.name}[{v.min}]"
                if v.q is None
                else f"{v.name}[{v.min},{v.q},{v.r}]"
                for v in m.vars
            )
            for m in e.monos
        )
        return f"fam({_rat_str(e.base)}; {monos})"
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, Call):
        return e.name + "(" + ", ".join(
            _rat_str(a.value) if isinstance(a, NumArg) else print_expr(a)
            for a in e.args
        ) + ")"
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# evaluator


def _eval_famlit(e: FamLit) -> SetFamily:
    params: Dict[str, Parameter] = {}
    monos = []
    for m in e.monos:
        support = set()
        for v in m.vars:
            q = v.q if v.q is not None else 1
            r = v.r if v.r is not None else 0
            p = Parameter(v.name, v.min, q, r)
            if v.name in params and params[v.name] != p:
                raise DslError(
                    "E_TYPE", f"parameter {v.name} declared twice with different ranges", 1, 1
                )
            params[v.name] = p
            support.add(v.name)
        monos.append(Monomial(m.coeff, frozenset(support)))
    atom = PolyAtom(Fraction(0) + e.base, tuple(monos), tuple(sorted(params.values())))
    return family([atom])


def _need_family(v: Value, name: str) -> SetFamily:
    if not isinstance(v, SetFamily):
        raise DslError("E_TYPE", f"{name} needs a symbolic family, got a generator", 1, 1)
    return v


def _finite_elements(v: SetFamily, name: str):
    if len(v.atoms) == 0:
        return []
    if len(v.atoms) == 1 and isinstance(v.atoms[0], FiniteAtom):
        return list(v.atoms[0].elements)
    raise DslError("E_TYPE", f"{name} needs a finite set literal", 1, 1)


_ARITIES = {
    "std": (0, 0), "hyper": (1, 1), "ht1": (0, 0), "ht2": (0, 0), "ct2": (0, 0),
    "ct3": (2, 2), "diag": (1, 1), "mld2": (3, 3), "mld3t": (1, 1), "g16": (0, 0),
    "walls": (0, 0), "Dc": (2, 2), "union": (2, 2), "translate": (2, 2),
    "scale": (2, 2), "sum": (2, 2), "plus": (1, 1), "D": (1, 1), "N0": (1, 1),
    "clip": (3, 3),
}


def eval_expr(e, env: Optional[Dict[str, Value]] = None) -> Value:
    env = env or {}
    if isinstance(e, SetLit):
        return finite_family(e.items)
    if isinstance(e, FamLit):
        return _eval_famlit(e)
    if isinstance(e, Ident):
        if e.name not in env:
            raise DslError("E_UNBOUND", f"unbound identifier {e.name!r}", 1, 1)
        return env[e.name]
    if isinstance(e, NumArg):
        raise DslError("E_TYPE", "a bare number is not a family", 1, 1)
    if not isinstance(e, Call):
        raise TypeError(f"not an expression node: {e!r}")
    name = e.name
    if name not in _ARITIES:
        raise DslError("E_UNBOUND", f"unknown builtin {name!r}", 1, 1)
    lo_a, hi_a = _ARITIES[name]
    if not (lo_a <= len(e.args) <= hi_a):
        raise DslError(
            "E_ARITY", f"{name} takes {lo_a} argument(s), got {len(e.args)}", 1, 1
        )

    def fam_arg(i: int) -> Value:
        a = e.args[i]
        if isinstance(a, NumArg):
            raise DslError("E_TYPE", f"argument {i + 1} of {name} must be a family", 1, 1)
        return eval_expr(a, env)

    def num_arg(i: int) -> Fraction:
        a = e.args[i]
        if not isinstance(a, NumArg):
            raise DslError("E_TYPE", f"argument {i + 1} of {name} must be a number", 1, 1)
        return a.value

    def int_arg(i: int) -> int:
        v = num_arg(i)
        if v.denominator != 1:
            raise DslError("E_TYPE", f"argument {i + 1} of {name} must be an integer", 1, 1)
        return int(v)

    try:
        if name == "std":
            return setops.standard_set()
        if name == "hyper":
            return setops.hyperstandard(_finite_elements(_need_family(fam_arg(0), name), name))
        if name == "ht1":
            return geomsets.ht1()
        if name == "ht2":
            return geomsets.ht2()
        if name == "ct2":
            return geomsets.ct2()
        if name == "ct3":
            return geomsets.ct3_branch(int_arg(0), int_arg(1))
        if name == "diag":
            return geomsets.diag_lct(int_arg(0))
        if name == "mld2":
            return geomsets.mld2_branch(num_arg(0), num_arg(1), num_arg(2))
        if name == "mld3t":
            return geomsets.mld3_terminal_branch(num_arg(0))
        if name == "g16":
            return geomsets.gamma16()
        if name == "walls":
            return geomsets.kmoduli_walls()
        if name == "Dc":
            return geomsets.dc_generator(_need_family(fam_arg(0), name), num_arg(1))
        if name == "union":
            return setops.union(_need_family(fam_arg(0), name), _need_family(fam_arg(1), name))
        if name == "translate":
            return setops.translate(_need_family(fam_arg(0), name), num_arg(1))
        if name == "scale":
            return setops.scale(_need_family(fam_arg(0), name), num_arg(1))
        if name == "sum":
            return setops.sum_families(
                _need_family(fam_arg(0), name), _need_family(fam_arg(1), name)
            )
        if name == "plus":
            return setops.gamma_plus(_need_family(fam_arg(0), name))
        if name == "D":
            return setops.dgamma(_need_family(fam_arg(0), name))
        if name == "N0":
            return setops.n_zero(_need_family(fam_arg(0), name))
        if name == "clip":
            return setops.clip(_need_family(fam_arg(0), name), num_arg(1), num_arg(2))
    except (ValueError, TypeError) as exc:
        raise DslError("E_TYPE", str(exc), 1, 1)
    raise AssertionError("unreachable")


def eval_program(text: str) -> Dict[str, Value]:
    env: Dict[str, Value] = {}
    for name, expr in parse_program(text):
        env[name] = eval_expr(expr, env)
    return env

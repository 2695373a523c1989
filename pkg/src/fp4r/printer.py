"""Pretty-printing of terms and types back to the surface syntax.

``parse(pretty(x))`` returns an AST structurally equal to ``x`` for every
parseable node (server addresses and channels need the same resolution
tables on re-parse).
"""

from __future__ import annotations

from .parser import KEYWORDS
from .syntax import (
    AddrV,
    App,
    ArrowT,
    Basic,
    BoolV,
    BytesV,
    ChanT,
    ChannelV,
    Cons,
    Field,
    Forall,
    Head,
    IntV,
    Lambda,
    Let,
    ListT,
    Match,
    MatchT,
    NilV,
    P4Op,
    Record,
    RecordT,
    ServerRefT,
    SingletonT,
    StringV,
    Tail,
    Term,
    Top,
    TVar,
    Type,
    TypeApp,
    TypeAppT,
    TypeLambda,
    UnionT,
    UnitV,
    Var,
)

# Term precedence levels: 0 binder bodies, 1 match, 2 cons, 3 head/tail,
# 4 application, 5 field selection, 6 atoms.


def pretty_term(t: Term) -> str:
    return _term(t, 0)


def _label(lbl: str) -> str:
    if lbl and (lbl[0].isalpha() or lbl[0] == "_") and all(
        c.isalnum() or c == "_" for c in lbl
    ) and lbl not in KEYWORDS:
        return lbl
    return _string(lbl)


def _string(s: str) -> str:
    out = s.replace("\\", "\\\\").replace('"', '\\"')
    out = out.replace("\n", "\\n").replace("\t", "\\t")
    return f'"{out}"'


def _wrap(s: str, level: int, ctx: int) -> str:
    return f"({s})" if level < ctx else s


def _term(t: Term, ctx: int) -> str:
    match t:
        case UnitV():
            return "()"
        case IntV(v):
            return str(v)
        case BoolV(v):
            return "true" if v else "false"
        case StringV(v):
            return _string(v)
        case BytesV(octets):
            return "b(" + ",".join(str(o) for o in octets) + ")"
        case NilV(annot):
            return f"nil[{_type(annot, 0)}]" if annot is not None else "nil"
        case AddrV(name, _, _, _):
            return f"@{_addr_name(name)}"
        case ChannelV(name, _, _, _):
            return f"${_addr_name(name)}"
        case Var(name):
            return name
        case Cons(h, tl):
            return _wrap(f"{_term(h, 3)} :: {_term(tl, 2)}", 2, ctx)
        case Head(a):
            return _wrap(f"head {_term(a, 3)}", 3, ctx)
        case Tail(a):
            return _wrap(f"tail {_term(a, 3)}", 3, ctx)
        case Record(fields):
            inner = ", ".join(f"{_label(l)} = {_term(v, 0)}" for l, v in fields)
            return "{" + inner + "}"
        case Field(r, lbl):
            return f"{_term(r, 5)}.{_label(lbl)}"
        case App(f, a):
            return _wrap(f"{_term(f, 4)} {_term(a, 5)}", 4, ctx)
        case TypeAppT(f, ty):
            return _wrap(f"{_term(f, 4)}[{_type(ty, 0)}]", 4, ctx)
        case Lambda(x, vt, body):
            return _wrap(f"fun({x}: {_type(vt, 0)}) {_term(body, 0)}", 0, ctx)
        case TypeLambda(x, bound, body):
            return _wrap(f"Fun({x} <: {_type(bound, 0)}) {_term(body, 0)}", 0, ctx)
        case Let(x, bound, body):
            return _wrap(f"let {x} = {_term(bound, 0)} in {_term(body, 0)}", 0, ctx)
        case Match(s, cases):
            inner = ", ".join(
                f"{c.var}: {_type(c.case_type, 0)} => {_term(c.body, 0)}" for c in cases
            )
            return _wrap(f"{_term(s, 1)} match {{{inner}}}", 1, ctx)
        case P4Op(kind, args):
            inner = ", ".join(_term(a, 0) for a in args)
            return f"{kind.value}({inner})"
        case _:
            raise TypeError(f"cannot print {t!r}")


def _addr_name(name: str) -> str:
    if name and (name[0].isalpha() or name[0] == "_") and all(
        c.isalnum() or c == "_" for c in name
    ):
        return name
    return _string(name)


# Type precedence levels: 0 quantifier bodies, 1 arrow, 2 union, 3 match,
# 4 application, 5 atoms.


def pretty_type(t: Type) -> str:
    return _type(t, 0)


def _type(t: Type, ctx: int) -> str:
    match t:
        case Top():
            return "Top"
        case Basic(name):
            return name
        case TVar(name):
            return name
        case ServerRefT(a, b, c):
            return f"ServerRef[{_type(a, 0)}, {_type(b, 0)}, {_type(c, 0)}]"
        case ChanT(a, b, c):
            return f"Chan[{_type(a, 0)}, {_type(b, 0)}, {_type(c, 0)}]"
        case RecordT(fields):
            inner = ", ".join(f"{_label(l)}: {_type(ft, 0)}" for l, ft in fields)
            return "{" + inner + "}"
        case ListT(elem):
            return f"[{_type(elem, 0)}]"
        case ArrowT(p, r):
            return _wrap(f"{_type(p, 2)} -> {_type(r, 1)}", 1, ctx)
        case Forall(x, bound, body):
            if isinstance(bound, Top):
                return _wrap(f"All({x}) {_type(body, 0)}", 0, ctx)
            return _wrap(f"All({x} <: {_type(bound, 0)}) {_type(body, 0)}", 0, ctx)
        case TypeApp(f, a):
            return _wrap(f"{_type(f, 4)} {_type(a, 5)}", 4, ctx)
        case UnionT(l, r):
            return _wrap(f"{_type(l, 2)} | {_type(r, 3)}", 2, ctx)
        case SingletonT(v):
            return f"'{_gvalue(v)}"
        case MatchT(s, cases):
            inner = ", ".join(f"{_type(p, 0)} => {_type(c, 0)}" for p, c in cases)
            return _wrap(f"{_type(s, 3)} match {{{inner}}}", 3, ctx)
        case _:
            raise TypeError(f"cannot print {t!r}")


def _gvalue(v: Term) -> str:
    """Ground value in singleton-literal syntax (cons always parenthesized)."""
    match v:
        case UnitV():
            return "()"
        case IntV(n):
            return str(n)
        case BoolV(b):
            return "true" if b else "false"
        case StringV(s):
            return _string(s)
        case BytesV(octets):
            return "b(" + ",".join(str(o) for o in octets) + ")"
        case NilV(_):
            return "nil"
        case Cons(h, tl):
            return f"({_gvalue(h)} :: {_gvalue_cons(tl)})"
        case Record(fields):
            inner = ", ".join(f"{_label(l)} = {_gvalue_cons(fv)}" for l, fv in fields)
            return "{" + inner + "}"
        case AddrV(name, _, _, _):
            return f"@{_addr_name(name)}"
        case ChannelV(name, _, _, _):
            return f"${_addr_name(name)}"
        case _:
            raise TypeError(f"not a ground value: {v!r}")


def _gvalue_cons(v: Term) -> str:
    if isinstance(v, Cons):
        return f"{_gvalue(v.head)} :: {_gvalue_cons(v.tail)}"
    return _gvalue(v)

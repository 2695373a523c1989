"""Abstract syntax of fp4r terms and types, plus substitution.

Terms, values and ground values share one node hierarchy: value-ness and
ground-ness are predicates over it (``is_value``, ``is_ground``).  All nodes
are frozen dataclasses, so they are hashable and safe to share freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union


class SyntaxInvariantError(ValueError):
    """Raised when an AST node would violate a structural invariant."""


# ---------------------------------------------------------------------------
# Types


class Type:
    """Base class for all type nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Top(Type):
    pass


@dataclass(frozen=True)
class Basic(Type):
    name: str  # one of Int, Bool, String, Unit, Bytes

    def __post_init__(self):
        if self.name not in BASIC_TYPE_NAMES:
            raise SyntaxInvariantError(f"unknown basic type {self.name!r}")


BASIC_TYPE_NAMES = ("Int", "Bool", "String", "Unit", "Bytes")

INT = Basic("Int")
BOOL = Basic("Bool")
STRING = Basic("String")
UNIT = Basic("Unit")
BYTES = Basic("Bytes")
TOP = Top()


@dataclass(frozen=True)
class ServerRefT(Type):
    matches: Type
    actions: Type
    params: Type


@dataclass(frozen=True)
class ChanT(Type):
    matches: Type
    actions: Type
    params: Type


@dataclass(frozen=True)
class RecordT(Type):
    fields: tuple[tuple[str, Type], ...]

    def __post_init__(self):
        labels = [f for f, _ in self.fields]
        if len(labels) != len(set(labels)):
            raise SyntaxInvariantError(f"duplicate record label in {labels}")

    def field_map(self) -> dict[str, Type]:
        return dict(self.fields)


@dataclass(frozen=True)
class ListT(Type):
    elem: Type


@dataclass(frozen=True)
class ArrowT(Type):
    param: Type
    result: Type


@dataclass(frozen=True)
class TVar(Type):
    name: str


@dataclass(frozen=True)
class Forall(Type):
    var: str
    bound: Type
    body: Type


@dataclass(frozen=True)
class TypeApp(Type):
    fn: Type
    arg: Type


@dataclass(frozen=True)
class UnionT(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class SingletonT(Type):
    value: "Term"

    def __post_init__(self):
        if not is_ground(self.value):
            raise SyntaxInvariantError("singleton type payload must be a ground value")


@dataclass(frozen=True)
class MatchT(Type):
    scrutinee: Type
    cases: tuple[tuple[Type, Type], ...]  # (pattern, continuation)

    def __post_init__(self):
        if not self.cases:
            raise SyntaxInvariantError("match type needs at least one case")


def union_of(parts: list[Type]) -> Type:
    """Left-nested union of one or more types (mirrors the parser)."""
    if not parts:
        raise SyntaxInvariantError("union of zero types")
    result = parts[0]
    for part in parts[1:]:
        result = UnionT(result, part)
    return result


def union_members(t: Type) -> list[Type]:
    """Flatten nested unions into a member list (left to right)."""
    if isinstance(t, UnionT):
        return union_members(t.left) + union_members(t.right)
    return [t]


def option_of(t: Type) -> Type:
    """The optional-value encoding: {some: T} | {none: Unit}."""
    return UnionT(RecordT((("some", t),)), RecordT((("none", UNIT),)))


def option_type() -> Type:
    """Derived builder: All(A) {some: A} | {none: Unit}."""
    return Forall("A", TOP, option_of(TVar("A")))


def table_entry_type() -> Type:
    """Derived builder for the table-entry record type.

    All(Tm) All(Ta) All(Tp) All(Xn) All(Xa <: Ta Xn)
      {name: Xn, matches: Tm Xn, action: Xa, params: Tp Xa}
    """
    body = RecordT(
        (
            ("name", TVar("Xn")),
            ("matches", TypeApp(TVar("Tm"), TVar("Xn"))),
            ("action", TVar("Xa")),
            ("params", TypeApp(TVar("Tp"), TVar("Xa"))),
        )
    )
    t: Type = Forall("Xa", TypeApp(TVar("Ta"), TVar("Xn")), body)
    for var in ("Xn", "Tp", "Ta", "Tm"):
        t = Forall(var, TOP, t)
    return t


def p4_entity_type() -> Type:
    """Derived builder for queryable entities.

    Table entries are the only entity kind modelled, so this is the
    table-entry builder eta-expanded over the same parameters.
    """
    applied: Type = table_entry_type()
    for var in ("Tm", "Ta", "Tp", "Xn", "Xa"):
        applied = TypeApp(applied, TVar(var))
    t: Type = Forall("Xa", TypeApp(TVar("Ta"), TVar("Xn")), applied)
    for var in ("Xn", "Tp", "Ta", "Tm"):
        t = Forall(var, TOP, t)
    return t


# ---------------------------------------------------------------------------
# Terms


class Term:
    """Base class for all term nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class UnitV(Term):
    pass


@dataclass(frozen=True)
class IntV(Term):
    value: int


@dataclass(frozen=True)
class BoolV(Term):
    value: bool


@dataclass(frozen=True)
class StringV(Term):
    value: str


@dataclass(frozen=True)
class BytesV(Term):
    octets: tuple[int, ...]

    def __post_init__(self):
        for o in self.octets:
            if not 0 <= o <= 255:
                raise SyntaxInvariantError(f"byte literal octet {o} out of range")


@dataclass(frozen=True)
class AddrV(Term):
    """A server address carrying the three config-encoded type parameters."""

    name: str
    matches: Type
    actions: Type
    params: Type


@dataclass(frozen=True)
class ChannelV(Term):
    """An established client-server channel; only created at run time."""

    ident: str
    matches: Type
    actions: Type
    params: Type


@dataclass(frozen=True)
class NilV(Term):
    # The element annotation keeps typing syntax-directed; it is ignored
    # when comparing terms.
    annot: Optional[Type] = field(default=None, compare=False)


@dataclass(frozen=True)
class Cons(Term):
    head: Term
    tail: Term


@dataclass(frozen=True)
class Record(Term):
    fields: tuple[tuple[str, Term], ...]

    def __post_init__(self):
        labels = [f for f, _ in self.fields]
        if len(labels) != len(set(labels)):
            raise SyntaxInvariantError(f"duplicate record label in {labels}")

    def field_map(self) -> dict[str, Term]:
        return dict(self.fields)


@dataclass(frozen=True)
class Lambda(Term):
    var: str
    var_type: Type
    body: Term


@dataclass(frozen=True)
class TypeLambda(Term):
    var: str
    bound: Type
    body: Term


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Head(Term):
    arg: Term


@dataclass(frozen=True)
class Tail(Term):
    arg: Term


@dataclass(frozen=True)
class Field(Term):
    record: Term
    label: str


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True)
class TypeAppT(Term):
    fn: Term
    arg: Type


@dataclass(frozen=True)
class Let(Term):
    var: str
    bound: Term
    body: Term


@dataclass(frozen=True)
class MatchCase:
    var: str
    case_type: Type
    body: Term


@dataclass(frozen=True)
class Match(Term):
    scrutinee: Term
    cases: tuple[MatchCase, ...]

    def __post_init__(self):
        if not self.cases:
            raise SyntaxInvariantError("match term needs at least one case")


class OpKind(Enum):
    CONNECT = "Connect"
    READ = "Read"
    INSERT = "Insert"
    MODIFY = "Modify"
    DELETE = "Delete"


OP_ARITY = {
    OpKind.CONNECT: 1,
    OpKind.READ: 2,
    OpKind.INSERT: 2,
    OpKind.MODIFY: 2,
    OpKind.DELETE: 2,
}


@dataclass(frozen=True)
class P4Op(Term):
    kind: OpKind
    args: tuple[Term, ...]

    def __post_init__(self):
        if len(self.args) != OP_ARITY[self.kind]:
            raise SyntaxInvariantError(
                f"{self.kind.value} takes {OP_ARITY[self.kind]} argument(s), got {len(self.args)}"
            )


# ---------------------------------------------------------------------------
# Predicates

_SCALAR_VALUES = (UnitV, IntV, BoolV, StringV, BytesV, AddrV, ChannelV, NilV)


def is_value(t: Term) -> bool:
    if isinstance(t, _SCALAR_VALUES) or isinstance(t, (Lambda, TypeLambda)):
        return True
    if isinstance(t, Cons):
        return is_value(t.head) and is_value(t.tail)
    if isinstance(t, Record):
        return all(is_value(v) for _, v in t.fields)
    return False


def is_ground(t: Term) -> bool:
    """True for values that contain no lambda or type abstraction."""
    if isinstance(t, _SCALAR_VALUES):
        return True
    if isinstance(t, Cons):
        return is_ground(t.head) and is_ground(t.tail)
    if isinstance(t, Record):
        return all(is_ground(v) for _, v in t.fields)
    return False


def list_value_items(v: Term) -> list[Term]:
    """Spine of a list value as a Python list; raises on a non-list."""
    items = []
    while isinstance(v, Cons):
        items.append(v.head)
        v = v.tail
    if not isinstance(v, NilV):
        raise SyntaxInvariantError("not a list value")
    return items


def make_list_value(items: list[Term], annot: Optional[Type] = None) -> Term:
    out: Term = NilV(annot)
    for item in reversed(items):
        out = Cons(item, out)
    return out


# ---------------------------------------------------------------------------
# Free variables and fresh names


def free_term_vars(t: Term) -> set[str]:
    match t:
        case Var(name):
            return {name}
        case Cons(h, tl):
            return free_term_vars(h) | free_term_vars(tl)
        case Head(a) | Tail(a):
            return free_term_vars(a)
        case Record(fields):
            out: set[str] = set()
            for _, v in fields:
                out |= free_term_vars(v)
            return out
        case Field(r, _):
            return free_term_vars(r)
        case App(f, a):
            return free_term_vars(f) | free_term_vars(a)
        case TypeAppT(f, _):
            return free_term_vars(f)
        case Lambda(x, _, body):
            return free_term_vars(body) - {x}
        case TypeLambda(_, _, body):
            return free_term_vars(body)
        case Let(x, bound, body):
            return free_term_vars(bound) | (free_term_vars(body) - {x})
        case Match(s, cases):
            out = free_term_vars(s)
            for c in cases:
                out |= free_term_vars(c.body) - {c.var}
            return out
        case P4Op(_, args):
            out = set()
            for a in args:
                out |= free_term_vars(a)
            return out
        case _:
            return set()


def free_type_vars_in_type(t: Type) -> set[str]:
    match t:
        case TVar(name):
            return {name}
        case ServerRefT(a, b, c) | ChanT(a, b, c):
            return (
                free_type_vars_in_type(a)
                | free_type_vars_in_type(b)
                | free_type_vars_in_type(c)
            )
        case RecordT(fields):
            out: set[str] = set()
            for _, ft in fields:
                out |= free_type_vars_in_type(ft)
            return out
        case ListT(elem):
            return free_type_vars_in_type(elem)
        case ArrowT(p, r):
            return free_type_vars_in_type(p) | free_type_vars_in_type(r)
        case Forall(x, bound, body):
            return free_type_vars_in_type(bound) | (free_type_vars_in_type(body) - {x})
        case TypeApp(f, a) | UnionT(f, a):
            return free_type_vars_in_type(f) | free_type_vars_in_type(a)
        case MatchT(s, cases):
            out = free_type_vars_in_type(s)
            for pat, cont in cases:
                out |= free_type_vars_in_type(pat) | free_type_vars_in_type(cont)
            return out
        case _:
            return set()


def free_type_vars_in_term(t: Term) -> set[str]:
    match t:
        case Lambda(_, vt, body):
            return free_type_vars_in_type(vt) | free_type_vars_in_term(body)
        case TypeLambda(x, bound, body):
            return free_type_vars_in_type(bound) | (free_type_vars_in_term(body) - {x})
        case TypeAppT(f, arg):
            return free_type_vars_in_term(f) | free_type_vars_in_type(arg)
        case Match(s, cases):
            out = free_type_vars_in_term(s)
            for c in cases:
                out |= free_type_vars_in_type(c.case_type) | free_type_vars_in_term(c.body)
            return out
        case Cons(h, tl):
            return free_type_vars_in_term(h) | free_type_vars_in_term(tl)
        case Head(a) | Tail(a):
            return free_type_vars_in_term(a)
        case Record(fields):
            out = set()
            for _, v in fields:
                out |= free_type_vars_in_term(v)
            return out
        case Field(r, _):
            return free_type_vars_in_term(r)
        case App(f, a):
            return free_type_vars_in_term(f) | free_type_vars_in_term(a)
        case Let(_, bound, body):
            return free_type_vars_in_term(bound) | free_type_vars_in_term(body)
        case P4Op(_, args):
            out = set()
            for a in args:
                out |= free_type_vars_in_term(a)
            return out
        case NilV(annot):
            return free_type_vars_in_type(annot) if annot is not None else set()
        case _:
            return set()


def fresh_name(base: str, avoid: set[str]) -> str:
    if base not in avoid:
        return base
    i = 1
    while f"{base}_{i}" in avoid:
        i += 1
    return f"{base}_{i}"


# ---------------------------------------------------------------------------
# Substitution

# All three substitutions rename bound variables when needed, so capture
# cannot occur even for open substituents.


def subst_term(t: Term, x: str, v: Term) -> Term:
    """Substitute term v for variable x in t.

    Ground leaves are unchanged; binders stop the substitution when they
    shadow x and are renamed when they would capture a free variable of v.
    """
    if isinstance(t, Var):
        return v if t.name == x else t
    return _subst_structural(t, x, v)


def _subst_structural(t: Term, x: str, v: Term) -> Term:
    match t:
        case Cons(h, tl):
            return Cons(subst_term(h, x, v), subst_term(tl, x, v))
        case Head(a):
            return Head(subst_term(a, x, v))
        case Tail(a):
            return Tail(subst_term(a, x, v))
        case Record(fields):
            return Record(tuple((f, subst_term(ft, x, v)) for f, ft in fields))
        case Field(r, lbl):
            return Field(subst_term(r, x, v), lbl)
        case App(f, a):
            return App(subst_term(f, x, v), subst_term(a, x, v))
        case TypeAppT(f, a):
            return TypeAppT(subst_term(f, x, v), a)
        case Lambda(y, vt, body):
            if y == x:
                return t
            if y in free_term_vars(v):
                z = fresh_name(y, free_term_vars(v) | free_term_vars(body) | {x})
                body = subst_term(body, y, Var(z))
                return Lambda(z, vt, subst_term(body, x, v))
            return Lambda(y, vt, subst_term(body, x, v))
        case TypeLambda(y, bound, body):
            return TypeLambda(y, bound, subst_term(body, x, v))
        case Let(y, bound, body):
            nbound = subst_term(bound, x, v)
            if y == x:
                return Let(y, nbound, body)
            if y in free_term_vars(v):
                z = fresh_name(y, free_term_vars(v) | free_term_vars(body) | {x})
                body = subst_term(body, y, Var(z))
                return Let(z, nbound, subst_term(body, x, v))
            return Let(y, nbound, subst_term(body, x, v))
        case Match(s, cases):
            new_cases = []
            for c in cases:
                if c.var == x:
                    new_cases.append(c)
                    continue
                body = c.body
                var = c.var
                if var in free_term_vars(v):
                    z = fresh_name(var, free_term_vars(v) | free_term_vars(body) | {x})
                    body = subst_term(body, var, Var(z))
                    var = z
                new_cases.append(MatchCase(var, c.case_type, subst_term(body, x, v)))
            return Match(subst_term(s, x, v), tuple(new_cases))
        case P4Op(kind, args):
            return P4Op(kind, tuple(subst_term(a, x, v) for a in args))
        case _:
            return t


def subst_type_in_term(t: Term, x: str, ty: Type) -> Term:
    """Substitute type ty for type variable x throughout a term."""
    match t:
        case Lambda(y, vt, body):
            return Lambda(y, subst_type_in_type(vt, x, ty), subst_type_in_term(body, x, ty))
        case TypeLambda(y, bound, body):
            nbound = subst_type_in_type(bound, x, ty)
            if y == x:
                return TypeLambda(y, nbound, body)
            if y in free_type_vars_in_type(ty):
                z = fresh_name(y, free_type_vars_in_type(ty) | free_type_vars_in_term(body))
                body = subst_type_in_term(body, y, TVar(z))
                return TypeLambda(z, nbound, subst_type_in_term(body, x, ty))
            return TypeLambda(y, nbound, subst_type_in_term(body, x, ty))
        case Cons(h, tl):
            return Cons(subst_type_in_term(h, x, ty), subst_type_in_term(tl, x, ty))
        case Head(a):
            return Head(subst_type_in_term(a, x, ty))
        case Tail(a):
            return Tail(subst_type_in_term(a, x, ty))
        case Record(fields):
            return Record(tuple((f, subst_type_in_term(v, x, ty)) for f, v in fields))
        case Field(r, lbl):
            return Field(subst_type_in_term(r, x, ty), lbl)
        case App(f, a):
            return App(subst_type_in_term(f, x, ty), subst_type_in_term(a, x, ty))
        case TypeAppT(f, a):
            return TypeAppT(subst_type_in_term(f, x, ty), subst_type_in_type(a, x, ty))
        case Let(y, bound, body):
            return Let(y, subst_type_in_term(bound, x, ty), subst_type_in_term(body, x, ty))
        case Match(s, cases):
            return Match(
                subst_type_in_term(s, x, ty),
                tuple(
                    MatchCase(
                        c.var,
                        subst_type_in_type(c.case_type, x, ty),
                        subst_type_in_term(c.body, x, ty),
                    )
                    for c in cases
                ),
            )
        case P4Op(kind, args):
            return P4Op(kind, tuple(subst_type_in_term(a, x, ty) for a in args))
        case NilV(annot):
            if annot is None:
                return t
            return NilV(subst_type_in_type(annot, x, ty))
        case _:
            # Remaining values are ground leaves and unaffected.
            return t


def subst_type_in_type(t: Type, x: str, ty: Type) -> Type:
    match t:
        case TVar(name):
            return ty if name == x else t
        case ServerRefT(a, b, c):
            return ServerRefT(
                subst_type_in_type(a, x, ty),
                subst_type_in_type(b, x, ty),
                subst_type_in_type(c, x, ty),
            )
        case ChanT(a, b, c):
            return ChanT(
                subst_type_in_type(a, x, ty),
                subst_type_in_type(b, x, ty),
                subst_type_in_type(c, x, ty),
            )
        case RecordT(fields):
            return RecordT(tuple((f, subst_type_in_type(ft, x, ty)) for f, ft in fields))
        case ListT(elem):
            return ListT(subst_type_in_type(elem, x, ty))
        case ArrowT(p, r):
            return ArrowT(subst_type_in_type(p, x, ty), subst_type_in_type(r, x, ty))
        case Forall(y, bound, body):
            nbound = subst_type_in_type(bound, x, ty)
            if y == x:
                return Forall(y, nbound, body)
            if y in free_type_vars_in_type(ty):
                z = fresh_name(y, free_type_vars_in_type(ty) | free_type_vars_in_type(body))
                body = subst_type_in_type(body, y, TVar(z))
                return Forall(z, nbound, subst_type_in_type(body, x, ty))
            return Forall(y, nbound, subst_type_in_type(body, x, ty))
        case TypeApp(f, a):
            return TypeApp(subst_type_in_type(f, x, ty), subst_type_in_type(a, x, ty))
        case UnionT(l, r):
            return UnionT(subst_type_in_type(l, x, ty), subst_type_in_type(r, x, ty))
        case MatchT(s, cases):
            return MatchT(
                subst_type_in_type(s, x, ty),
                tuple(
                    (subst_type_in_type(p, x, ty), subst_type_in_type(c, x, ty))
                    for p, c in cases
                ),
            )
        case SingletonT(_):
            # Singleton payloads are ground values and contain no type variables
            # that substitution should touch.
            return t
        case _:
            return t


def rename_term_var(t: Term, x: str, y: str) -> Term:
    """Alpha-rename free occurrences of x to y (y must be fresh for t)."""
    return subst_term(t, x, Var(y))


# ---------------------------------------------------------------------------
# Alpha equivalence of types


def types_alpha_eq(t1: Type, t2: Type) -> bool:
    return _alpha_eq(t1, t2, {}, {})


def _alpha_eq(t1: Type, t2: Type, m1: dict[str, str], m2: dict[str, str]) -> bool:
    if type(t1) is not type(t2):
        return False
    match t1, t2:
        case (Top(), Top()):
            return True
        case (Basic(a), Basic(b)):
            return a == b
        case (TVar(a), TVar(b)):
            return m1.get(a, a) == m2.get(b, b)
        case (ServerRefT(a1, b1, c1), ServerRefT(a2, b2, c2)) | (
            ChanT(a1, b1, c1),
            ChanT(a2, b2, c2),
        ):
            return (
                _alpha_eq(a1, a2, m1, m2)
                and _alpha_eq(b1, b2, m1, m2)
                and _alpha_eq(c1, c2, m1, m2)
            )
        case (RecordT(f1), RecordT(f2)):
            if len(f1) != len(f2):
                return False
            d2 = dict(f2)
            if set(l for l, _ in f1) != set(d2):
                return False
            return all(_alpha_eq(ft, d2[l], m1, m2) for l, ft in f1)
        case (ListT(e1), ListT(e2)):
            return _alpha_eq(e1, e2, m1, m2)
        case (ArrowT(p1, r1), ArrowT(p2, r2)):
            return _alpha_eq(p1, p2, m1, m2) and _alpha_eq(r1, r2, m1, m2)
        case (Forall(x1, b1, body1), Forall(x2, b2, body2)):
            if not _alpha_eq(b1, b2, m1, m2):
                return False
            marker = f"!{len(m1)}"
            return _alpha_eq(body1, body2, {**m1, x1: marker}, {**m2, x2: marker})
        case (TypeApp(f1, a1), TypeApp(f2, a2)):
            return _alpha_eq(f1, f2, m1, m2) and _alpha_eq(a1, a2, m1, m2)
        case (UnionT(l1, r1), UnionT(l2, r2)):
            return _alpha_eq(l1, l2, m1, m2) and _alpha_eq(r1, r2, m1, m2)
        case (SingletonT(v1), SingletonT(v2)):
            return ground_values_eq(v1, v2)
        case (MatchT(s1, c1), MatchT(s2, c2)):
            if len(c1) != len(c2):
                return False
            if not _alpha_eq(s1, s2, m1, m2):
                return False
            return all(
                _alpha_eq(p1, p2, m1, m2) and _alpha_eq(k1, k2, m1, m2)
                for (p1, k1), (p2, k2) in zip(c1, c2)
            )
        case _:
            return False


def ground_values_eq(v1: Term, v2: Term) -> bool:
    """Ground-value equality; address/channel type parameters compare up to alpha."""
    if type(v1) is not type(v2):
        return False
    match v1, v2:
        case (AddrV(n1, a1, b1, c1), AddrV(n2, a2, b2, c2)) | (
            ChannelV(n1, a1, b1, c1),
            ChannelV(n2, a2, b2, c2),
        ):
            return (
                n1 == n2
                and types_alpha_eq(a1, a2)
                and types_alpha_eq(b1, b2)
                and types_alpha_eq(c1, c2)
            )
        case (Cons(h1, t1), Cons(h2, t2)):
            return ground_values_eq(h1, h2) and ground_values_eq(t1, t2)
        case (Record(f1), Record(f2)):
            if len(f1) != len(f2):
                return False
            d2 = dict(f2)
            if set(l for l, _ in f1) != set(d2):
                return False
            return all(ground_values_eq(v, d2[l]) for l, v in f1)
        case _:
            return v1 == v2


GroundValue = Term  # alias for documentation purposes
Value = Term

"""Type checking: environments, membership, normalization, subtyping,
disjointness, and term typing.

The subtype and disjointness procedures are algorithmic approximations of
the declarative relations: types are normalized first (type applications
are substituted away and match types are reduced when their scrutinee
provably fits a case whose earlier patterns are provably disjoint), then
compared by syntax-directed rules.  Disjointness is conservative: it only
answers True when no common inhabitant can exist.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from . import printer
from .syntax import (
    BOOL,
    BYTES,
    INT,
    STRING,
    TOP,
    UNIT,
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
    OpKind,
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
    free_term_vars,
    fresh_name,
    ground_values_eq,
    is_ground,
    option_of,
    rename_term_var,
    subst_type_in_term,
    subst_type_in_type,
    types_alpha_eq,
    union_members,
    union_of,
)

DEFAULT_FUEL = 512

INVALID_ENV = "invalid-env"
INVALID_TYPE = "invalid-type"
NOT_SUBTYPE = "not-subtype"
NOT_EXHAUSTIVE = "not-exhaustive"
NO_MATCH_CASE = "no-match-case"
UNKNOWN_VARIABLE = "unknown-variable"
FIELD_MISSING = "field-missing"
OP_ARG_MISMATCH = "op-arg-mismatch"
FUEL_EXHAUSTED = "normalization-fuel-exhausted"


class TypeCheckError(Exception):
    """A typing failure; every failure carries exactly one kind."""

    def __init__(
        self,
        kind: str,
        message: str,
        location: Optional[str] = None,
        expected: Optional[Type] = None,
        actual: Optional[Type] = None,
    ):
        self.kind = kind
        self.message = message
        self.location = location
        self.expected = expected
        self.actual = actual
        where = f" at {location}" if location else ""
        detail = message
        if expected is not None and actual is not None:
            detail = (
                f"a value of type {printer.pretty_type(expected)} is required, "
                f"but {printer.pretty_type(actual)} was found"
            )
            if message:
                detail = f"{message}: {detail}"
        super().__init__(f"{kind}{where}: {detail}")


# ---------------------------------------------------------------------------
# Typing environments


@dataclass(frozen=True)
class TermBind:
    name: str
    type: Type


@dataclass(frozen=True)
class TypeBind:
    name: str
    bound: Type


Binding = Union[TermBind, TypeBind]


@dataclass(frozen=True)
class TypingEnv:
    bindings: tuple[Binding, ...] = ()

    def extend_term(self, name: str, ty: Type) -> "TypingEnv":
        return TypingEnv(self.bindings + (TermBind(name, ty),))

    def extend_tvar(self, name: str, bound: Type) -> "TypingEnv":
        return TypingEnv(self.bindings + (TypeBind(name, bound),))

    def lookup_term(self, name: str) -> Optional[Type]:
        for b in reversed(self.bindings):
            if isinstance(b, TermBind) and b.name == name:
                return b.type
        return None

    def lookup_tvar(self, name: str) -> Optional[Type]:
        for b in reversed(self.bindings):
            if isinstance(b, TypeBind) and b.name == name:
                return b.bound
        return None

    def names(self) -> set[str]:
        return {b.name for b in self.bindings}


EMPTY_ENV = TypingEnv()


def env_valid(env: TypingEnv) -> bool:
    """True iff all bound names are distinct and every binding's type is
    valid in the prefix preceding it."""
    seen: set[str] = set()
    prefix = TypingEnv()
    for b in env.bindings:
        if b.name in seen:
            return False
        ty = b.type if isinstance(b, TermBind) else b.bound
        if not type_valid(prefix, ty):
            return False
        seen.add(b.name)
        prefix = TypingEnv(prefix.bindings + (b,))
    return True


# ---------------------------------------------------------------------------
# Fuel accounting


class _Budget:
    __slots__ = ("left",)

    def __init__(self, fuel: int):
        self.left = fuel

    def spend(self):
        self.left -= 1
        if self.left < 0:
            raise TypeCheckError(
                FUEL_EXHAUSTED,
                "type-level computation did not terminate within the rewrite budget",
            )


# ---------------------------------------------------------------------------
# Normalization


def normalize_type(env: TypingEnv, t: Type, fuel: int = DEFAULT_FUEL) -> Type:
    """Reduce type applications and decidable match types to a fixpoint."""
    return _normalize(env, t, _Budget(fuel))


def _normalize(env: TypingEnv, t: Type, budget: _Budget) -> Type:
    match t:
        case TypeApp(fn, arg):
            fn = _normalize(env, fn, budget)
            arg = _normalize(env, arg, budget)
            if isinstance(fn, Forall) and _subtype_norm(
                env, arg, _normalize(env, fn.bound, budget), budget
            ):
                budget.spend()
                return _normalize(env, subst_type_in_type(fn.body, fn.var, arg), budget)
            return TypeApp(fn, arg)
        case MatchT(scrutinee, cases):
            s = _normalize(env, scrutinee, budget)
            ncases = tuple(
                (_normalize(env, p, budget), _normalize(env, c, budget))
                for p, c in cases
            )
            for i, (pat, cont) in enumerate(ncases):
                if _subtype_norm(env, s, pat, budget) and all(
                    _disjoint_norm(env, s, ncases[j][0], budget) for j in range(i)
                ):
                    budget.spend()
                    return cont
            return MatchT(s, ncases)
        case UnionT(left, right):
            return UnionT(_normalize(env, left, budget), _normalize(env, right, budget))
        case ListT(elem):
            return ListT(_normalize(env, elem, budget))
        case RecordT(fields):
            return RecordT(tuple((f, _normalize(env, ft, budget)) for f, ft in fields))
        case ArrowT(p, r):
            return ArrowT(_normalize(env, p, budget), _normalize(env, r, budget))
        case ServerRefT(a, b, c):
            return ServerRefT(
                _normalize(env, a, budget),
                _normalize(env, b, budget),
                _normalize(env, c, budget),
            )
        case ChanT(a, b, c):
            return ChanT(
                _normalize(env, a, budget),
                _normalize(env, b, budget),
                _normalize(env, c, budget),
            )
        case Forall(var, bound, body):
            nbound = _normalize(env, bound, budget)
            inner = env.extend_tvar(var, nbound)
            return Forall(var, nbound, _normalize(inner, body, budget))
        case _:
            return t


# ---------------------------------------------------------------------------
# Membership: ground value v belongs to type T


def member_of(v: Term, t: Type, fuel: int = DEFAULT_FUEL) -> bool:
    """Does ground value v inhabit closed type t?"""
    budget = _Budget(fuel)
    return _member_norm(v, _normalize(EMPTY_ENV, t, budget), budget)


def _member_norm(v: Term, t: Type, budget: _Budget) -> bool:
    match t:
        case Top():
            return True
        case Basic("Int"):
            return isinstance(v, IntV)
        case Basic("Bool"):
            return isinstance(v, BoolV)
        case Basic("String"):
            return isinstance(v, StringV)
        case Basic("Unit"):
            return isinstance(v, UnitV)
        case Basic("Bytes"):
            return isinstance(v, BytesV)
        case ListT(elem):
            if isinstance(v, NilV):
                return True
            if isinstance(v, Cons):
                return _member_norm(v.head, elem, budget) and _member_norm(
                    v.tail, t, budget
                )
            return False
        case RecordT(fields):
            if not isinstance(v, Record):
                return False
            have = v.field_map()
            # extra value fields are permitted
            return all(
                lbl in have and _member_norm(have[lbl], ft, budget)
                for lbl, ft in fields
            )
        case ServerRefT(a, b, c):
            return (
                isinstance(v, AddrV)
                and types_alpha_eq(v.matches, a)
                and types_alpha_eq(v.actions, b)
                and types_alpha_eq(v.params, c)
            )
        case ChanT(a, b, c):
            return (
                isinstance(v, ChannelV)
                and types_alpha_eq(v.matches, a)
                and types_alpha_eq(v.actions, b)
                and types_alpha_eq(v.params, c)
            )
        case SingletonT(w):
            return ground_values_eq(v, w)
        case UnionT(_, _):
            return any(_member_norm(v, m, budget) for m in union_members(t))
        case _:
            # type variables, arrows, quantified types, and residual
            # match/application types have no ground members
            return False


# ---------------------------------------------------------------------------
# Subtyping


def subtype(env: TypingEnv, t1: Type, t2: Type, fuel: int = DEFAULT_FUEL) -> bool:
    budget = _Budget(fuel)
    # Compare match types covariantly before normalizing: reduction can
    # turn the left side into a bare continuation type that no longer
    # relates to a residual match type on the right.
    if isinstance(t1, MatchT) and isinstance(t2, MatchT):
        if _match_covariant(env, t1, t2, budget):
            return True
    return _subtype_norm(
        env, _normalize(env, t1, budget), _normalize(env, t2, budget), budget
    )


def _match_covariant(env: TypingEnv, t1: MatchT, t2: MatchT, budget: _Budget) -> bool:
    if len(t1.cases) != len(t2.cases):
        return False
    if not all(
        types_alpha_eq(p1, p2) for (p1, _), (p2, _) in zip(t1.cases, t2.cases)
    ):
        return False
    if not _subtype_norm(
        env,
        _normalize(env, t1.scrutinee, budget),
        _normalize(env, t2.scrutinee, budget),
        budget,
    ):
        return False
    return all(
        _subtype_norm(
            env, _normalize(env, k1, budget), _normalize(env, k2, budget), budget
        )
        for (_, k1), (_, k2) in zip(t1.cases, t2.cases)
    )


def _subtype_norm(env: TypingEnv, t1: Type, t2: Type, budget: _Budget) -> bool:
    """Both arguments must already be normal."""
    if types_alpha_eq(t1, t2):
        return True
    if isinstance(t2, Top):
        return True
    if isinstance(t1, SingletonT):
        return _member_norm(t1.value, t2, budget)
    if isinstance(t1, UnionT):
        return all(
            _subtype_norm(env, m, t2, budget) for m in union_members(t1)
        )
    if isinstance(t2, UnionT):
        return any(
            _subtype_norm(env, t1, m, budget) for m in union_members(t2)
        )
    if isinstance(t1, TVar):
        bound = env.lookup_tvar(t1.name)
        if bound is None:
            return False
        return _subtype_norm(env, _normalize(env, bound, budget), t2, budget)
    match t1, t2:
        case (ListT(e1), ListT(e2)):
            return _subtype_norm(env, e1, e2, budget)
        case (RecordT(f1), RecordT(f2)):
            if set(l for l, _ in f1) != set(l for l, _ in f2):
                return False
            m1 = dict(f1)
            return all(_subtype_norm(env, m1[l], ft, budget) for l, ft in f2)
        case (ArrowT(p1, r1), ArrowT(p2, r2)):
            return _subtype_norm(env, p2, p1, budget) and _subtype_norm(
                env, r1, r2, budget
            )
        case (Forall(x1, b1, body1), Forall(x2, b2, body2)):
            if not _subtype_norm(env, b2, b1, budget):
                return False
            fresh = fresh_name(x1, env.names() | {x1, x2})
            inner = env.extend_tvar(fresh, b2)
            nb1 = _normalize(inner, subst_type_in_type(body1, x1, TVar(fresh)), budget)
            nb2 = _normalize(inner, subst_type_in_type(body2, x2, TVar(fresh)), budget)
            return _subtype_norm(inner, nb1, nb2, budget)
        case (MatchT(s1, c1), MatchT(s2, c2)):
            # residual match types are covariant in scrutinee and
            # continuations, with identical patterns
            if len(c1) != len(c2):
                return False
            if not all(types_alpha_eq(p1, p2) for (p1, _), (p2, _) in zip(c1, c2)):
                return False
            if not _subtype_norm(env, s1, s2, budget):
                return False
            return all(
                _subtype_norm(env, k1, k2, budget)
                for (_, k1), (_, k2) in zip(c1, c2)
            )
        case _:
            return False


# ---------------------------------------------------------------------------
# Disjointness (conservative)


def disjoint(env: TypingEnv, t1: Type, t2: Type, fuel: int = DEFAULT_FUEL) -> bool:
    """True only when t1 and t2 provably share no subtype."""
    budget = _Budget(fuel)
    return _disjoint_norm(
        env, _normalize(env, t1, budget), _normalize(env, t2, budget), budget
    )


_INCOMPATIBLE_HEADS = (Basic, RecordT, ListT, ArrowT, ChanT, ServerRefT)


def _disjoint_norm(env: TypingEnv, t1: Type, t2: Type, budget: _Budget) -> bool:
    """Both arguments must already be normal."""
    for t in (t1, t2):
        if isinstance(t, (TVar, MatchT, TypeApp, Top, Forall)):
            return False
    if isinstance(t1, UnionT):
        return all(
            _disjoint_norm(env, m, t2, budget) for m in union_members(t1)
        )
    if isinstance(t2, UnionT):
        return all(
            _disjoint_norm(env, t1, m, budget) for m in union_members(t2)
        )
    if isinstance(t1, SingletonT):
        return not _member_norm(t1.value, t2, budget)
    if isinstance(t2, SingletonT):
        return not _member_norm(t2.value, t1, budget)
    if isinstance(t1, Basic) and isinstance(t2, Basic):
        return t1.name != t2.name
    if isinstance(t1, _INCOMPATIBLE_HEADS) and isinstance(t2, _INCOMPATIBLE_HEADS):
        if type(t1) is not type(t2):
            return True
        if isinstance(t1, RecordT) and isinstance(t2, RecordT):
            m2 = t2.field_map()
            return any(
                lbl in m2 and _disjoint_norm(env, ft, m2[lbl], budget)
                for lbl, ft in t1.fields
            )
        # same-shaped lists, arrows, channels, and server references always
        # share subtypes (e.g. nil inhabits every list type)
        return False
    return False


# ---------------------------------------------------------------------------
# Type validity


def type_valid(env: TypingEnv, t: Type, fuel: int = DEFAULT_FUEL) -> bool:
    """Derivability of "t is a valid type in env" (env assumed valid)."""
    try:
        budget = _Budget(fuel)
        return _type_valid(env, t, budget)
    except TypeCheckError:
        return False


def _type_valid(env: TypingEnv, t: Type, budget: _Budget) -> bool:
    match t:
        case Top() | Basic(_) | SingletonT(_):
            return True
        case TVar(name):
            return env.lookup_tvar(name) is not None
        case ServerRefT(a, b, c) | ChanT(a, b, c):
            return all(_type_valid(env, x, budget) for x in (a, b, c))
        case RecordT(fields):
            return all(_type_valid(env, ft, budget) for _, ft in fields)
        case ListT(elem):
            return _type_valid(env, elem, budget)
        case ArrowT(p, r):
            return _type_valid(env, p, budget) and _type_valid(env, r, budget)
        case Forall(var, bound, body):
            if not _type_valid(env, bound, budget):
                return False
            if var in env.names():
                fresh = fresh_name(var, env.names())
                body = subst_type_in_type(body, var, TVar(fresh))
                var = fresh
            return _type_valid(env.extend_tvar(var, bound), body, budget)
        case TypeApp(fn, arg):
            if not (_type_valid(env, fn, budget) and _type_valid(env, arg, budget)):
                return False
            head = _normalize(env, fn, budget)
            if not isinstance(head, Forall):
                return False
            return _subtype_norm(
                env,
                _normalize(env, arg, budget),
                _normalize(env, head.bound, budget),
                budget,
            )
        case UnionT(l, r):
            return _type_valid(env, l, budget) and _type_valid(env, r, budget)
        case MatchT(s, cases):
            return _type_valid(env, s, budget) and all(
                _type_valid(env, p, budget) and _type_valid(env, c, budget)
                for p, c in cases
            )
        case _:
            return False


# ---------------------------------------------------------------------------
# Helper views used by term typing


class _EmptyList:
    """Sentinel: a list type with no known element type (from nil)."""


_EMPTY = _EmptyList()


def _elem_of_list_type(env, t: Type, budget) -> Union[Type, _EmptyList, None]:
    """Element type of a normalized list-like type, _EMPTY for bare nil,
    None when t is not list-shaped."""
    match t:
        case ListT(elem):
            return elem
        case SingletonT(NilV(annot)):
            return annot if annot is not None else _EMPTY
        case SingletonT(Cons(_, _) as v):
            items = []
            while isinstance(v, Cons):
                items.append(SingletonT(v.head))
                v = v.tail
            if not isinstance(v, NilV):
                return None
            return union_of(items)
        case UnionT(_, _):
            parts = []
            for m in union_members(t):
                e = _elem_of_list_type(env, m, budget)
                if e is None:
                    return None
                if not isinstance(e, _EmptyList):
                    parts.append(e)
            return union_of(parts) if parts else _EMPTY
        case _:
            return None


def _record_field_types(t: Type) -> Optional[dict[str, Type]]:
    """Per-label types of a normalized record-like type, else None."""
    if isinstance(t, RecordT):
        return t.field_map()
    if isinstance(t, SingletonT) and isinstance(t.value, Record):
        return {lbl: SingletonT(v) for lbl, v in t.value.fields}
    return None


def _serverref_params(t: Type) -> Optional[tuple[Type, Type, Type]]:
    if isinstance(t, ServerRefT):
        return (t.matches, t.actions, t.params)
    if isinstance(t, SingletonT) and isinstance(t.value, AddrV):
        a = t.value
        return (a.matches, a.actions, a.params)
    return None


def _chan_params(t: Type) -> Optional[tuple[Type, Type, Type]]:
    if isinstance(t, ChanT):
        return (t.matches, t.actions, t.params)
    if isinstance(t, SingletonT) and isinstance(t.value, ChannelV):
        c = t.value
        return (c.matches, c.actions, c.params)
    return None


ENTRY_LABELS = ("name", "matches", "action", "params")


def entity_record_type(
    tm: Type, ta: Type, tp: Type, name_type: Type, action_type: Type
) -> RecordT:
    """The table-entry record type instantiated at the given parameters."""
    return RecordT(
        (
            ("name", name_type),
            ("matches", TypeApp(tm, name_type)),
            ("action", action_type),
            ("params", TypeApp(tp, action_type)),
        )
    )


# ---------------------------------------------------------------------------
# Term typing


def typecheck(env: TypingEnv, t: Term, fuel: int = DEFAULT_FUEL) -> Type:
    """Synthesize the minimal type of t in env, or raise TypeCheckError."""
    if not env_valid(env):
        raise TypeCheckError(INVALID_ENV, "typing environment is not valid")
    return _type_of(env, t, fuel)


def _type_of(env: TypingEnv, t: Term, fuel: int) -> Type:
    if is_ground(t):
        return SingletonT(t)
    match t:
        case Var(name):
            ty = env.lookup_term(name)
            if ty is None:
                raise TypeCheckError(UNKNOWN_VARIABLE, f"unbound variable {name!r}")
            return ty
        case Record(fields):
            return RecordT(
                tuple((lbl, _type_of(env, v, fuel)) for lbl, v in fields)
            )
        case Cons(head, tail):
            t0 = _type_of(env, head, fuel)
            t1 = normalize_type(env, _type_of(env, tail, fuel), fuel)
            budget = _Budget(fuel)
            elem = _elem_of_list_type(env, t1, budget)
            if elem is None:
                raise TypeCheckError(
                    OP_ARG_MISMATCH,
                    "the tail of a list constructor must be a list",
                    actual=t1,
                    expected=ListT(t0),
                )
            if isinstance(elem, _EmptyList) or subtype(env, elem, t0, fuel):
                unified = t0
            elif subtype(env, t0, elem, fuel):
                unified = elem
            else:
                unified = UnionT(t0, elem)
            return ListT(unified)
        case Lambda(x, vt, body):
            if not type_valid(env, vt, fuel):
                raise TypeCheckError(
                    INVALID_TYPE, "parameter annotation is not a valid type",
                    location=x,
                )
            inner_env, body = _bind_term(env, x, vt, body)
            return ArrowT(vt, _type_of(inner_env, body, fuel))
        case TypeLambda(x, bound, body):
            if not type_valid(env, bound, fuel):
                raise TypeCheckError(
                    INVALID_TYPE, "quantifier bound is not a valid type", location=x
                )
            if x in env.names():
                nx = fresh_name(x, env.names())
                body = subst_type_in_term(body, x, TVar(nx))
                x = nx
            inner = env.extend_tvar(x, bound)
            return Forall(x, bound, _type_of(inner, body, fuel))
        case Let(x, bound, body):
            t0 = _type_of(env, bound, fuel)
            inner_env, body = _bind_term(env, x, t0, body)
            return _type_of(inner_env, body, fuel)
        case Head(arg):
            elem = _list_arg_elem(env, arg, fuel, "head")
            return option_of(elem)
        case Tail(arg):
            elem = _list_arg_elem(env, arg, fuel, "tail")
            return option_of(ListT(elem))
        case Field(rec, lbl):
            tr = normalize_type(env, _type_of(env, rec, fuel), fuel)
            fields = _record_field_types(tr)
            if fields is None:
                raise TypeCheckError(
                    OP_ARG_MISMATCH,
                    "field selection needs a record",
                    location=lbl,
                    actual=tr,
                )
            if lbl not in fields:
                raise TypeCheckError(
                    FIELD_MISSING, f"record has no field {lbl!r}", location=lbl,
                    actual=tr,
                )
            return fields[lbl]
        case App(fn, arg):
            tf = normalize_type(env, _type_of(env, fn, fuel), fuel)
            if not isinstance(tf, ArrowT):
                raise TypeCheckError(
                    OP_ARG_MISMATCH, "applied a non-function", actual=tf
                )
            ta = _type_of(env, arg, fuel)
            if not subtype(env, ta, tf.param, fuel):
                raise TypeCheckError(
                    NOT_SUBTYPE, "argument type mismatch",
                    expected=tf.param, actual=ta,
                )
            return tf.result
        case TypeAppT(fn, arg):
            tf = normalize_type(env, _type_of(env, fn, fuel), fuel)
            if not isinstance(tf, Forall):
                raise TypeCheckError(
                    OP_ARG_MISMATCH, "type-applied a term without a quantified type",
                    actual=tf,
                )
            if not type_valid(env, arg, fuel):
                raise TypeCheckError(
                    INVALID_TYPE, "type argument is not a valid type"
                )
            if not subtype(env, arg, tf.bound, fuel):
                raise TypeCheckError(
                    NOT_SUBTYPE, "type argument exceeds the quantifier bound",
                    expected=tf.bound, actual=arg,
                )
            return normalize_type(
                env, subst_type_in_type(tf.body, tf.var, arg), fuel
            )
        case Match(scrutinee, cases):
            ts = _type_of(env, scrutinee, fuel)
            result_cases = []
            for c in cases:
                if not type_valid(env, c.case_type, fuel):
                    raise TypeCheckError(
                        INVALID_TYPE, "match case annotation is not a valid type",
                        location=c.var,
                    )
                inner_env, body = _bind_term(env, c.var, c.case_type, c.body)
                result_cases.append((c.case_type, _type_of(inner_env, body, fuel)))
            patterns = union_of([p for p, _ in result_cases])
            if not subtype(env, ts, patterns, fuel):
                raise TypeCheckError(
                    NOT_EXHAUSTIVE,
                    "match cases do not cover the scrutinee type",
                    expected=patterns,
                    actual=ts,
                )
            return MatchT(ts, tuple(result_cases))
        case P4Op(kind, args):
            return _type_of_op(env, kind, args, fuel)
        case _:
            raise TypeCheckError(OP_ARG_MISMATCH, f"cannot type {t!r}")


def _bind_term(env: TypingEnv, x: str, ty: Type, body: Term) -> tuple[TypingEnv, Term]:
    """Extend env with x: ty, renaming x in body if the name is taken."""
    if x in env.names():
        nx = fresh_name(x, env.names() | free_term_vars(body))
        body = rename_term_var(body, x, nx)
        x = nx
    return env.extend_term(x, ty), body


def _list_arg_elem(env: TypingEnv, arg: Term, fuel: int, what: str) -> Type:
    t = normalize_type(env, _type_of(env, arg, fuel), fuel)
    elem = _elem_of_list_type(env, t, _Budget(fuel))
    if elem is None:
        raise TypeCheckError(
            OP_ARG_MISMATCH, f"{what} expects a list", actual=t
        )
    if isinstance(elem, _EmptyList):
        return TOP
    return elem


def _type_of_op(env: TypingEnv, kind: OpKind, args: tuple[Term, ...], fuel: int) -> Type:
    if kind is OpKind.CONNECT:
        tc = normalize_type(env, _type_of(env, args[0], fuel), fuel)
        params = _serverref_params(tc)
        if params is None:
            raise TypeCheckError(
                OP_ARG_MISMATCH, "Connect expects a server address", actual=tc
            )
        return ChanT(*params)
    tc = normalize_type(env, _type_of(env, args[0], fuel), fuel)
    chan = _chan_params(tc)
    if chan is None:
        raise TypeCheckError(
            OP_ARG_MISMATCH, f"{kind.value} expects a channel", actual=tc
        )
    tm, ta, tp = chan
    te = _type_of(env, args[1], fuel)
    te_norm = normalize_type(env, te, fuel)
    fields = _record_field_types(te_norm)
    if fields is None:
        raise TypeCheckError(
            OP_ARG_MISMATCH, f"{kind.value} expects a table-entry record", actual=te
        )
    for lbl in ENTRY_LABELS:
        if lbl not in fields:
            raise TypeCheckError(
                FIELD_MISSING, f"table entry lacks the {lbl!r} field", location=lbl,
                actual=te,
            )
    if isinstance(te_norm, RecordT) and set(fields) != set(ENTRY_LABELS):
        extra = sorted(set(fields) - set(ENTRY_LABELS))
        raise TypeCheckError(
            OP_ARG_MISMATCH, f"table entry has unexpected fields {extra}", actual=te
        )
    name_type = fields["name"]
    action_type = fields["action"]
    action_bound = TypeApp(ta, name_type)
    if not subtype(env, action_type, action_bound, fuel):
        raise TypeCheckError(
            NOT_SUBTYPE,
            "the action is not allowed by the entry's table",
            location="action",
            expected=normalize_type(env, action_bound, fuel),
            actual=action_type,
        )
    expected = entity_record_type(tm, ta, tp, name_type, action_type)
    if not subtype(env, te, expected, fuel):
        norm_expected = normalize_type(env, expected, fuel)
        expected_fields = _record_field_types(norm_expected) or {}
        for lbl in ENTRY_LABELS:
            want = expected_fields.get(lbl)
            if want is not None and not subtype(env, fields[lbl], want, fuel):
                raise TypeCheckError(
                    NOT_SUBTYPE,
                    "table entry does not fit the channel's configuration",
                    location=lbl,
                    expected=want,
                    actual=fields[lbl],
                )
        raise TypeCheckError(
            NOT_SUBTYPE,
            "table entry does not fit the channel's configuration",
            expected=norm_expected,
            actual=te,
        )
    if kind is OpKind.READ:
        return ListT(normalize_type(env, expected, fuel))
    return BOOL

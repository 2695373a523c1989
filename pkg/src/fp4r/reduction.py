"""Small-step evaluation of terms.

``step`` performs one deterministic leftmost step.  Internal steps are
returned as ``Tau``; the five P4Runtime operations surface as ``Request``
values whose ``resume`` function plugs the environment's response back into
the evaluation context.  Run loops that own a server (see ``network``) decide
what that response is.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .syntax import (
    AddrV,
    App,
    ChannelV,
    Cons,
    Field,
    Head,
    Lambda,
    Let,
    Match,
    NilV,
    OpKind,
    P4Op,
    Record,
    Tail,
    Term,
    Type,
    TypeAppT,
    TypeLambda,
    UnitV,
    Var,
    is_ground,
    is_value,
    subst_term,
    subst_type_in_term,
)
from .typecheck import EMPTY_ENV, TypeCheckError, member_of, normalize_type, subtype, typecheck


class StuckTermError(Exception):
    """No evaluation rule applies; a well-typed closed term never hits this."""

    def __init__(self, term: Term, reason: str):
        super().__init__(reason)
        self.term = term
        self.reason = reason


class NoMatchingCaseError(StuckTermError):
    def __init__(self, term: Term):
        super().__init__(term, "no match case admits the scrutinee value")


class EvalFuelError(Exception):
    pass


@dataclass(frozen=True)
class Done:
    value: Term


@dataclass(frozen=True)
class Tau:
    term: Term


@dataclass(frozen=True)
class Request:
    kind: OpKind
    target: Term  # server address (Connect) or channel (other operations)
    payload: Optional[Term]
    resume: Callable[[Term], Term]


PendingStep = object  # Done | Tau | Request


def _in_context(inner, wrap: Callable[[Term], Term]):
    if isinstance(inner, Tau):
        return Tau(wrap(inner.term))
    if isinstance(inner, Request):
        prev = inner.resume
        return Request(inner.kind, inner.target, inner.payload, lambda v: wrap(prev(v)))
    raise AssertionError("context around a value cannot step")


def value_in_type(v: Term, t: Type) -> bool:
    """The semantic membership test used to dispatch match cases."""
    if is_ground(v):
        return member_of(v, t)
    # Non-ground values (abstractions) fall back to typing: the minimal
    # type of the value must fit the case type.
    try:
        return subtype(EMPTY_ENV, typecheck(EMPTY_ENV, v), t)
    except TypeCheckError:
        return False


def step(t: Term) -> PendingStep:
    """One step of the term transition relation."""
    if is_value(t):
        return Done(t)
    match t:
        case Var(name):
            raise StuckTermError(t, f"free variable {name!r}")
        case Cons(h, tl):
            if not is_value(h):
                return _in_context(step(h), lambda x: Cons(x, tl))
            return _in_context(step(tl), lambda x: Cons(h, x))
        case Head(a):
            if not is_value(a):
                return _in_context(step(a), Head)
            if isinstance(a, Cons):
                return Tau(Record((("some", a.head),)))
            if isinstance(a, NilV):
                return Tau(Record((("none", UnitV()),)))
            raise StuckTermError(t, "head of a non-list value")
        case Tail(a):
            if not is_value(a):
                return _in_context(step(a), Tail)
            if isinstance(a, Cons):
                return Tau(Record((("some", a.tail),)))
            if isinstance(a, NilV):
                return Tau(Record((("none", UnitV()),)))
            raise StuckTermError(t, "tail of a non-list value")
        case Record(fields):
            for i, (lbl, v) in enumerate(fields):
                if not is_value(v):
                    before, after = fields[:i], fields[i + 1 :]

                    def rebuild(x, before=before, after=after, lbl=lbl):
                        return Record(before + ((lbl, x),) + after)

                    return _in_context(step(v), rebuild)
            raise AssertionError("record of values is a value")
        case Field(r, lbl):
            if not is_value(r):
                return _in_context(step(r), lambda x: Field(x, lbl))
            if isinstance(r, Record):
                fields = r.field_map()
                if lbl in fields:
                    return Tau(fields[lbl])
                raise StuckTermError(t, f"record lacks field {lbl!r}")
            raise StuckTermError(t, "field selection on a non-record value")
        case App(f, a):
            if not is_value(f):
                return _in_context(step(f), lambda x: App(x, a))
            if not is_value(a):
                return _in_context(step(a), lambda x: App(f, x))
            if isinstance(f, Lambda):
                return Tau(subst_term(f.body, f.var, a))
            raise StuckTermError(t, "application of a non-function value")
        case TypeAppT(f, ty):
            if not is_value(f):
                return _in_context(step(f), lambda x: TypeAppT(x, ty))
            if isinstance(f, TypeLambda):
                return Tau(subst_type_in_term(f.body, f.var, ty))
            raise StuckTermError(t, "type application of a non-abstraction value")
        case Let(x, bound, body):
            if not is_value(bound):
                return _in_context(step(bound), lambda b: Let(x, b, body))
            return Tau(subst_term(body, x, bound))
        case Match(s, cases):
            if not is_value(s):
                return _in_context(step(s), lambda x: Match(x, cases))
            for c in cases:
                if value_in_type(s, normalize_type(EMPTY_ENV, c.case_type)):
                    return Tau(subst_term(c.body, c.var, s))
            raise NoMatchingCaseError(t)
        case P4Op(kind, args):
            for i, a in enumerate(args):
                if not is_value(a):
                    before, after = args[:i], args[i + 1 :]

                    def rebuild(x, before=before, after=after, kind=kind):
                        return P4Op(kind, before + (x,) + after)

                    return _in_context(step(a), rebuild)
            target = args[0]
            if kind is OpKind.CONNECT and not isinstance(target, AddrV):
                raise StuckTermError(t, "Connect needs a server address value")
            if kind is not OpKind.CONNECT and not isinstance(target, ChannelV):
                raise StuckTermError(t, f"{kind.value} needs a channel value")
            payload = args[1] if len(args) > 1 else None
            return Request(kind, target, payload, lambda v: v)
        case _:
            raise StuckTermError(t, "no rule applies")


def run_tau(t: Term, fuel: int = 10_000) -> Term:
    """Exhaust internal steps; stops at a value or at a pending operation."""
    for _ in range(fuel):
        r = step(t)
        if isinstance(r, Tau):
            t = r.term
            continue
        return t
    if isinstance(step(t), Tau):
        raise EvalFuelError(f"no value after {fuel} internal steps")
    return t

"""Hypothesis strategies for parseable terms and types."""

from hypothesis import strategies as st

from fp4r.syntax import (
    App,
    ArrowT,
    Basic,
    BoolV,
    BytesV,
    ChanT,
    Cons,
    Field,
    Forall,
    Head,
    IntV,
    Lambda,
    Let,
    ListT,
    Match,
    MatchCase,
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
    TOP,
    TVar,
    TypeAppT,
    TypeLambda,
    UnionT,
    UnitV,
    Var,
)

term_vars = st.sampled_from(["x", "y", "z", "acc", "out"])
type_vars = st.sampled_from(["X", "Y", "Z", "Elem"])
labels = st.sampled_from(["a", "b", "c", "hdr.ipv4.dst", "value"])
strings = st.sampled_from(["", "a", "IPv4_table", "*", 'quo"te', "line\nbreak"])


def _distinct_fields(pairs):
    seen = set()
    out = []
    for lbl, v in pairs:
        if lbl not in seen:
            seen.add(lbl)
            out.append((lbl, v))
    return tuple(out)


ground_scalars = st.one_of(
    st.builds(IntV, st.integers(min_value=-3, max_value=99)),
    st.builds(BoolV, st.booleans()),
    st.builds(StringV, strings),
    st.builds(BytesV, st.lists(st.integers(0, 255), max_size=3).map(tuple)),
    st.just(UnitV()),
)


def ground_values(max_depth: int = 2):
    return st.recursive(
        ground_scalars | st.just(NilV(None)),
        lambda inner: st.one_of(
            st.tuples(inner, st.lists(inner, max_size=2)).map(
                lambda hv: _cons_list(hv[0], hv[1])
            ),
            st.lists(st.tuples(labels, inner), min_size=1, max_size=3).map(
                lambda ps: Record(_distinct_fields(ps))
            ),
        ),
        max_leaves=6,
    )


def _cons_list(head, rest):
    out = NilV(None)
    for item in reversed(rest):
        out = Cons(item, out)
    return Cons(head, out)


types = st.deferred(
    lambda: st.one_of(
        st.sampled_from([Basic(n) for n in ("Int", "Bool", "String", "Unit", "Bytes")]),
        st.just(TOP),
        st.builds(TVar, type_vars),
        st.builds(SingletonT, ground_values()),
        st.builds(ListT, types),
        st.lists(st.tuples(labels, types), min_size=1, max_size=3).map(
            lambda ps: RecordT(_distinct_fields(ps))
        ),
        st.builds(ArrowT, types, types),
        st.builds(UnionT, types, types),
        st.builds(Forall, type_vars, types, types),
        st.builds(ServerRefT, types, types, types),
        st.builds(ChanT, types, types, types),
        st.builds(
            MatchT,
            types,
            st.lists(st.tuples(types, types), min_size=1, max_size=3).map(tuple),
        ),
        st.builds(_tapp, types, types),
    )
)


def _tapp(fn, arg):
    from fp4r.syntax import TypeApp

    return TypeApp(fn, arg)


# Terms meant for parser round-trips: every nil carries an annotation.
annotated_nil = st.builds(NilV, types)

term_leaves = st.one_of(
    ground_scalars,
    annotated_nil,
    st.builds(Var, term_vars),
)


def _match_term(scrutinee, cases):
    distinct = []
    for var, ty, body in cases:
        distinct.append(MatchCase(var, ty, body))
    return Match(scrutinee, tuple(distinct))


terms = st.deferred(
    lambda: st.one_of(
        term_leaves,
        st.builds(Cons, terms, terms),
        st.builds(Head, terms),
        st.builds(Tail, terms),
        st.lists(st.tuples(labels, terms), min_size=1, max_size=3).map(
            lambda ps: Record(_distinct_fields(ps))
        ),
        st.builds(Field, terms, labels),
        st.builds(App, terms, terms),
        st.builds(TypeAppT, terms, types),
        st.builds(Lambda, term_vars, types, terms),
        st.builds(TypeLambda, type_vars, types, terms),
        st.builds(Let, term_vars, terms, terms),
        st.builds(
            _match_term,
            terms,
            st.lists(st.tuples(term_vars, types, terms), min_size=1, max_size=2),
        ),
        st.builds(lambda a: P4Op(OpKind.CONNECT, (a,)), terms),
        st.builds(
            lambda kind, a, b: P4Op(kind, (a, b)),
            st.sampled_from([OpKind.READ, OpKind.INSERT, OpKind.MODIFY, OpKind.DELETE]),
            terms,
            terms,
        ),
    )
)

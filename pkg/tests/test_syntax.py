import pytest
from hypothesis import given, settings

import strategies as sx
from fp4r.syntax import (
    App,
    BoolV,
    BytesV,
    Cons,
    Field,
    Head,
    IntV,
    Lambda,
    Let,
    ListT,
    Match,
    MatchCase,
    NilV,
    OpKind,
    P4Op,
    Record,
    SingletonT,
    StringV,
    SyntaxInvariantError,
    Tail,
    TypeLambda,
    TVar,
    UnitV,
    Var,
    free_term_vars,
    ground_values_eq,
    is_ground,
    is_value,
    subst_term,
    subst_type_in_term,
    subst_type_in_type,
    types_alpha_eq,
    INT,
    BOOL,
    TOP,
    Forall,
    TypeApp,
    UnionT,
    MatchT,
)


class TestInvariants:
    def test_duplicate_record_labels_rejected(self):
        with pytest.raises(SyntaxInvariantError):
            Record((("a", IntV(1)), ("a", IntV(2))))

    def test_byte_range_checked(self):
        with pytest.raises(SyntaxInvariantError):
            BytesV((300,))

    def test_op_arity(self):
        with pytest.raises(SyntaxInvariantError):
            P4Op(OpKind.CONNECT, (Var("a"), Var("b")))
        with pytest.raises(SyntaxInvariantError):
            P4Op(OpKind.INSERT, (Var("a"),))

    def test_match_nonempty(self):
        with pytest.raises(SyntaxInvariantError):
            Match(Var("x"), ())

    def test_singleton_rejects_non_ground(self):
        with pytest.raises(SyntaxInvariantError):
            SingletonT(Lambda("x", INT, Var("x")))

    def test_nil_annotation_ignored_in_equality(self):
        assert NilV(INT) == NilV(BOOL) == NilV(None)


class TestPredicates:
    def test_lambda_is_value_not_ground(self):
        lam = Lambda("x", INT, Var("x"))
        assert is_value(lam) and not is_ground(lam)

    def test_record_of_values(self):
        r = Record((("a", IntV(1)), ("b", lambda_id())))
        assert is_value(r) and not is_ground(r)

    def test_ground_composites(self):
        v = Cons(IntV(1), Cons(Record((("a", UnitV()),)), NilV(None)))
        assert is_ground(v)

    def test_non_value(self):
        assert not is_value(Head(NilV(None)))


def lambda_id():
    return Lambda("x", INT, Var("x"))


class TestSubstitution:
    def test_variable_hit(self):
        assert subst_term(Var("x"), "x", IntV(42)) == IntV(42)

    def test_shadowing_lambda_unchanged(self):
        lam = Lambda("y", INT, Var("y"))
        assert subst_term(lam, "y", IntV(1)) == lam

    def test_match_scrutinee_substituted(self):
        t = Match(Var("x"), (MatchCase("z", INT, Var("z")),))
        out = subst_term(t, "x", IntV(5))
        assert out == Match(IntV(5), (MatchCase("z", INT, Var("z")),))

    def test_type_subst_rewrites_annotations(self):
        lam = Lambda("x", TVar("X"), Var("x"))
        assert subst_type_in_term(lam, "X", INT) == Lambda("x", INT, Var("x"))

    def test_type_subst_leaves_values(self):
        assert subst_type_in_term(IntV(7), "X", INT) == IntV(7)

    def test_type_app_argument_substituted(self):
        from fp4r.syntax import TypeAppT

        t = TypeAppT(Var("t"), TVar("X"))
        assert subst_type_in_term(t, "X", INT) == TypeAppT(Var("t"), INT)

    def test_tvar_hit_and_miss(self):
        assert subst_type_in_type(TVar("X"), "X", INT) == INT
        assert subst_type_in_type(TVar("Y"), "X", INT) == TVar("Y")

    def test_singleton_type_untouched(self):
        s = SingletonT(IntV(42))
        assert subst_type_in_type(s, "X", INT) == s

    def test_match_type_substituted_everywhere(self):
        t = MatchT(TVar("X"), ((INT, TVar("X")),))
        assert subst_type_in_type(t, "X", BOOL) == MatchT(BOOL, ((INT, BOOL),))

    def test_capture_avoided_under_quantifier(self):
        # substituting a type mentioning Y below a binder for Y must rename
        inner = Forall("Y", TOP, UnionT(TVar("X"), TVar("Y")))
        out = subst_type_in_type(inner, "X", TVar("Y"))
        assert isinstance(out, Forall)
        assert out.var != "Y"
        assert out.body == UnionT(TVar("Y"), TVar(out.var))


def _oracle_subst(t, x, v):
    """Independent textbook substitution (v closed, so capture-free)."""
    match t:
        case Var(name):
            return v if name == x else t
        case Cons(h, tl):
            return Cons(_oracle_subst(h, x, v), _oracle_subst(tl, x, v))
        case Head(a):
            return Head(_oracle_subst(a, x, v))
        case Tail(a):
            return Tail(_oracle_subst(a, x, v))
        case Record(fields):
            return Record(tuple((l, _oracle_subst(w, x, v)) for l, w in fields))
        case Field(r, l):
            return Field(_oracle_subst(r, x, v), l)
        case App(f, a):
            return App(_oracle_subst(f, x, v), _oracle_subst(a, x, v))
        case Lambda(y, ty, body):
            return t if y == x else Lambda(y, ty, _oracle_subst(body, x, v))
        case TypeLambda(y, b, body):
            return TypeLambda(y, b, _oracle_subst(body, x, v))
        case Let(y, bound, body):
            nb = _oracle_subst(bound, x, v)
            return Let(y, nb, body if y == x else _oracle_subst(body, x, v))
        case Match(s, cases):
            return Match(
                _oracle_subst(s, x, v),
                tuple(
                    MatchCase(c.var, c.case_type,
                              c.body if c.var == x else _oracle_subst(c.body, x, v))
                    for c in cases
                ),
            )
        case P4Op(kind, args):
            return P4Op(kind, tuple(_oracle_subst(a, x, v) for a in args))
        case _:
            return t
    return t


class TestSubstitutionProperties:
    @settings(max_examples=200, deadline=None)
    @given(sx.terms, sx.term_vars, sx.ground_values())
    def test_matches_textbook_oracle_for_closed_values(self, t, x, v):
        assert subst_term(t, x, v) == _oracle_subst(t, x, v)

    @settings(max_examples=200, deadline=None)
    @given(sx.terms, sx.ground_values())
    def test_identity_when_variable_not_free(self, t, v):
        assert "fresh_unused" not in free_term_vars(t)
        assert subst_term(t, "fresh_unused", v) == t

    @settings(max_examples=200, deadline=None)
    @given(sx.terms, sx.ground_values(), sx.ground_values())
    def test_composition_commutes_for_distinct_vars(self, t, v, w):
        a = subst_term(subst_term(t, "x", v), "y", w)
        b = subst_term(subst_term(t, "y", w), "x", v)
        assert a == b


class TestAlphaEquality:
    def test_forall_alpha(self):
        t1 = Forall("X", TOP, TVar("X"))
        t2 = Forall("Y", TOP, TVar("Y"))
        assert types_alpha_eq(t1, t2)
        assert not types_alpha_eq(t1, Forall("Y", TOP, TVar("X")))

    def test_record_field_order_irrelevant(self):
        from fp4r.syntax import RecordT

        a = RecordT((("a", INT), ("b", BOOL)))
        b = RecordT((("b", BOOL), ("a", INT)))
        assert types_alpha_eq(a, b)

    def test_ground_value_eq_ignores_record_order(self):
        a = Record((("a", IntV(1)), ("b", BoolV(True))))
        b = Record((("b", BoolV(True)), ("a", IntV(1))))
        assert ground_values_eq(a, b)
        assert not ground_values_eq(a, Record((("a", IntV(2)), ("b", BoolV(True)))))

    def test_string_vs_bytes_distinct(self):
        assert not ground_values_eq(StringV("a"), BytesV((97,)))

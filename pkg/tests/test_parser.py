import pytest
from hypothesis import given, settings

import strategies as sx
from fp4r.parser import ParseError, parse_decls, parse_program, parse_term, parse_type
from fp4r.printer import pretty_term, pretty_type
from fp4r.syntax import (
    App,
    BOOL,
    BytesV,
    Cons,
    Forall,
    Head,
    INT,
    IntV,
    Lambda,
    Let,
    ListT,
    Match,
    NilV,
    OpKind,
    P4Op,
    Record,
    RecordT,
    SingletonT,
    StringV,
    TOP,
    TVar,
    TypeApp,
    UNIT,
    UnionT,
    UnitV,
    Var,
    option_type,
    p4_entity_type,
    table_entry_type,
)


class TestTermGrammar:
    def test_let_with_operations(self):
        t = parse_term("let x = Connect(a) in Insert(x, e)")
        assert t == Let(
            "x",
            P4Op(OpKind.CONNECT, (Var("a"),)),
            P4Op(OpKind.INSERT, (Var("x"), Var("e"))),
        )

    def test_cons_is_right_associative(self):
        t = parse_term("1 :: 2 :: nil[Int]")
        assert t == Cons(IntV(1), Cons(IntV(2), NilV(INT)))

    def test_application_is_left_associative(self):
        assert parse_term("f x y") == App(App(Var("f"), Var("x")), Var("y"))

    def test_head_binds_tighter_than_cons(self):
        t = parse_term("head (1 :: nil[Int])")
        assert t == Head(Cons(IntV(1), NilV(INT)))

    def test_match_postfix_on_cons(self):
        t = parse_term("1 :: nil[Int] match {x: [Int] => x}")
        assert isinstance(t, Match) and isinstance(t.scrutinee, Cons)

    def test_field_selection_chain(self):
        t = parse_term('r.a."dotted.label"')
        assert t.label == "dotted.label"

    def test_bytes_literal(self):
        assert parse_term("b(10, 0, 1, 1)") == BytesV((10, 0, 1, 1))
        assert parse_term("b()") == BytesV(())

    def test_byte_out_of_range(self):
        with pytest.raises(ParseError):
            parse_term("b(256)")

    def test_entry_sugar_expands_to_labels(self):
        t = parse_term('{"T", "*", "drop", ()}')
        assert t == Record(
            (
                ("name", StringV("T")),
                ("matches", StringV("*")),
                ("action", StringV("drop")),
                ("params", UnitV()),
            )
        )

    def test_entry_sugar_wrong_arity(self):
        with pytest.raises(ParseError):
            parse_term("{1, 2, 3}")

    def test_duplicate_record_label(self):
        with pytest.raises(ParseError) as err:
            parse_term('{name = "a", name = "b"}')
        assert "duplicate" in str(err.value)

    def test_empty_match_rejected(self):
        with pytest.raises(ParseError):
            parse_term("x match {}")

    def test_error_carries_position(self):
        with pytest.raises(ParseError) as err:
            parse_term("let x = in x")
        assert err.value.line == 1 and err.value.col > 0

    def test_unknown_address(self):
        with pytest.raises(ParseError):
            parse_term("Connect(@nowhere)")

    def test_known_address_resolves(self):
        t = parse_term("Connect(@sw)", addresses={"sw": (TOP, TOP, TOP)})
        addr = t.args[0]
        assert addr.name == "sw" and addr.matches == TOP

    def test_nil_requires_annotation(self):
        with pytest.raises(ParseError):
            parse_term("nil")

    def test_lambda_and_type_lambda(self):
        t = parse_term("fun(x: Int) x")
        assert t == Lambda("x", INT, Var("x"))
        t2 = parse_term("Fun(X <: Top) fun(x: X) x")
        assert t2.var == "X" and t2.body == Lambda("x", TVar("X"), Var("x"))

    def test_term_type_application_brackets(self):
        t = parse_term("f[Int]")
        assert t.arg == INT

    def test_comments_skipped(self):
        assert parse_term("# say hi\n42 # trailing") == IntV(42)


class TestTypeGrammar:
    def test_singleton_string(self):
        assert parse_type('\'"IPv4_table"') == SingletonT(StringV("IPv4_table"))

    def test_singleton_composites(self):
        assert parse_type("'(1 :: nil)") == SingletonT(Cons(IntV(1), NilV(None)))
        assert parse_type("'{a = 1}") == SingletonT(Record((("a", IntV(1)),)))

    def test_union_left_associative(self):
        t = parse_type("Int | Bool | Unit")
        assert t == UnionT(UnionT(INT, BOOL), UNIT)

    def test_arrow_right_associative(self):
        t = parse_type("Int -> Bool -> Unit")
        assert t.result.param == BOOL

    def test_match_type(self):
        t = parse_type("X match {Int => Bool, String => Unit}")
        assert t.scrutinee == TVar("X") and len(t.cases) == 2

    def test_quantifier_sugar(self):
        assert parse_type("All(X) X") == Forall("X", TOP, TVar("X"))
        assert parse_type("All(X <: Int) X") == Forall("X", INT, TVar("X"))

    def test_application_juxtaposition(self):
        t = parse_type('Tm \'"IPv4_table"')
        assert t == TypeApp(TVar("Tm"), SingletonT(StringV("IPv4_table")))

    def test_builtin_abbreviations_expand(self):
        assert parse_type("Option") == option_type()
        assert parse_type("TableEntry") == table_entry_type()
        assert parse_type("P4Entity") == p4_entity_type()

    def test_sugar_round_trips_through_printer(self):
        for builder in (option_type, table_entry_type, p4_entity_type):
            t = builder()
            assert parse_type(pretty_type(t)) == t

    def test_duplicate_type_record_label(self):
        with pytest.raises(ParseError):
            parse_type("{a: Int, a: Bool}")

    def test_list_and_chan(self):
        t = parse_type("[Chan[Int, Bool, Unit]]")
        assert isinstance(t, ListT)


class TestDeclarations:
    def test_program_prelude(self):
        decls, term = parse_program("type T = Int\ntype U = T | Bool\n42")
        assert decls["U"] == UnionT(INT, BOOL)
        assert term == IntV(42)

    def test_alias_used_in_annotations(self):
        _, term = parse_program("type T = Int\nfun(x: T) x")
        assert term == Lambda("x", INT, Var("x"))

    def test_bound_variable_shadows_alias(self):
        _, term = parse_program("type X = Int\nFun(X <: Top) fun(y: X) y")
        assert term.body.var_type == TVar("X")

    def test_decls_file(self):
        d = parse_decls("type A = Int\ntype B = [A]\n")
        assert d["B"] == ListT(INT)

    def test_duplicate_alias_rejected(self):
        with pytest.raises(ParseError):
            parse_decls("type A = Int\ntype A = Bool\n")


class TestRoundTrip:
    @settings(max_examples=300, deadline=None)
    @given(sx.terms)
    def test_terms_round_trip(self, t):
        assert parse_term(pretty_term(t)) == t

    @settings(max_examples=300, deadline=None)
    @given(sx.types)
    def test_types_round_trip(self, ty):
        assert parse_type(pretty_type(ty)) == ty

"""Parser for the fp4r surface syntax.

Grammar sketch (terms, loosest binding first)::

    program := ("type" NAME "=" type)* term
    term    := "fun" "(" x ":" type ")" term
             | "Fun" "(" X "<:" type ")" term
             | "let" x "=" term "in" term
             | matchexp
    matchexp:= cons ("match" "{" x ":" type "=>" term ("," ...)* "}")*
    cons    := unary ("::" cons)?
    unary   := ("head" | "tail") unary | app
    app     := prim (prim | "[" type "]")*
    prim    := atom ("." label)*
    atom    := INT | STRING | "true" | "false" | "()" | "b(" INT,... ")"
             | "nil" "[" type "]" | "@" NAME | x
             | Connect/Read/Insert/Modify/Delete "(" term,... ")"
             | "{" fields "}" | "(" term ")"

Record literals are written ``{f = t, ...}``; a record of exactly four
unlabeled terms ``{t1, t2, t3, t4}`` is sugar for a table entry
``{name = t1, matches = t2, action = t3, params = t4}``.

Types::

    type    := "All" "(" X ("<:" type)? ")" type | arrow
    arrow   := union ("->" arrow)?
    union   := tmatch ("|" tmatch)*
    tmatch  := tapp ("match" "{" type "=>" type ("," ...)* "}")*
    tapp    := tatom tatom*
    tatom   := Int | Bool | String | Unit | Bytes | Top
             | ServerRef "[" T "," T "," T "]" | Chan "[" T "," T "," T "]"
             | "[" type "]" | "{" f ":" type "," ... "}"
             | "'" ground-literal | Option | TableEntry | P4Entity
             | NAME | "(" type ")"

Server addresses are written ``@name`` and resolve against a caller-supplied
table of address names to their three channel type parameters.  Labels are
bare identifiers or quoted strings (for names such as ``"hdr.ipv4.dstAddr"``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .syntax import (
    TOP,
    AddrV,
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
    MatchCase,
    MatchT,
    NilV,
    OpKind,
    P4Op,
    App,
    Record,
    RecordT,
    ServerRefT,
    SingletonT,
    StringV,
    SyntaxInvariantError,
    Tail,
    Term,
    TVar,
    Type,
    TypeApp,
    TypeAppT,
    TypeLambda,
    UnionT,
    UnitV,
    Var,
    is_ground,
    option_type,
    p4_entity_type,
    table_entry_type,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


KEYWORDS = {
    "fun", "Fun", "let", "in", "match", "head", "tail", "nil", "true",
    "false", "type", "All", "Top", "Int", "Bool", "String", "Unit", "Bytes",
    "ServerRef", "Chan", "Option", "TableEntry", "P4Entity",
    "Connect", "Read", "Insert", "Modify", "Delete",
}

OP_KEYWORDS = {k.value: k for k in OpKind}

_PUNCT = (
    "<:", "::", "=>", "->", "(", ")", "{", "}", "[", "]",
    ",", ":", "=", ".", "|", "'", "@", "$",
)


@dataclass
class Token:
    kind: str  # INT, STRING, IDENT, KEYWORD, PUNCT, BYTES_OPEN, EOF
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(src)

    def error(msg: str):
        raise ParseError(msg, line, col)

    while i < n:
        c = src[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":  # comment to end of line
            while i < n and src[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if c.isdigit() or (c == "-" and i + 1 < n and src[i + 1].isdigit()):
            j = i + 1
            while j < n and src[j].isdigit():
                j += 1
            tokens.append(Token("INT", src[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if c == '"':
            j = i + 1
            out = []
            while j < n and src[j] != '"':
                if src[j] == "\\":
                    if j + 1 >= n:
                        error("unterminated string escape")
                    esc = src[j + 1]
                    out.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc))
                    if out[-1] is None:
                        error(f"bad string escape \\{esc}")
                    j += 2
                else:
                    if src[j] == "\n":
                        error("unterminated string literal")
                    out.append(src[j])
                    j += 1
            if j >= n:
                error("unterminated string literal")
            tokens.append(Token("STRING", "".join(out), start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if c.isalpha() or c == "_":
            j = i + 1
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            word = src[i:j]
            if word == "b" and j < n and src[j] == "(":
                tokens.append(Token("BYTES_OPEN", "b(", start_line, start_col))
                j += 1
            else:
                kind = "KEYWORD" if word in KEYWORDS else "IDENT"
                tokens.append(Token(kind, word, start_line, start_col))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if src.startswith(p, i):
                tokens.append(Token("PUNCT", p, start_line, start_col))
                i += len(p)
                col += len(p)
                break
        else:
            error(f"unexpected character {c!r}")
    tokens.append(Token("EOF", "", line, col))
    return tokens


TypeTriple = tuple[Type, Type, Type]


class Parser:
    def __init__(
        self,
        src: str,
        addresses: Optional[dict[str, TypeTriple]] = None,
        aliases: Optional[dict[str, Type]] = None,
        channels: Optional[dict[str, TypeTriple]] = None,
    ):
        self.tokens = tokenize(src)
        self.pos = 0
        self.addresses = addresses or {}
        self.channels = channels or {}
        self.aliases = dict(aliases or {})
        self.bound_tvars: list[str] = []

    # -- token helpers

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def error(self, msg: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.line, tok.col)

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            raise self.error(f"expected {want!r}, found {tok.text or tok.kind!r}")
        return self.next()

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[Token]:
        if self.at(kind, text):
            return self.next()
        return None

    # -- declarations

    def parse_decls_prefix(self) -> dict[str, Type]:
        decls: dict[str, Type] = {}
        while self.at("KEYWORD", "type"):
            self.next()
            name_tok = self.expect("IDENT")
            name = name_tok.text
            if not name[0].isupper():
                self.error("type alias names must start uppercase", name_tok)
            if name in decls:
                self.error(f"duplicate type alias {name!r}", name_tok)
            self.expect("PUNCT", "=")
            decls[name] = self.parse_type_expr()
            self.aliases[name] = decls[name]
        return decls

    # -- terms

    def parse_term_expr(self) -> Term:
        if self.at("KEYWORD", "fun"):
            self.next()
            self.expect("PUNCT", "(")
            var = self.term_var_name()
            self.expect("PUNCT", ":")
            vt = self.parse_type_expr()
            self.expect("PUNCT", ")")
            return Lambda(var, vt, self.parse_term_expr())
        if self.at("KEYWORD", "Fun"):
            self.next()
            self.expect("PUNCT", "(")
            var = self.type_var_name()
            self.expect("PUNCT", "<:")
            bound = self.parse_type_expr()
            self.expect("PUNCT", ")")
            self.bound_tvars.append(var)
            try:
                body = self.parse_term_expr()
            finally:
                self.bound_tvars.pop()
            return TypeLambda(var, bound, body)
        if self.at("KEYWORD", "let"):
            self.next()
            var = self.term_var_name()
            self.expect("PUNCT", "=")
            bound = self.parse_term_expr()
            self.expect("KEYWORD", "in")
            return Let(var, bound, self.parse_term_expr())
        return self.parse_match_term()

    def parse_match_term(self) -> Term:
        t = self.parse_cons()
        while self.at("KEYWORD", "match"):
            open_tok = self.next()
            self.expect("PUNCT", "{")
            cases: list[MatchCase] = []
            while not self.at("PUNCT", "}"):
                var = self.term_var_name()
                self.expect("PUNCT", ":")
                ct = self.parse_type_expr()
                self.expect("PUNCT", "=>")
                body = self.parse_term_expr()
                cases.append(MatchCase(var, ct, body))
                if not self.accept("PUNCT", ","):
                    break
            self.expect("PUNCT", "}")
            if not cases:
                self.error("match needs at least one case", open_tok)
            t = Match(t, tuple(cases))
        return t

    def parse_cons(self) -> Term:
        t = self.parse_unary()
        if self.accept("PUNCT", "::"):
            return Cons(t, self.parse_cons())
        return t

    def parse_unary(self) -> Term:
        if self.at("KEYWORD", "head"):
            self.next()
            return Head(self.parse_unary())
        if self.at("KEYWORD", "tail"):
            self.next()
            return Tail(self.parse_unary())
        return self.parse_app()

    def parse_app(self) -> Term:
        t = self.parse_prim()
        while True:
            if self.at("PUNCT", "["):
                self.next()
                ty = self.parse_type_expr()
                self.expect("PUNCT", "]")
                t = TypeAppT(t, ty)
            elif self._at_prim_start():
                t = App(t, self.parse_prim())
            else:
                return t

    def _at_prim_start(self) -> bool:
        tok = self.peek()
        if tok.kind in ("INT", "STRING", "IDENT", "BYTES_OPEN"):
            return True
        if tok.kind == "PUNCT" and tok.text in ("(", "{", "@", "$"):
            return True
        if tok.kind == "KEYWORD" and tok.text in (
            "true", "false", "nil", "Connect", "Read", "Insert", "Modify", "Delete",
        ):
            return True
        return False

    def parse_prim(self) -> Term:
        t = self.parse_atom()
        while self.at("PUNCT", "."):
            self.next()
            t = Field(t, self.label_name())
        return t

    def label_name(self) -> str:
        tok = self.peek()
        if tok.kind == "IDENT":
            return self.next().text
        if tok.kind == "STRING":
            return self.next().text
        raise self.error("expected a field label")

    def term_var_name(self) -> str:
        tok = self.expect("IDENT")
        if tok.text[0].isupper():
            self.error("term variables must start lowercase", tok)
        return tok.text

    def type_var_name(self) -> str:
        tok = self.expect("IDENT")
        if not tok.text[0].isupper():
            self.error("type variables must start uppercase", tok)
        return tok.text

    def parse_atom(self) -> Term:
        tok = self.peek()
        if tok.kind == "INT":
            self.next()
            return IntV(int(tok.text))
        if tok.kind == "STRING":
            self.next()
            return StringV(tok.text)
        if tok.kind == "BYTES_OPEN":
            return self.parse_bytes()
        if tok.kind == "KEYWORD":
            if tok.text == "true":
                self.next()
                return BoolV(True)
            if tok.text == "false":
                self.next()
                return BoolV(False)
            if tok.text == "nil":
                self.next()
                self.expect("PUNCT", "[")
                ty = self.parse_type_expr()
                self.expect("PUNCT", "]")
                return NilV(ty)
            if tok.text in OP_KEYWORDS:
                self.next()
                self.expect("PUNCT", "(")
                args = [self.parse_term_expr()]
                while self.accept("PUNCT", ","):
                    args.append(self.parse_term_expr())
                self.expect("PUNCT", ")")
                try:
                    return P4Op(OP_KEYWORDS[tok.text], tuple(args))
                except SyntaxInvariantError as exc:
                    self.error(str(exc), tok)
        if tok.kind == "IDENT":
            self.next()
            if tok.text[0].isupper():
                self.error("expected a term, found a type name", tok)
            return Var(tok.text)
        if tok.kind == "PUNCT" and tok.text == "@":
            self.next()
            name_tok = self.peek()
            if name_tok.kind not in ("IDENT", "STRING", "KEYWORD"):
                self.error("expected a server address name after '@'")
            self.next()
            name = name_tok.text
            if name not in self.addresses:
                self.error(f"unknown server address @{name}", name_tok)
            tm, ta, tp = self.addresses[name]
            return AddrV(name, tm, ta, tp)
        if tok.kind == "PUNCT" and tok.text == "$":
            self.next()
            name_tok = self.peek()
            if name_tok.kind not in ("IDENT", "STRING", "KEYWORD"):
                self.error("expected a channel name after '$'")
            self.next()
            name = name_tok.text
            if name not in self.channels:
                self.error(f"unknown channel ${name}", name_tok)
            tm, ta, tp = self.channels[name]
            return ChannelV(name, tm, ta, tp)
        if tok.kind == "PUNCT" and tok.text == "(":
            self.next()
            if self.accept("PUNCT", ")"):
                return UnitV()
            t = self.parse_term_expr()
            self.expect("PUNCT", ")")
            return t
        if tok.kind == "PUNCT" and tok.text == "{":
            return self.parse_record()
        raise self.error(f"expected a term, found {tok.text or tok.kind!r}")

    def parse_bytes(self) -> Term:
        open_tok = self.expect("BYTES_OPEN")
        octets = []
        if not self.at("PUNCT", ")"):
            while True:
                num = self.expect("INT")
                octets.append(int(num.text))
                if not int(num.text) in range(256):
                    self.error("byte out of range 0..255", num)
                if not self.accept("PUNCT", ","):
                    break
        self.expect("PUNCT", ")")
        try:
            return BytesV(tuple(octets))
        except SyntaxInvariantError as exc:
            raise self.error(str(exc), open_tok)

    def parse_record(self) -> Term:
        open_tok = self.expect("PUNCT", "{")
        if self.accept("PUNCT", "}"):
            return Record(())
        # Labeled when a label is followed by '='; otherwise positional
        # table-entry sugar {name, matches, action, params}.
        labeled = (
            self.peek().kind in ("IDENT", "STRING")
            and self.peek(1).kind == "PUNCT"
            and self.peek(1).text == "="
        )
        if labeled:
            fields: list[tuple[str, Term]] = []
            while True:
                lbl_tok = self.peek()
                lbl = self.label_name()
                self.expect("PUNCT", "=")
                if any(l == lbl for l, _ in fields):
                    self.error(f"duplicate record label {lbl!r}", lbl_tok)
                fields.append((lbl, self.parse_term_expr()))
                if not self.accept("PUNCT", ","):
                    break
            self.expect("PUNCT", "}")
            return Record(tuple(fields))
        items = [self.parse_term_expr()]
        while self.accept("PUNCT", ","):
            items.append(self.parse_term_expr())
        self.expect("PUNCT", "}")
        if len(items) != 4:
            self.error(
                "positional record sugar takes exactly 4 fields "
                "(name, matches, action, params)",
                open_tok,
            )
        return Record(tuple(zip(("name", "matches", "action", "params"), items)))

    # -- types

    def parse_type_expr(self) -> Type:
        if self.at("KEYWORD", "All"):
            self.next()
            self.expect("PUNCT", "(")
            var = self.type_var_name()
            bound: Type = TOP
            if self.accept("PUNCT", "<:"):
                bound = self.parse_type_expr()
            self.expect("PUNCT", ")")
            self.bound_tvars.append(var)
            try:
                body = self.parse_type_expr()
            finally:
                self.bound_tvars.pop()
            return Forall(var, bound, body)
        return self.parse_arrow_type()

    def parse_arrow_type(self) -> Type:
        t = self.parse_union_type()
        if self.accept("PUNCT", "->"):
            return ArrowT(t, self.parse_arrow_type())
        return t

    def parse_union_type(self) -> Type:
        t = self.parse_match_type()
        while self.accept("PUNCT", "|"):
            t = UnionT(t, self.parse_match_type())
        return t

    def parse_match_type(self) -> Type:
        t = self.parse_type_app()
        while self.at("KEYWORD", "match"):
            open_tok = self.next()
            self.expect("PUNCT", "{")
            cases: list[tuple[Type, Type]] = []
            while not self.at("PUNCT", "}"):
                pat = self.parse_type_expr()
                self.expect("PUNCT", "=>")
                cont = self.parse_type_expr()
                cases.append((pat, cont))
                if not self.accept("PUNCT", ","):
                    break
            self.expect("PUNCT", "}")
            if not cases:
                self.error("match type needs at least one case", open_tok)
            t = MatchT(t, tuple(cases))
        return t

    def parse_type_app(self) -> Type:
        t = self.parse_type_atom()
        while self._at_type_atom_start():
            t = TypeApp(t, self.parse_type_atom())
        return t

    def _at_type_atom_start(self) -> bool:
        tok = self.peek()
        if tok.kind == "IDENT" and tok.text[0].isupper():
            return True
        if tok.kind == "PUNCT" and tok.text in ("(", "{", "[", "'"):
            return True
        if tok.kind == "KEYWORD" and tok.text in (
            "Int", "Bool", "String", "Unit", "Bytes", "Top",
            "ServerRef", "Chan", "Option", "TableEntry", "P4Entity",
        ):
            return True
        return False

    def parse_type_atom(self) -> Type:
        tok = self.peek()
        if tok.kind == "KEYWORD":
            if tok.text in ("Int", "Bool", "String", "Unit", "Bytes"):
                self.next()
                return Basic(tok.text)
            if tok.text == "Top":
                self.next()
                return TOP
            if tok.text in ("ServerRef", "Chan"):
                self.next()
                self.expect("PUNCT", "[")
                a = self.parse_type_expr()
                self.expect("PUNCT", ",")
                b = self.parse_type_expr()
                self.expect("PUNCT", ",")
                c = self.parse_type_expr()
                self.expect("PUNCT", "]")
                return ServerRefT(a, b, c) if tok.text == "ServerRef" else ChanT(a, b, c)
            if tok.text == "Option":
                self.next()
                return option_type()
            if tok.text == "TableEntry":
                self.next()
                return table_entry_type()
            if tok.text == "P4Entity":
                self.next()
                return p4_entity_type()
        if tok.kind == "IDENT" and tok.text[0].isupper():
            self.next()
            name = tok.text
            if name in self.bound_tvars:
                return TVar(name)
            if name in self.aliases:
                return self.aliases[name]
            return TVar(name)
        if tok.kind == "PUNCT" and tok.text == "[":
            self.next()
            elem = self.parse_type_expr()
            self.expect("PUNCT", "]")
            return ListT(elem)
        if tok.kind == "PUNCT" and tok.text == "{":
            self.next()
            fields: list[tuple[str, Type]] = []
            if not self.at("PUNCT", "}"):
                while True:
                    lbl_tok = self.peek()
                    lbl = self.label_name()
                    self.expect("PUNCT", ":")
                    if any(l == lbl for l, _ in fields):
                        self.error(f"duplicate record label {lbl!r}", lbl_tok)
                    fields.append((lbl, self.parse_type_expr()))
                    if not self.accept("PUNCT", ","):
                        break
            self.expect("PUNCT", "}")
            return RecordT(tuple(fields))
        if tok.kind == "PUNCT" and tok.text == "'":
            self.next()
            value = self.parse_ground_literal()
            return SingletonT(value)
        if tok.kind == "PUNCT" and tok.text == "(":
            self.next()
            t = self.parse_type_expr()
            self.expect("PUNCT", ")")
            return t
        raise self.error(f"expected a type, found {tok.text or tok.kind!r}")

    # -- ground-value literals (singleton type payloads)

    def parse_ground_literal(self) -> Term:
        tok = self.peek()
        if tok.kind == "INT":
            self.next()
            return IntV(int(tok.text))
        if tok.kind == "STRING":
            self.next()
            return StringV(tok.text)
        if tok.kind == "BYTES_OPEN":
            return self.parse_bytes()
        if tok.kind == "KEYWORD" and tok.text in ("true", "false"):
            self.next()
            return BoolV(tok.text == "true")
        if tok.kind == "KEYWORD" and tok.text == "nil":
            self.next()
            return NilV(None)
        if tok.kind == "PUNCT" and tok.text == "(":
            self.next()
            if self.accept("PUNCT", ")"):
                return UnitV()
            v = self.parse_ground_cons()
            self.expect("PUNCT", ")")
            return v
        if tok.kind == "PUNCT" and tok.text == "{":
            self.next()
            fields: list[tuple[str, Term]] = []
            if not self.at("PUNCT", "}"):
                while True:
                    lbl_tok = self.peek()
                    lbl = self.label_name()
                    self.expect("PUNCT", "=")
                    if any(l == lbl for l, _ in fields):
                        self.error(f"duplicate record label {lbl!r}", lbl_tok)
                    fields.append((lbl, self.parse_ground_cons()))
                    if not self.accept("PUNCT", ","):
                        break
            self.expect("PUNCT", "}")
            return Record(tuple(fields))
        if tok.kind == "PUNCT" and tok.text in ("@", "$"):
            return self.parse_atom()
        raise self.error("expected a ground value literal")

    def parse_ground_cons(self) -> Term:
        v = self.parse_ground_literal()
        if self.accept("PUNCT", "::"):
            return Cons(v, self.parse_ground_cons())
        return v


def parse_term(
    text: str,
    addresses: Optional[dict[str, TypeTriple]] = None,
    aliases: Optional[dict[str, Type]] = None,
    channels: Optional[dict[str, TypeTriple]] = None,
) -> Term:
    p = Parser(text, addresses, aliases, channels)
    t = p.parse_term_expr()
    p.expect("EOF")
    return t


def parse_type(text: str, aliases: Optional[dict[str, Type]] = None) -> Type:
    p = Parser(text, None, aliases)
    t = p.parse_type_expr()
    p.expect("EOF")
    return t


def parse_program(
    text: str,
    addresses: Optional[dict[str, TypeTriple]] = None,
    aliases: Optional[dict[str, Type]] = None,
    channels: Optional[dict[str, TypeTriple]] = None,
) -> tuple[dict[str, Type], Term]:
    """Parse an optional type-alias prelude followed by a term."""
    p = Parser(text, addresses, aliases, channels)
    decls = p.parse_decls_prefix()
    t = p.parse_term_expr()
    p.expect("EOF")
    return decls, t


def parse_decls(text: str, aliases: Optional[dict[str, Type]] = None) -> dict[str, Type]:
    """Parse a file consisting only of type alias declarations."""
    p = Parser(text, None, aliases)
    decls = p.parse_decls_prefix()
    p.expect("EOF")
    return decls

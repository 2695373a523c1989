"""Seeded random generators: configurations, conformant entities, client
programs, and whole networks.

Programs are straight-line operation sequences built well-typed by
construction; entities are drawn conformant-by-construction from their
configuration.  Everything takes an explicit ``random.Random`` so test
populations are reproducible.
"""

from __future__ import annotations

import random
from typing import Optional

from .network import Network
from .p4info import encode_config
from .server import ActionParam, Entity, MatchField, ServerConfig, ServerState, WILDCARD
from .syntax import (
    AddrV,
    BoolV,
    BytesV,
    Field,
    Head,
    IntV,
    Let,
    Match,
    MatchCase,
    NilV,
    OpKind,
    P4Op,
    Record,
    RecordT,
    StringV,
    Term,
    Type,
    UnitV,
    UNIT,
    Var,
    make_list_value,
)
from .typecheck import EMPTY_ENV, entity_record_type, normalize_type

MATCH_KINDS = ("Exact", "Ternary", "LPM", "Range", "Optional")

_TABLE_NAMES = ("acl", "routes", "nat_ingress", "firewall", "ipv4_lpm", "mirror")
_ACTION_NAMES = ("fwd", "drop", "flood", "redirect", "count_only", "set_port")
_FIELD_NAMES = ("dst_addr", "src_addr", "proto", "port", "vlan")
_PARAM_NAMES = ("port", "mac", "group", "ttl")


def random_config(rng: random.Random) -> ServerConfig:
    tables = rng.sample(_TABLE_NAMES, rng.randint(1, 3))
    actions = rng.sample(_ACTION_NAMES, rng.randint(1, 3))
    table_matches = {}
    table_actions = {}
    for t in tables:
        fields = rng.sample(_FIELD_NAMES, rng.randint(1, 2))
        table_matches[t] = [
            MatchField(f, rng.choice(MATCH_KINDS)) for f in fields
        ]
        table_actions[t] = rng.sample(actions, rng.randint(1, len(actions)))
    action_params = {
        a: [
            ActionParam(p, rng.choice((8, 9, 16, 32, 48)))
            for p in rng.sample(_PARAM_NAMES, rng.randint(0, 2))
        ]
        for a in actions
    }
    return ServerConfig.build(table_matches, table_actions, action_params)


def random_bytes(rng: random.Random, width_bits: int = 32) -> BytesV:
    count = max(1, (width_bits + 7) // 8)
    return BytesV(tuple(rng.randrange(256) for _ in range(count)))


def random_match_value(rng: random.Random, kind: str) -> Term:
    if kind == "Exact":
        return Record((("value", random_bytes(rng)),))
    if rng.random() < 0.25:
        return Record((("none", UnitV()),))
    if kind == "Ternary":
        payload = Record((("value", random_bytes(rng)), ("mask", random_bytes(rng))))
    elif kind == "LPM":
        payload = Record(
            (("value", random_bytes(rng)), ("prefixLen", IntV(rng.randint(0, 32))))
        )
    elif kind == "Range":
        payload = Record((("low", random_bytes(rng)), ("high", random_bytes(rng))))
    else:  # Optional
        payload = Record((("value", random_bytes(rng)),))
    return Record((("some", payload),))


def random_entity(
    rng: random.Random,
    config: ServerConfig,
    table: Optional[str] = None,
    action: Optional[str] = None,
    wildcard_matches: bool = False,
    priority: object = WILDCARD,
) -> Entity:
    """A conformant entity with concrete table and action names."""
    table = table or rng.choice(config.tables())
    action = action or rng.choice(config.actions_of(table))
    if wildcard_matches:
        matches: Term = StringV(WILDCARD)
    else:
        matches = Record(
            tuple(
                (mf.name, random_match_value(rng, mf.kind))
                for mf in config.matches_of(table)
            )
        )
    params = config.params_of(action)
    if params:
        args: Term = Record(
            tuple((p.name, random_bytes(rng, p.bitwidth)) for p in params)
        )
    else:
        args = UnitV()
    return Entity(table, matches, action, args, priority)


def perturbed_entity(rng: random.Random, config: ServerConfig) -> Entity:
    """An entity that usually violates conformance in one of several ways."""
    e = random_entity(rng, config)
    mutation = rng.randrange(6)
    if mutation == 0:
        return Entity("unknown_table", e.field_matches, e.action_name, e.action_args)
    if mutation == 1:
        # an action that exists but may not be allowed for this table
        return Entity(
            e.table_name, e.field_matches, rng.choice(_ACTION_NAMES), e.action_args
        )
    if mutation == 2:
        return Entity(e.table_name, e.field_matches, e.action_name, UnitV())
    if mutation == 3:
        return Entity(
            e.table_name,
            Record((("bogus_field", Record((("value", random_bytes(rng)),))),)),
            e.action_name,
            e.action_args,
        )
    if mutation == 4:
        return Entity(
            e.table_name, e.field_matches, e.action_name,
            Record((("bogus_param", random_bytes(rng)),)),
        )
    return e  # unchanged (conformant) half the time on average


def random_ground_value(rng: random.Random, depth: int = 2) -> Term:
    choices = ["int", "bool", "string", "bytes", "unit", "nil"]
    if depth > 0:
        choices += ["cons", "record"]
    kind = rng.choice(choices)
    if kind == "int":
        return IntV(rng.randint(-1, 3))
    if kind == "bool":
        return BoolV(rng.random() < 0.5)
    if kind == "string":
        return StringV(rng.choice(("a", "b", "hello", "*")))
    if kind == "bytes":
        return BytesV(tuple(rng.randrange(256) for _ in range(rng.randint(0, 2))))
    if kind == "unit":
        return UnitV()
    if kind == "nil":
        return NilV(None)
    if kind == "cons":
        items = [random_ground_value(rng, depth - 1) for _ in range(rng.randint(1, 2))]
        return make_list_value(items)
    labels = rng.sample(("a", "b", "c"), rng.randint(1, 2))
    return Record(
        tuple((lbl, random_ground_value(rng, depth - 1)) for lbl in labels)
    )


def random_type(rng: random.Random, depth: int = 2) -> Type:
    """A closed type valid in the empty environment."""
    from .syntax import (
        ArrowT,
        Basic,
        ListT,
        MatchT,
        SingletonT,
        TOP,
        UnionT,
    )

    choices = ["basic", "singleton", "top"]
    if depth > 0:
        choices += ["list", "record", "union", "arrow", "match"]
    kind = rng.choice(choices)
    if kind == "basic":
        return Basic(rng.choice(("Int", "Bool", "String", "Unit", "Bytes")))
    if kind == "singleton":
        return SingletonT(random_ground_value(rng, min(depth, 1)))
    if kind == "top":
        return TOP
    if kind == "list":
        return ListT(random_type(rng, depth - 1))
    if kind == "record":
        labels = rng.sample(("a", "b", "c"), rng.randint(1, 2))
        return RecordT(
            tuple((lbl, random_type(rng, depth - 1)) for lbl in labels)
        )
    if kind == "union":
        return UnionT(random_type(rng, depth - 1), random_type(rng, depth - 1))
    if kind == "arrow":
        return ArrowT(random_type(rng, depth - 1), random_type(rng, depth - 1))
    cases = tuple(
        (SingletonT(random_ground_value(rng, 1)), random_type(rng, depth - 1))
        for _ in range(rng.randint(1, 2))
    )
    return MatchT(random_type(rng, depth - 1), cases)


# ---------------------------------------------------------------------------
# Client programs


def _element_type(config: ServerConfig, table: str, action: str) -> Type:
    from .p4info import query_element_type

    return query_element_type(config, table, action)


def random_client_program(
    rng: random.Random,
    servers: list[tuple[str, ServerConfig]],
    max_ops: int = 8,
) -> Term:
    """A straight-line, well-typed client over the given servers.

    The program connects to one or two servers, then issues a random
    sequence of writes and reads; read results are optionally consumed with
    head/match before the program ends in a boolean or ground value.
    """
    picked = rng.sample(servers, min(len(servers), rng.randint(1, 2)))
    steps: list[tuple[str, Term]] = []
    chan_vars: list[tuple[str, ServerConfig]] = []
    n = 0
    for addr_name, config in picked:
        var = f"c{len(chan_vars) + 1}"
        triple = encode_config(config)
        steps.append((var, P4Op(OpKind.CONNECT, (AddrV(addr_name, *triple),))))
        chan_vars.append((var, config))
        n += 1
    tail_expr: Term = BoolV(True)
    ops_left = max(0, rng.randint(1, max_ops) - n)
    for i in range(ops_left):
        var = f"r{i + 1}"
        chan, config = rng.choice(chan_vars)
        roll = rng.random()
        if roll < 0.45:
            entity = random_entity(rng, config)
            kind = rng.choice((OpKind.INSERT, OpKind.INSERT, OpKind.MODIFY, OpKind.DELETE))
            steps.append((var, P4Op(kind, (Var(chan), entity.to_value()))))
            tail_expr = Var(var)
        elif roll < 0.8:
            table = rng.choice(config.tables())
            action = rng.choice(config.actions_of(table))
            query = random_entity(
                rng, config, table=table, action=action, wildcard_matches=True
            )
            steps.append((var, P4Op(OpKind.READ, (Var(chan), query.to_value()))))
            elem = _element_type(config, table, action)
            some_case = MatchCase(
                "y",
                RecordT((("some", elem),)),
                _consume_some(rng, chan, elem),
            )
            none_case = MatchCase("z", RecordT((("none", UNIT),)), BoolV(False))
            consumer_var = f"m{i + 1}"
            steps.append(
                (consumer_var, Match(Head(Var(var)), (some_case, none_case)))
            )
            tail_expr = Var(consumer_var)
        else:
            entity = random_entity(rng, config, wildcard_matches=True)
            steps.append((var, P4Op(OpKind.DELETE, (Var(chan), entity.to_value()))))
            tail_expr = Var(var)
    program = tail_expr
    for var, bound in reversed(steps):
        program = Let(var, bound, program)
    return program


def _consume_some(rng: random.Random, chan: str, elem: Type) -> Term:
    """Inside the some-case: either re-insert the element or just succeed."""
    if rng.random() < 0.5:
        return P4Op(OpKind.INSERT, (Var(chan), Field(Var("y"), "some")))
    return BoolV(True)


def random_network(
    rng: random.Random,
    max_servers: int = 3,
    max_clients: int = 3,
    max_ops: int = 8,
    max_initial_entities: int = 3,
) -> Network:
    servers = []
    names = [f"sw{i + 1}" for i in range(rng.randint(1, max_servers))]
    for name in names:
        config = random_config(rng)
        entities = tuple(
            random_entity(rng, config)
            for _ in range(rng.randint(0, max_initial_entities))
        )
        triple = encode_config(config)
        servers.append((name, ServerState(config, entities, AddrV(name, *triple))))
    named_configs = [(name, state.config) for name, state in servers]
    clients = []
    for i in range(rng.randint(1, max_clients)):
        clients.append(
            (f"cl{i + 1}", random_client_program(rng, named_configs, max_ops))
        )
    return Network(tuple(clients), tuple(servers))

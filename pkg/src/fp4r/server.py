"""The table-server model: configurations, entities, conformance, and the
server side of the transition system.

A server is a value ``ServerState(config, entities, address, channels)``;
``server_step`` returns the response together with the successor state.
Write semantics follow control-plane conventions: the response boolean says
whether the operation changed anything, and entry identity is the key
(table name, field matches, priority).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from .syntax import (
    AddrV,
    BoolV,
    BytesV,
    ChannelV,
    Cons,
    IntV,
    NilV,
    OpKind,
    Record,
    StringV,
    Term,
    UnitV,
    ground_values_eq,
    is_ground,
    make_list_value,
)

WILDCARD = "*"

MATCH_KINDS = ("Exact", "Ternary", "LPM", "Range", "Optional")


class ConfigError(ValueError):
    """A server configuration violates its invariants."""


class EntityCodecError(ValueError):
    """An entity value or JSON document has the wrong shape."""


class ServerRefusedError(Exception):
    """The server refused a request (unknown channel or nonconformant value)."""

    def __init__(self, reason: str, message: str):
        super().__init__(f"{reason}: {message}")
        self.reason = reason


class WildcardWriteError(Exception):
    """A write carried a wildcard where only concrete values are allowed."""


@dataclass(frozen=True)
class MatchField:
    name: str
    kind: str

    def __post_init__(self):
        if self.kind not in MATCH_KINDS:
            raise ConfigError(f"unknown match kind {self.kind!r}")


@dataclass(frozen=True)
class ActionParam:
    name: str
    bitwidth: int

    def __post_init__(self):
        if self.bitwidth <= 0:
            raise ConfigError(f"bitwidth must be positive, got {self.bitwidth}")


@dataclass(frozen=True)
class ServerConfig:
    table_matches: tuple[tuple[str, tuple[MatchField, ...]], ...]
    table_actions: tuple[tuple[str, tuple[str, ...]], ...]
    action_params: tuple[tuple[str, tuple[ActionParam, ...]], ...]

    def __post_init__(self):
        tables = [t for t, _ in self.table_matches]
        actions = [a for a, _ in self.action_params]
        for name in tables + actions:
            if not name or name == WILDCARD:
                raise ConfigError(f"reserved or empty name {name!r}")
        if len(set(tables)) != len(tables):
            raise ConfigError("duplicate table name")
        if len(set(actions)) != len(actions):
            raise ConfigError("duplicate action name")
        if [t for t, _ in self.table_actions] != tables:
            raise ConfigError("table_matches and table_actions list different tables")
        known = set(actions)
        for t, acts in self.table_actions:
            for a in acts:
                if a not in known:
                    raise ConfigError(f"table {t!r} references unknown action {a!r}")

    @staticmethod
    def build(
        table_matches: dict[str, list[MatchField]],
        table_actions: dict[str, list[str]],
        action_params: dict[str, list[ActionParam]],
    ) -> "ServerConfig":
        return ServerConfig(
            tuple((t, tuple(mfs)) for t, mfs in table_matches.items()),
            tuple((t, tuple(a)) for t, a in table_actions.items()),
            tuple((a, tuple(ps)) for a, ps in action_params.items()),
        )

    def tables(self) -> list[str]:
        return [t for t, _ in self.table_matches]

    def matches_of(self, table: str) -> tuple[MatchField, ...]:
        for t, mfs in self.table_matches:
            if t == table:
                return mfs
        raise KeyError(table)

    def actions_of(self, table: str) -> tuple[str, ...]:
        for t, acts in self.table_actions:
            if t == table:
                return acts
        raise KeyError(table)

    def params_of(self, action: str) -> tuple[ActionParam, ...]:
        for a, ps in self.action_params:
            if a == action:
                return ps
        raise KeyError(action)

    def actions(self) -> list[str]:
        return [a for a, _ in self.action_params]


Priority = Union[int, str]


@dataclass(frozen=True)
class Entity:
    """A table entry (or query): wildcards are the string "*"."""

    table_name: str
    field_matches: Term  # ground record of per-field match values, or "*"
    action_name: str
    action_args: Term  # ground record of parameter bytes, or unit
    priority: Priority = WILDCARD

    def __post_init__(self):
        if not is_ground(self.field_matches) or not is_ground(self.action_args):
            raise EntityCodecError("entity fields must be ground values")
        if isinstance(self.priority, str) and self.priority != WILDCARD:
            raise EntityCodecError("priority must be an integer or the wildcard")

    def key(self) -> tuple:
        return (self.table_name, self.field_matches, self.priority)

    def to_value(self) -> Record:
        fields = [
            ("name", StringV(self.table_name)),
            ("matches", self.field_matches),
            ("action", StringV(self.action_name)),
            ("params", self.action_args),
        ]
        if self.priority != WILDCARD:
            fields.append(("priority", IntV(self.priority)))
        return Record(tuple(fields))

    @staticmethod
    def from_value(v: Term) -> "Entity":
        if not isinstance(v, Record):
            raise EntityCodecError("an entity must be a record value")
        fields = v.field_map()
        for lbl in ("name", "matches", "action", "params"):
            if lbl not in fields:
                raise EntityCodecError(f"entity record lacks field {lbl!r}")
        name = fields["name"]
        action = fields["action"]
        if not isinstance(name, StringV) or not isinstance(action, StringV):
            raise EntityCodecError("entity name and action must be strings")
        priority: Priority = WILDCARD
        if "priority" in fields:
            p = fields["priority"]
            if isinstance(p, IntV):
                priority = p.value
            elif not (isinstance(p, StringV) and p.value == WILDCARD):
                raise EntityCodecError("priority must be an integer or the wildcard")
        return Entity(name.value, fields["matches"], action.value, fields["params"], priority)


# ---------------------------------------------------------------------------
# Conformance


def conforms(e: Entity, config: ServerConfig) -> bool:
    """Does the entity inhabit the entity type encoded from the config?

    The name and action singletons act as the type-parameter witnesses; the
    action witness must satisfy its quantifier bound (the actions allowed
    for the named table).
    """
    from .p4info import encode_config
    from .syntax import SingletonT, TypeApp
    from .typecheck import EMPTY_ENV, entity_record_type, member_of, normalize_type, subtype

    tm, ta, tp = encode_config(config)
    xn = SingletonT(StringV(e.table_name))
    xa = SingletonT(StringV(e.action_name))
    if not subtype(EMPTY_ENV, xa, TypeApp(ta, xn)):
        return False
    expected = entity_record_type(tm, ta, tp, xn, xa)
    return member_of(e.to_value(), normalize_type(EMPTY_ENV, expected))


def lint_entity(config: ServerConfig, e: Entity) -> list[str]:
    """Warnings for argument byte strings wider than the declared bitwidth."""
    warnings = []
    try:
        params = {p.name: p for p in config.params_of(e.action_name)}
    except KeyError:
        return warnings
    if isinstance(e.action_args, Record):
        for name, value in e.action_args.fields:
            p = params.get(name)
            if p is not None and isinstance(value, BytesV):
                limit = math.ceil(p.bitwidth / 8)
                if len(value.octets) > limit:
                    warnings.append(
                        f"argument {name!r} of action {e.action_name!r} has "
                        f"{len(value.octets)} bytes but bitwidth {p.bitwidth} "
                        f"allows at most {limit}"
                    )
    return warnings


# ---------------------------------------------------------------------------
# Query evaluation (the staged filter cascade)


def eval_read(config: ServerConfig, entities: list[Entity], q: Entity) -> list[Entity]:
    """Filter entities by the query, stage by stage, preserving order.

    A wildcard table name returns everything immediately; otherwise the
    matches, action, and priority stages each filter unless wildcarded.
    """
    if q.table_name == WILDCARD:
        return list(entities)
    selected = [e for e in entities if e.table_name == q.table_name]
    if not _is_wildcard_value(q.field_matches):
        selected = [
            e for e in selected if ground_values_eq(e.field_matches, q.field_matches)
        ]
    if q.action_name != WILDCARD:
        selected = [e for e in selected if e.action_name == q.action_name]
    if q.priority != WILDCARD:
        selected = [e for e in selected if e.priority == q.priority]
    return selected


def _is_wildcard_value(v: Term) -> bool:
    return isinstance(v, StringV) and v.value == WILDCARD


def eval_write(
    config: ServerConfig, entities: list[Entity], kind: OpKind, e: Entity
) -> tuple[list[Entity], bool]:
    """Apply a write; returns the new entity list and whether it had effect."""
    if e.table_name == WILDCARD or e.action_name == WILDCARD:
        raise WildcardWriteError(f"{kind.value} needs concrete table and action names")
    if kind in (OpKind.INSERT, OpKind.MODIFY) and _is_wildcard_value(e.field_matches):
        raise WildcardWriteError(f"{kind.value} needs concrete field matches")
    if kind is OpKind.INSERT:
        if any(_same_key(e, old) for old in entities):
            return (list(entities), False)
        return (list(entities) + [e], True)
    if kind is OpKind.MODIFY:
        out = []
        found = False
        for old in entities:
            if _same_key(e, old):
                out.append(e)
                found = True
            else:
                out.append(old)
        return (out, found)
    if kind is OpKind.DELETE:
        # deletion goes by key: wildcard matches/priority mean "any"
        kept = []
        removed = False
        for old in entities:
            if _delete_selects(e, old):
                removed = True
            else:
                kept.append(old)
        return (kept, removed)
    raise ValueError(f"not a write: {kind}")


def _same_key(a: Entity, b: Entity) -> bool:
    return (
        a.table_name == b.table_name
        and ground_values_eq(a.field_matches, b.field_matches)
        and a.priority == b.priority
    )


def _delete_selects(q: Entity, e: Entity) -> bool:
    if e.table_name != q.table_name:
        return False
    if not _is_wildcard_value(q.field_matches) and not ground_values_eq(
        e.field_matches, q.field_matches
    ):
        return False
    if q.priority != WILDCARD and e.priority != q.priority:
        return False
    return True


# ---------------------------------------------------------------------------
# Server state and transitions


@dataclass(frozen=True)
class ServerState:
    config: ServerConfig
    entities: tuple[Entity, ...]
    address: AddrV
    channels: frozenset[str] = frozenset()
    next_channel: int = 1

    def well_formed(self) -> bool:
        return all(conforms(e, self.config) for e in self.entities)


def server_step(
    state: ServerState, kind: OpKind, target: Term, payload: Optional[Term]
) -> tuple[Term, ServerState]:
    """Answer one client request, returning the response value and the new
    state.  Raises ServerRefusedError for requests a well-typed network
    never produces."""
    if kind is OpKind.CONNECT:
        if not (isinstance(target, AddrV) and target.name == state.address.name):
            raise ServerRefusedError(
                "address-mismatch", f"server {state.address.name!r} cannot accept this"
            )
        ident = f"{state.address.name}.{state.next_channel}"
        chan = ChannelV(
            ident, state.address.matches, state.address.actions, state.address.params
        )
        new = replace(
            state,
            channels=state.channels | {ident},
            next_channel=state.next_channel + 1,
        )
        return (chan, new)
    if not (isinstance(target, ChannelV) and target.ident in state.channels):
        raise ServerRefusedError("unknown-channel", "no such open channel")
    if payload is None:
        raise ServerRefusedError("nonconformant", f"{kind.value} needs a payload")
    try:
        entity = Entity.from_value(payload)
    except EntityCodecError as exc:
        raise ServerRefusedError("nonconformant", str(exc)) from exc
    if not conforms(entity, state.config):
        raise ServerRefusedError(
            "nonconformant", "the value does not conform to the server configuration"
        )
    if kind is OpKind.READ:
        from .p4info import query_element_type

        found = eval_read(state.config, list(state.entities), entity)
        annot = query_element_type(state.config, entity.table_name, entity.action_name)
        result = make_list_value([e.to_value() for e in found], annot)
        return (result, state)
    new_entities, changed = eval_write(state.config, list(state.entities), kind, entity)
    return (BoolV(changed), replace(state, entities=tuple(new_entities)))


# ---------------------------------------------------------------------------
# Canonical JSON form for entities


def ground_to_json(v: Term):
    match v:
        case UnitV():
            return None
        case BoolV(b):
            return b
        case IntV(n):
            return n
        case StringV(s):
            return s
        case BytesV(octets):
            return list(octets)
        case Record(fields):
            return {lbl: ground_to_json(fv) for lbl, fv in fields}
        case _:
            raise EntityCodecError(f"value has no JSON form: {v!r}")


def ground_from_json(doc) -> Term:
    if doc is None:
        return UnitV()
    if isinstance(doc, bool):
        return BoolV(doc)
    if isinstance(doc, int):
        return IntV(doc)
    if isinstance(doc, str):
        return StringV(doc)
    if isinstance(doc, list):
        if not all(isinstance(x, int) and not isinstance(x, bool) for x in doc):
            raise EntityCodecError("byte arrays must contain integers")
        return BytesV(tuple(doc))
    if isinstance(doc, dict):
        return Record(tuple((k, ground_from_json(v)) for k, v in doc.items()))
    raise EntityCodecError(f"cannot decode {doc!r}")


def entity_to_json(e: Entity) -> dict:
    return {
        "table_name": e.table_name,
        "field_matches": ground_to_json(e.field_matches),
        "action_name": e.action_name,
        "action_args": ground_to_json(e.action_args),
        "priority": e.priority,
    }


def entity_from_json(doc: dict) -> Entity:
    if not isinstance(doc, dict):
        raise EntityCodecError("an entity document must be an object")
    try:
        table = doc["table_name"]
        action = doc["action_name"]
    except KeyError as exc:
        raise EntityCodecError(f"entity document lacks {exc.args[0]!r}") from exc
    matches = ground_from_json(doc.get("field_matches", WILDCARD))
    args = ground_from_json(doc.get("action_args"))
    priority = doc.get("priority", WILDCARD)
    return Entity(table, matches, action, args, priority)


def entities_from_json_text(text: str) -> list[Entity]:
    doc = json.loads(text)
    if not isinstance(doc, list):
        raise EntityCodecError("an entity file must contain a JSON array")
    return [entity_from_json(item) for item in doc]


def entities_to_json_text(entities: list[Entity]) -> str:
    return json.dumps([entity_to_json(e) for e in entities], indent=2)

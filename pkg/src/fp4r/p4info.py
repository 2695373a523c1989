"""P4Info ingestion and the configuration-to-types encoding.

``parse_p4info`` reads the protobuf-JSON subset covering tables (name,
match fields, action references) and actions (id, name, params).
``encode_config`` turns a server configuration into the three types that
parameterize server addresses and channels:

* the table-matches type maps a table-name singleton to the record of its
  match-field encodings (unioned with the wildcard singleton),
* the table-actions type maps a table-name singleton to the union of its
  action-name singletons,
* the action-params type maps an action-name singleton to its parameter
  record (Unit for parameterless actions).

Each match type also carries a final wildcard case, so wildcard queries
stay typeable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

from . import printer
from .server import ActionParam, ConfigError, MatchField, ServerConfig
from .syntax import (
    BYTES,
    INT,
    UNIT,
    Basic,
    ChanT,
    Forall,
    ListT,
    MatchT,
    RecordT,
    ServerRefT,
    SingletonT,
    StringV,
    TOP,
    TVar,
    Type,
    TypeApp,
    UnionT,
    Top,
    ArrowT,
    option_of,
    union_of,
)

WILDCARD_T = SingletonT(StringV("*"))


class P4InfoError(ValueError):
    """The document does not fit the supported P4Info subset."""


@dataclass(frozen=True)
class P4InfoTable:
    name: str
    match_fields: tuple[MatchField, ...]
    action_ids: tuple[int, ...]


@dataclass(frozen=True)
class P4InfoAction:
    id: int
    name: str
    params: tuple[ActionParam, ...]


@dataclass(frozen=True)
class P4InfoDoc:
    tables: tuple[P4InfoTable, ...]
    actions: tuple[P4InfoAction, ...]


_MATCH_KIND_ALIASES = {
    "exact": "Exact",
    "ternary": "Ternary",
    "lpm": "LPM",
    "range": "Range",
    "optional": "Optional",
}


def _match_kind(raw: str) -> str:
    kind = _MATCH_KIND_ALIASES.get(str(raw).lower())
    if kind is None:
        raise P4InfoError(f"unknown match type {raw!r}")
    return kind


def parse_p4info(text: str) -> P4InfoDoc:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise P4InfoError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise P4InfoError("the top level must be a JSON object")
    tables = []
    for raw in _expect_list(doc, "tables"):
        name = _preamble_name(raw)
        fields = tuple(
            MatchField(_expect_str(mf, "name"), _match_kind(_expect_str(mf, "matchType")))
            for mf in _expect_list(raw, "matchFields", optional=True)
        )
        refs = tuple(
            _expect_int(ref, "id") for ref in _expect_list(raw, "actionRefs", optional=True)
        )
        tables.append(P4InfoTable(name, fields, refs))
    actions = []
    for raw in _expect_list(doc, "actions"):
        pre = raw.get("preamble")
        if not isinstance(pre, dict):
            raise P4InfoError("every action needs a preamble object")
        actions.append(
            P4InfoAction(
                _expect_int(pre, "id"),
                _expect_str(pre, "name"),
                tuple(
                    ActionParam(_expect_str(p, "name"), _expect_int(p, "bitwidth"))
                    for p in _expect_list(raw, "params", optional=True)
                ),
            )
        )
    names = [t.name for t in tables] + [a.name for a in actions]
    if len(set(names)) != len(names):
        raise P4InfoError("table and action names must be unique")
    ids = [a.id for a in actions]
    if len(set(ids)) != len(ids):
        raise P4InfoError("action ids must be unique")
    known = set(ids)
    for t in tables:
        for ref in t.action_ids:
            if ref not in known:
                raise P4InfoError(f"table {t.name!r} references unknown action id {ref}")
    return P4InfoDoc(tuple(tables), tuple(actions))


def _expect_list(doc: dict, key: str, optional: bool = False):
    value = doc.get(key, [] if optional else None)
    if value is None:
        raise P4InfoError(f"missing {key!r}")
    if not isinstance(value, list):
        raise P4InfoError(f"{key!r} must be an array")
    return value


def _expect_str(doc, key: str) -> str:
    if not isinstance(doc, dict) or not isinstance(doc.get(key), str):
        raise P4InfoError(f"missing string field {key!r}")
    return doc[key]


def _expect_int(doc, key: str) -> int:
    if not isinstance(doc, dict) or not isinstance(doc.get(key), int):
        raise P4InfoError(f"missing integer field {key!r}")
    return doc[key]


def _preamble_name(raw) -> str:
    pre = raw.get("preamble") if isinstance(raw, dict) else None
    if not isinstance(pre, dict) or not isinstance(pre.get("name"), str):
        raise P4InfoError("every table needs a preamble with a name")
    return pre["name"]


def to_config(doc: P4InfoDoc) -> ServerConfig:
    by_id = {a.id: a for a in doc.actions}
    table_matches = {t.name: list(t.match_fields) for t in doc.tables}
    table_actions = {
        t.name: [by_id[ref].name for ref in t.action_ids] for t in doc.tables
    }
    action_params = {a.name: list(a.params) for a in doc.actions}
    try:
        return ServerConfig.build(table_matches, table_actions, action_params)
    except ConfigError as exc:
        raise P4InfoError(str(exc)) from exc


def load_config(path: str) -> ServerConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return to_config(parse_p4info(fh.read()))


# ---------------------------------------------------------------------------
# Encoding


_MATCH_KIND_TYPES: dict[str, Type] = {
    "Exact": RecordT((("value", BYTES),)),
    "Ternary": option_of(RecordT((("value", BYTES), ("mask", BYTES)))),
    "LPM": option_of(RecordT((("value", BYTES), ("prefixLen", INT)))),
    "Range": option_of(RecordT((("low", BYTES), ("high", BYTES)))),
    "Optional": option_of(RecordT((("value", BYTES),))),
}


def encode_match_fields(fields: tuple[MatchField, ...]) -> Type:
    record = RecordT(tuple((mf.name, _MATCH_KIND_TYPES[mf.kind]) for mf in fields))
    return UnionT(record, WILDCARD_T)


@lru_cache(maxsize=None)
def encode_config(config: ServerConfig) -> tuple[Type, Type, Type]:
    """The (matches, actions, params) type triple for a configuration.

    Case order follows the configuration order, which in turn follows the
    P4Info document order; the wildcard case comes last.
    """
    tm_cases = [
        (SingletonT(StringV(t)), encode_match_fields(config.matches_of(t)))
        for t in config.tables()
    ]
    tm_cases.append((WILDCARD_T, WILDCARD_T))
    tm = Forall("T", TOP, MatchT(TVar("T"), tuple(tm_cases)))

    ta_cases = []
    for t in config.tables():
        actions = config.actions_of(t)
        ta_cases.append(
            (
                SingletonT(StringV(t)),
                union_of([SingletonT(StringV(a)) for a in actions]),
            )
        )
    ta_cases.append((WILDCARD_T, WILDCARD_T))
    ta = Forall("T", TOP, MatchT(TVar("T"), tuple(ta_cases)))

    tp_cases = []
    for a in config.actions():
        params = config.params_of(a)
        if params:
            body: Type = RecordT(tuple((p.name, BYTES) for p in params))
        else:
            body = UNIT
        tp_cases.append((SingletonT(StringV(a)), body))
    tp_cases.append((WILDCARD_T, UNIT))
    tp = Forall("A", TOP, MatchT(TVar("A"), tuple(tp_cases)))
    return (tm, ta, tp)


def query_element_type(config: ServerConfig, table: str, action: str) -> Type:
    """The normalized entry type for results of a (table, action) query."""
    from .typecheck import EMPTY_ENV, entity_record_type, normalize_type

    tm, ta, tp = encode_config(config)
    expected = entity_record_type(
        tm, ta, tp, SingletonT(StringV(table)), SingletonT(StringV(action))
    )
    return normalize_type(EMPTY_ENV, expected)


def server_ref_type(config: ServerConfig) -> Type:
    tm, ta, tp = encode_config(config)
    return ServerRefT(tm, ta, tp)


def chan_type(config: ServerConfig) -> Type:
    tm, ta, tp = encode_config(config)
    return ChanT(tm, ta, tp)


DECL_NAMES = ("TableMatches", "TableActions", "ActionParams")


def emit_type_decls(config: ServerConfig) -> str:
    """Render the encoded types as a declarations file in surface syntax."""
    tm, ta, tp = encode_config(config)
    lines = []
    for name, ty in zip(DECL_NAMES, (tm, ta, tp)):
        lines.append(f"type {name} = {printer.pretty_type(ty)}")
    lines.append("type Server = ServerRef[TableMatches, TableActions, ActionParams]")
    lines.append("type Channel = Chan[TableMatches, TableActions, ActionParams]")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Canonical JSON form of types (used by the CLI --json output)


def type_to_json(t: Type):
    match t:
        case Top():
            return {"kind": "top"}
        case Basic(name):
            return {"kind": "basic", "name": name}
        case TVar(name):
            return {"kind": "var", "name": name}
        case ServerRefT(a, b, c):
            return {"kind": "serverref", "args": [type_to_json(x) for x in (a, b, c)]}
        case ChanT(a, b, c):
            return {"kind": "chan", "args": [type_to_json(x) for x in (a, b, c)]}
        case RecordT(fields):
            return {
                "kind": "record",
                "fields": [[lbl, type_to_json(ft)] for lbl, ft in fields],
            }
        case ListT(elem):
            return {"kind": "list", "elem": type_to_json(elem)}
        case ArrowT(p, r):
            return {"kind": "arrow", "param": type_to_json(p), "result": type_to_json(r)}
        case Forall(var, bound, body):
            return {
                "kind": "forall",
                "var": var,
                "bound": type_to_json(bound),
                "body": type_to_json(body),
            }
        case TypeApp(f, a):
            return {"kind": "app", "fn": type_to_json(f), "arg": type_to_json(a)}
        case UnionT(l, r):
            return {"kind": "union", "left": type_to_json(l), "right": type_to_json(r)}
        case SingletonT(v):
            from .server import ground_to_json

            return {"kind": "singleton", "value": ground_to_json(v)}
        case MatchT(s, cases):
            return {
                "kind": "match",
                "scrutinee": type_to_json(s),
                "cases": [[type_to_json(p), type_to_json(c)] for p, c in cases],
            }
        case _:
            raise TypeError(f"cannot serialize {t!r}")

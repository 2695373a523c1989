"""Networks of clients and servers: well-typedness, stepping, and the
deterministic run loop.

A network pairs an ordered list of named client terms with an ordered list
of named servers.  Scheduling is deterministic: the first client (in list
order) that can move does; internal moves happen alone, operations
synchronize with the unique server owning the target address or channel.
Equality of addresses/channels is by name, ownership by server state.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from typing import Optional

from . import printer
from .p4info import encode_config, load_config
from .reduction import Request, Tau, step
from .server import (
    Entity,
    EntityCodecError,
    ServerState,
    conforms,
    entities_from_json_text,
    entity_to_json,
    server_step,
)
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
    P4Op,
    Record,
    SingletonT,
    Tail,
    Term,
    Type,
    TypeAppT,
    TypeLambda,
    Var,
    is_value,
    types_alpha_eq,
)
from .typecheck import EMPTY_ENV, TypeCheckError, subtype, typecheck


class NetworkDeadlock(Exception):
    """A non-value client cannot synchronize with any server."""


class NetworkFuelError(Exception):
    pass


class PreservationError(Exception):
    """A client stopped typechecking at (a subtype of) its initial type."""


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Network:
    clients: tuple[tuple[str, Term], ...]
    servers: tuple[tuple[str, ServerState], ...]

    def client(self, cid: str) -> Term:
        for name, t in self.clients:
            if name == cid:
                return t
        raise KeyError(cid)

    def server(self, sid: str) -> ServerState:
        for name, s in self.servers:
            if name == sid:
                return s
        raise KeyError(sid)


@dataclass(frozen=True)
class TraceEvent:
    step: int
    client: str
    label: str  # tau | connect | read | insert | modify | delete
    server: Optional[str] = None
    request: object = None
    response: object = None

    def to_json(self) -> dict:
        doc: dict = {"step": self.step, "client": self.client, "label": self.label}
        if self.server is not None:
            doc["server"] = self.server
        if self.request is not None:
            doc["request"] = self.request
        if self.response is not None:
            doc["response"] = self.response
        return doc


# ---------------------------------------------------------------------------
# Collecting runtime references (addresses and channels) in a term


def runtime_refs(t: Term) -> list[Term]:
    out: list[Term] = []
    _refs_term(t, out)
    return out


def _refs_term(t: Term, out: list[Term]):
    match t:
        case AddrV(_, _, _, _) | ChannelV(_, _, _, _):
            out.append(t)
        case Cons(h, tl):
            _refs_term(h, out)
            _refs_term(tl, out)
        case Head(a) | Tail(a):
            _refs_term(a, out)
        case Record(fields):
            for _, v in fields:
                _refs_term(v, out)
        case Field(r, _):
            _refs_term(r, out)
        case App(f, a):
            _refs_term(f, out)
            _refs_term(a, out)
        case TypeAppT(f, ty):
            _refs_term(f, out)
            _refs_type(ty, out)
        case Lambda(_, vt, body):
            _refs_type(vt, out)
            _refs_term(body, out)
        case TypeLambda(_, bound, body):
            _refs_type(bound, out)
            _refs_term(body, out)
        case Let(_, bound, body):
            _refs_term(bound, out)
            _refs_term(body, out)
        case Match(s, cases):
            _refs_term(s, out)
            for c in cases:
                _refs_type(c.case_type, out)
                _refs_term(c.body, out)
        case P4Op(_, args):
            for a in args:
                _refs_term(a, out)
        case _:
            pass


def _refs_type(ty: Type, out: list[Term]):
    if isinstance(ty, SingletonT):
        _refs_term(ty.value, out)
        return
    for attr in getattr(ty, "__dataclass_fields__", {}):
        val = getattr(ty, attr)
        if isinstance(val, Type):
            _refs_type(val, out)
        elif isinstance(val, tuple):
            for item in val:
                if isinstance(item, tuple):
                    for part in item:
                        if isinstance(part, Type):
                            _refs_type(part, out)
                elif isinstance(item, Type):
                    _refs_type(item, out)


# ---------------------------------------------------------------------------
# Well-typedness


def network_well_typed(net: Network) -> tuple[bool, list[str]]:
    """Check the network typing discipline; returns (ok, diagnostics)."""
    problems: list[str] = []
    seen_addresses: set[str] = set()
    seen_channels: set[str] = set()
    for sid, state in net.servers:
        if state.address.name in seen_addresses:
            problems.append(f"server {sid}: duplicate address {state.address.name!r}")
        seen_addresses.add(state.address.name)
        for chan in state.channels:
            if chan in seen_channels:
                problems.append(f"server {sid}: channel {chan!r} owned twice")
            seen_channels.add(chan)
        encoded = encode_config(state.config)
        addr = state.address
        if not all(
            types_alpha_eq(a, b)
            for a, b in zip((addr.matches, addr.actions, addr.params), encoded)
        ):
            problems.append(
                f"server {sid}: address type parameters differ from the encoded config"
            )
        for e in state.entities:
            if not conforms(e, state.config):
                problems.append(
                    f"server {sid}: stored entity for table {e.table_name!r} "
                    "does not conform to the configuration"
                )
    for cid, term in net.clients:
        try:
            typecheck(EMPTY_ENV, term)
        except TypeCheckError as exc:
            problems.append(f"client {cid}: {exc}")
        for ref in runtime_refs(term):
            if isinstance(ref, AddrV):
                owners = [
                    (sid, s) for sid, s in net.servers if s.address.name == ref.name
                ]
                if len(owners) != 1:
                    problems.append(
                        f"client {cid}: address {ref.name!r} owned by "
                        f"{len(owners)} servers"
                    )
                    continue
                encoded = encode_config(owners[0][1].config)
                if not all(
                    types_alpha_eq(a, b)
                    for a, b in zip((ref.matches, ref.actions, ref.params), encoded)
                ):
                    problems.append(
                        f"client {cid}: address {ref.name!r} carries type "
                        "parameters that differ from the server's encoded config"
                    )
            else:
                owners = [
                    (sid, s) for sid, s in net.servers if ref.ident in s.channels
                ]
                if len(owners) != 1:
                    problems.append(
                        f"client {cid}: channel {ref.ident!r} owned by "
                        f"{len(owners)} servers"
                    )
                    continue
                encoded = encode_config(owners[0][1].config)
                if not all(
                    types_alpha_eq(a, b)
                    for a, b in zip((ref.matches, ref.actions, ref.params), encoded)
                ):
                    problems.append(
                        f"client {cid}: channel {ref.ident!r} carries type "
                        "parameters that differ from the server's encoded config"
                    )
    return (not problems, problems)


# ---------------------------------------------------------------------------
# Stepping


def network_step(net: Network, index: int = 0) -> Optional[tuple[TraceEvent, Network]]:
    """Advance the first client that can move; None when all are values."""
    for pos, (cid, term) in enumerate(net.clients):
        if is_value(term):
            continue
        result = step(term)
        if isinstance(result, Tau):
            ev = TraceEvent(index, cid, "tau")
            return (ev, _with_client(net, pos, result.term))
        assert isinstance(result, Request)
        ev, net2 = _synchronize(net, index, pos, cid, result)
        return (ev, net2)
    return None


def _with_client(net: Network, pos: int, term: Term) -> Network:
    clients = list(net.clients)
    clients[pos] = (clients[pos][0], term)
    return replace(net, clients=tuple(clients))


def _with_server(net: Network, sid: str, state: ServerState) -> Network:
    servers = tuple(
        (name, state if name == sid else s) for name, s in net.servers
    )
    return replace(net, servers=servers)


def _synchronize(
    net: Network, index: int, pos: int, cid: str, req: Request
) -> tuple[TraceEvent, Network]:
    if isinstance(req.target, AddrV):
        owners = [
            (sid, s) for sid, s in net.servers if s.address.name == req.target.name
        ]
        what = f"address {req.target.name!r}"
    else:
        owners = [
            (sid, s) for sid, s in net.servers if req.target.ident in s.channels
        ]
        what = f"channel {getattr(req.target, 'ident', '?')!r}"
    if len(owners) != 1:
        raise NetworkDeadlock(
            f"client {cid} cannot synchronize: {what} is owned by {len(owners)} servers"
        )
    sid, state = owners[0]
    response, new_state = server_step(state, req.kind, req.target, req.payload)
    request_doc = _payload_json(req.payload, req.target)
    response_doc = _response_json(response)
    ev = TraceEvent(index, cid, req.kind.value.lower(), sid, request_doc, response_doc)
    net2 = _with_server(_with_client(net, pos, req.resume(response)), sid, new_state)
    return (ev, net2)


def _payload_json(payload: Optional[Term], target: Term):
    if payload is None:
        return {"address": getattr(target, "name", "?")}
    try:
        return entity_to_json(Entity.from_value(payload))
    except EntityCodecError:
        return {"term": printer.pretty_term(payload)}


def _response_json(response: Term):
    from .syntax import BoolV, list_value_items

    if isinstance(response, ChannelV):
        return {"channel": response.ident}
    if isinstance(response, BoolV):
        return response.value
    try:
        items = list_value_items(response)
        return [entity_to_json(Entity.from_value(v)) for v in items]
    except (EntityCodecError, ValueError):
        return {"term": printer.pretty_term(response)}


# ---------------------------------------------------------------------------
# Running


def channels_consistent(net: Network) -> list[str]:
    """Every channel held by a client must be owned by exactly one server."""
    problems = []
    for cid, term in net.clients:
        for ref in runtime_refs(term):
            if isinstance(ref, ChannelV):
                owners = [sid for sid, s in net.servers if ref.ident in s.channels]
                if len(owners) != 1:
                    problems.append(
                        f"client {cid}: channel {ref.ident!r} owned by {len(owners)} servers"
                    )
    return problems


def run_network(
    net: Network,
    fuel: int = 10_000,
    check_invariants: bool = False,
) -> tuple[Network, list[TraceEvent]]:
    """Iterate network steps until every client is a value.

    With ``check_invariants`` the run re-typechecks each client after every
    step it takes and demands the new type be a subtype of (or equal to)
    the type from the client's previous step; by transitivity every client
    therefore stays at a subtype of its initial type.  Channel ownership
    must also stay unique throughout.
    """
    last_types = {}
    if check_invariants:
        for cid, term in net.clients:
            last_types[cid] = typecheck(EMPTY_ENV, term)
    trace: list[TraceEvent] = []
    for index in range(fuel):
        outcome = network_step(net, index)
        if outcome is None:
            return (net, trace)
        ev, net = outcome
        trace.append(ev)
        if check_invariants:
            new_type = typecheck(EMPTY_ENV, net.client(ev.client))
            if not subtype(EMPTY_ENV, new_type, last_types[ev.client]):
                raise PreservationError(
                    f"client {ev.client} now has type "
                    f"{printer.pretty_type(new_type)}, not a subtype of its "
                    f"previous {printer.pretty_type(last_types[ev.client])}"
                )
            last_types[ev.client] = new_type
            problems = channels_consistent(net)
            if problems:
                raise PreservationError("; ".join(problems))
    if network_step(net, fuel) is None:
        return (net, trace)
    raise NetworkFuelError(f"network still running after {fuel} steps")


# ---------------------------------------------------------------------------
# Scenario files


def load_scenario(path: str) -> Network:
    """Build a network from a JSON scenario file.

    Schema::

        {"servers": [{"address": str, "p4info": path, "entities": path?}],
         "clients": [{"id": str?, "program": path, "decls": [path]?}]}

    Relative paths resolve against the scenario file's directory.
    """
    from .parser import parse_decls, parse_program

    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("a scenario must be a JSON object")
    base = os.path.dirname(os.path.abspath(path))

    def resolve(p: str) -> str:
        return p if os.path.isabs(p) else os.path.join(base, p)

    servers = []
    addresses: dict[str, tuple] = {}
    for raw in doc.get("servers", []):
        if not isinstance(raw, dict) or "address" not in raw or "p4info" not in raw:
            raise ScenarioError("every server needs 'address' and 'p4info'")
        name = raw["address"]
        if name in addresses:
            raise ScenarioError(f"duplicate server address {name!r}")
        config = load_config(resolve(raw["p4info"]))
        triple = encode_config(config)
        addresses[name] = triple
        entities: tuple[Entity, ...] = ()
        if raw.get("entities"):
            with open(resolve(raw["entities"]), "r", encoding="utf-8") as fh:
                entities = tuple(entities_from_json_text(fh.read()))
        servers.append(
            (name, ServerState(config, entities, AddrV(name, *triple)))
        )
    clients = []
    for i, raw in enumerate(doc.get("clients", [])):
        if not isinstance(raw, dict) or "program" not in raw:
            raise ScenarioError("every client needs a 'program'")
        cid = raw.get("id", f"c{i + 1}")
        aliases: dict[str, Type] = {}
        for decl_path in raw.get("decls", []):
            with open(resolve(decl_path), "r", encoding="utf-8") as fh:
                for name, ty in parse_decls(fh.read(), aliases).items():
                    aliases[name] = ty
        with open(resolve(raw["program"]), "r", encoding="utf-8") as fh:
            _, term = parse_program(fh.read(), addresses=addresses, aliases=aliases)
        clients.append((cid, term))
    if len({cid for cid, _ in clients}) != len(clients):
        raise ScenarioError("client ids must be unique")
    return Network(tuple(clients), tuple(servers))


def network_to_json(net: Network) -> dict:
    return {
        "clients": {cid: printer.pretty_term(t) for cid, t in net.clients},
        "servers": {
            sid: {
                "address": s.address.name,
                "channels": sorted(s.channels),
                "entities": [entity_to_json(e) for e in s.entities],
            }
            for sid, s in net.servers
        },
    }

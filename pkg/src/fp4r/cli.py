"""Command-line front end.

Commands::

    fp4r typecheck PROGRAM --p4info [NAME=]PATH ... [--decls PATH ...]
    fp4r encode P4INFO [--decls OUT] [--json]
    fp4r run SCENARIO [--fuel N] [--check-invariants] [--trace OUT] [--json]
    fp4r check-network SCENARIO [--json]

Exit codes: 0 success, 1 type error, 2 input/parse error, 3 runtime error
(fuel exhausted, deadlock, refused request).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import printer
from .network import (
    NetworkDeadlock,
    NetworkFuelError,
    PreservationError,
    ScenarioError,
    load_scenario,
    network_to_json,
    network_well_typed,
    run_network,
)
from .p4info import (
    P4InfoError,
    emit_type_decls,
    encode_config,
    load_config,
    type_to_json,
)
from .parser import ParseError, parse_decls, parse_program
from .reduction import EvalFuelError, NoMatchingCaseError, StuckTermError
from .server import ConfigError, EntityCodecError, ServerRefusedError, WildcardWriteError, lint_entity
from .syntax import is_value
from .typecheck import DEFAULT_FUEL, EMPTY_ENV, TypeCheckError, typecheck

EXIT_OK = 0
EXIT_TYPE_ERROR = 1
EXIT_INPUT_ERROR = 2
EXIT_RUNTIME_ERROR = 3

_INPUT_ERRORS = (
    ParseError,
    P4InfoError,
    ScenarioError,
    ConfigError,
    EntityCodecError,
    OSError,
    json.JSONDecodeError,
)
_RUNTIME_ERRORS = (
    NetworkDeadlock,
    NetworkFuelError,
    PreservationError,
    EvalFuelError,
    StuckTermError,
    NoMatchingCaseError,
    ServerRefusedError,
    WildcardWriteError,
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fp4r",
        description="Typed control-plane programs: check, encode, simulate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("typecheck", help="typecheck a program file")
    p_check.add_argument("program")
    p_check.add_argument(
        "--p4info",
        action="append",
        default=[],
        metavar="[NAME=]PATH",
        help="bind a server address (default name: file stem)",
    )
    p_check.add_argument("--decls", action="append", default=[],
                         help="type alias declarations to load")
    p_check.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    p_check.add_argument("--json", action="store_true")

    p_enc = sub.add_parser("encode", help="emit type declarations for a P4Info file")
    p_enc.add_argument("p4info")
    p_enc.add_argument("--decls", help="output path (default: stdout)")
    p_enc.add_argument("--json", action="store_true",
                       help="dump the encoded types as canonical AST JSON")

    p_run = sub.add_parser("run", help="run a scenario to completion")
    p_run.add_argument("scenario")
    p_run.add_argument("--fuel", type=int, default=10_000)
    p_run.add_argument("--check-invariants", action="store_true")
    p_run.add_argument("--trace", help="write the JSON trace to this path")
    p_run.add_argument("--json", action="store_true")

    p_net = sub.add_parser("check-network", help="report scenario well-typedness")
    p_net.add_argument("scenario")
    p_net.add_argument("--json", action="store_true")

    args = parser.parse_args(argv)
    try:
        if args.command == "typecheck":
            return _cmd_typecheck(args)
        if args.command == "encode":
            return _cmd_encode(args)
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_check_network(args)
    except TypeCheckError as exc:
        _emit_error(args, "type-error", str(exc))
        return EXIT_TYPE_ERROR
    except _INPUT_ERRORS as exc:
        _emit_error(args, "input-error", str(exc))
        return EXIT_INPUT_ERROR
    except _RUNTIME_ERRORS as exc:
        _emit_error(args, "runtime-error", str(exc))
        return EXIT_RUNTIME_ERROR


def _emit_error(args, kind: str, message: str):
    if getattr(args, "json", False):
        print(json.dumps({"ok": False, "error": kind, "message": message}))
    else:
        print(f"error ({kind}): {message}", file=sys.stderr)


def _load_address_table(specs: list[str]):
    addresses = {}
    for spec in specs:
        if "=" in spec:
            name, path = spec.split("=", 1)
        else:
            path = spec
            name = os.path.splitext(os.path.basename(path))[0]
        if name in addresses:
            raise ScenarioError(f"duplicate address name {name!r}")
        addresses[name] = encode_config(load_config(path))
    return addresses


def _cmd_typecheck(args) -> int:
    addresses = _load_address_table(args.p4info)
    aliases = {}
    for path in args.decls:
        with open(path, "r", encoding="utf-8") as fh:
            for name, ty in parse_decls(fh.read(), aliases).items():
                if name in aliases:
                    raise ScenarioError(f"duplicate type alias {name!r}")
                aliases[name] = ty
    with open(args.program, "r", encoding="utf-8") as fh:
        _, term = parse_program(fh.read(), addresses=addresses, aliases=aliases)
    ty = typecheck(EMPTY_ENV, term, fuel=args.fuel)
    rendered = printer.pretty_type(ty)
    if args.json:
        print(json.dumps({"ok": True, "type": rendered, "ast": type_to_json(ty)}))
    else:
        print(rendered)
    return EXIT_OK


def _cmd_encode(args) -> int:
    config = load_config(args.p4info)
    text = emit_type_decls(config)
    if args.json:
        tm, ta, tp = encode_config(config)
        print(
            json.dumps(
                {
                    "ok": True,
                    "table_matches": type_to_json(tm),
                    "table_actions": type_to_json(ta),
                    "action_params": type_to_json(tp),
                }
            )
        )
    if args.decls:
        with open(args.decls, "w", encoding="utf-8") as fh:
            fh.write(text)
    elif not args.json:
        print(text, end="")
    return EXIT_OK


def _lint_report(net) -> list[str]:
    warnings = []
    for sid, state in net.servers:
        for e in state.entities:
            for w in lint_entity(state.config, e):
                warnings.append(f"server {sid}: {w}")
    return warnings


def _cmd_run(args) -> int:
    net = load_scenario(args.scenario)
    ok, problems = network_well_typed(net)
    if not ok:
        if args.json:
            print(json.dumps({"ok": False, "error": "type-error", "problems": problems}))
        else:
            for p in problems:
                print(f"not well-typed: {p}", file=sys.stderr)
        return EXIT_TYPE_ERROR
    for w in _lint_report(net):
        print(f"warning: {w}", file=sys.stderr)
    final, trace = run_network(
        net, fuel=args.fuel, check_invariants=args.check_invariants
    )
    trace_doc = [ev.to_json() for ev in trace]
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            json.dump(trace_doc, fh, indent=2)
    all_done = all(is_value(t) for _, t in final.clients)
    doc = {
        "ok": all_done,
        "steps": len(trace),
        "final": network_to_json(final),
    }
    if args.json:
        doc["trace"] = trace_doc
        print(json.dumps(doc))
    else:
        print(f"completed in {len(trace)} steps")
        for cid, t in final.clients:
            print(f"client {cid}: {printer.pretty_term(t)}")
        for sid, s in final.servers:
            print(f"server {sid}: {len(s.entities)} entities, "
                  f"{len(s.channels)} channels")
    return EXIT_OK if all_done else EXIT_RUNTIME_ERROR


def _cmd_check_network(args) -> int:
    net = load_scenario(args.scenario)
    ok, problems = network_well_typed(net)
    warnings = _lint_report(net)
    if args.json:
        print(json.dumps({"ok": ok, "problems": problems, "warnings": warnings}))
    else:
        print("well-typed" if ok else "not well-typed")
        for p in problems:
            print(f"  problem: {p}")
        for w in warnings:
            print(f"  warning: {w}")
    return EXIT_OK if ok else EXIT_TYPE_ERROR


if __name__ == "__main__":
    sys.exit(main())

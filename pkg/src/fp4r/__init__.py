"""fp4r: a typed calculus for P4Runtime control-plane programs.

The package provides the surface-syntax parser and printer, the type
checker (singleton, union, and match types over structural subtyping), a
small-step evaluator, a table-server model with P4Info-derived
configurations, and a deterministic client/server network simulator.
"""

from .network import (
    Network,
    NetworkDeadlock,
    NetworkFuelError,
    PreservationError,
    ScenarioError,
    TraceEvent,
    load_scenario,
    network_step,
    network_to_json,
    network_well_typed,
    run_network,
)
from .p4info import (
    P4InfoError,
    chan_type,
    emit_type_decls,
    encode_config,
    load_config,
    parse_p4info,
    server_ref_type,
    to_config,
    type_to_json,
)
from .parser import ParseError, parse_decls, parse_program, parse_term, parse_type
from .printer import pretty_term, pretty_type
from .reduction import (
    Done,
    EvalFuelError,
    NoMatchingCaseError,
    Request,
    StuckTermError,
    Tau,
    run_tau,
    step,
)
from .server import (
    ActionParam,
    ConfigError,
    Entity,
    EntityCodecError,
    MatchField,
    ServerConfig,
    ServerRefusedError,
    ServerState,
    WildcardWriteError,
    conforms,
    entities_from_json_text,
    entities_to_json_text,
    entity_from_json,
    entity_to_json,
    eval_read,
    eval_write,
    lint_entity,
    server_step,
)
from .typecheck import (
    DEFAULT_FUEL,
    EMPTY_ENV,
    TypeCheckError,
    TypingEnv,
    disjoint,
    env_valid,
    member_of,
    normalize_type,
    subtype,
    type_valid,
    typecheck,
)

__all__ = [name for name in dir() if not name.startswith("_")]

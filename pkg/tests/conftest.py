import os

import pytest

from fp4r.p4info import encode_config, load_config
from fp4r.server import Entity, ServerState
from fp4r.syntax import AddrV, BytesV, IntV, Record, StringV, UnitV

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


@pytest.fixture(scope="session")
def data_dir() -> str:
    return DATA_DIR


@pytest.fixture(scope="session")
def switch_config():
    """The two-table IPv4/IPv6 configuration used across the suite."""
    return load_config(os.path.join(DATA_DIR, "simple", "switch.p4info.json"))


@pytest.fixture(scope="session")
def switch_types(switch_config):
    return encode_config(switch_config)


@pytest.fixture(scope="session")
def switch_addresses(switch_config):
    return {"switch": encode_config(switch_config)}


@pytest.fixture()
def switch_server(switch_config, switch_types):
    return ServerState(switch_config, (), AddrV("switch", *switch_types))


def lpm_match(field: str, octets, prefix: int) -> Record:
    return Record(
        (
            (
                field,
                Record(
                    (
                        (
                            "some",
                            Record(
                                (
                                    ("value", BytesV(tuple(octets))),
                                    ("prefixLen", IntV(prefix)),
                                )
                            ),
                        ),
                    )
                ),
            ),
        )
    )


@pytest.fixture(scope="session")
def ipv4_entry():
    """A conformant IPv4_table entry for the two-table configuration."""
    return Entity(
        "IPv4_table",
        lpm_match("IPv4_dst_addr", (10, 1, 0, 0), 32),
        "IPv4_forward",
        Record(
            (
                ("mac_dst", BytesV((8, 0, 0, 0, 10, 1))),
                ("port", BytesV((0, 1))),
            )
        ),
    )


@pytest.fixture(scope="session")
def drop_entry():
    return Entity(
        "IPv6_table",
        lpm_match("IPv6_dst_addr", (0xFE, 0x80, 0, 0), 64),
        "Drop",
        UnitV(),
    )


@pytest.fixture(scope="session")
def wildcard_query():
    return Entity("*", StringV("*"), "*", UnitV())

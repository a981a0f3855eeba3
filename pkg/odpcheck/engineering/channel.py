"""Channels between a client object and a server object.

A channel is a chain of six engineering objects, a stub, a binder and a
protocol object on each side:

    client -toStub-> stub -stubBinder-> binder -binderProtocol-> protocol
        -interworks-> protocol -protocolBinder-> binder -binderStub-> stub -toObject-> server
"""
from __future__ import annotations

import logging
from dataclasses import replace
from typing import Dict, List, Tuple

from odpcheck.engineering.containment import Containment
from odpcheck.errors import DuplicateChannel, EngineeringError, MissingChannelTemplates
from odpcheck.instance import Link, ObjectInstance, System
from odpcheck.metamodel import Model
from odpcheck.sorts import default_value

logger = logging.getLogger(__name__)

STUB, BINDER, PROTOCOL = "Stub", "Binder", "Protocol"
CHANNEL_TEMPLATES = (STUB, BINDER, PROTOCOL)

# (part suffix, template), client side first
PARTS: Tuple[Tuple[str, str], ...] = (
    ("client_stub", STUB),
    ("client_binder", BINDER),
    ("client_protocol", PROTOCOL),
    ("server_protocol", PROTOCOL),
    ("server_binder", BINDER),
    ("server_stub", STUB),
)

CHAIN_ROLES: Tuple[str, ...] = (
    "toStub",
    "stubBinder",
    "binderProtocol",
    "interworks",
    "protocolBinder",
    "binderStub",
    "toObject",
)

Chain = Tuple[str, ...]


def missing_channel_elements(m: Model) -> List[str]:
    missing = [f"template {t}" for t in CHANNEL_TEMPLATES if t not in m.templates]
    missing += [f"role {r}" for r in CHAIN_ROLES if r not in m.roles]
    return missing


def find_channels(client: str, server: str, s: System) -> List[Chain]:
    """Chains of six objects already linking ``client`` to ``server``, in id order."""
    found: List[Chain] = []

    def walk(current: str, depth: int, path: Tuple[str, ...]) -> None:
        role = CHAIN_ROLES[depth]
        for link in s.links_of(role):
            if link.source != current:
                continue
            if depth == len(CHAIN_ROLES) - 1:
                if link.target == server:
                    found.append(path)
            elif link.target not in path and link.target not in (client, server):
                walk(link.target, depth + 1, path + (link.target,))

    walk(client, 0, ())
    return sorted(set(found))


def _place_side(c: Containment, anchor: str, ids: List[str]) -> Containment:
    path = c.locate(anchor)
    if path is None:
        return c
    for oid in ids:
        c = c.place(oid, path)
    return c


def build_channel(client: str, server: str, s: System, m: Model) -> System:
    """Adds the six channel objects and the seven chain links between ``client`` and ``server``.

    Each side's objects join the cluster of the endpoint they serve when that
    endpoint is deployed.
    """
    for oid in (client, server):
        if oid not in s.objects:
            raise EngineeringError(f"object {oid} is not in system {s.name}")
    missing = missing_channel_elements(m)
    if missing:
        raise MissingChannelTemplates(missing)
    if find_channels(client, server, s):
        raise DuplicateChannel(f"a channel already links {client} to {server}")

    ids: Dict[str, str] = {}
    out = s
    for part, template in PARTS:
        oid = f"{client}_{server}_{part}"
        if oid in out.objects or oid in out.links:
            raise DuplicateChannel(f"id {oid} is already taken in {s.name}")
        of = m.closure(template)
        state = {attr: default_value(sort) for attr, sort in m.attributes_of(of).items()}
        out = out.with_object(ObjectInstance(oid, of, state))
        ids[part] = oid

    chain = [client] + [ids[part] for part, _ in PARTS] + [server]
    for role, source, target in zip(CHAIN_ROLES, chain, chain[1:]):
        out = out.with_link(Link(out.fresh_id(role), role, source, target))

    containment = _place_side(out.containment, client, [ids[p] for p, _ in PARTS[:3]])
    containment = _place_side(containment, server, [ids[p] for p, _ in PARTS[3:]])
    logger.debug("channel %s -> %s built with %s", client, server, ", ".join(chain[1:-1]))
    return replace(out, containment=containment)

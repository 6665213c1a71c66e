"""Scheduled infrastructure events delivered to the orchestrator.

Kept separate from the simulation kernel so the decision engine can consume
events without importing the kernel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

from .topology import NodeId, NodeSpec


@dataclass(frozen=True)
class NodeJoined:
    spec: NodeSpec
    links: Mapping[NodeId, float]

    def __post_init__(self):
        object.__setattr__(self, "links", dict(self.links))


@dataclass(frozen=True)
class NodeLeft:
    node: NodeId


@dataclass(frozen=True)
class LinkCostChanged:
    a: NodeId
    b: NodeId
    new_cost: float


EventChange = Union[NodeJoined, NodeLeft, LinkCostChanged]


@dataclass(frozen=True)
class Event:
    at_round: int
    change: EventChange

    def __post_init__(self):
        if self.at_round < 1:
            raise ValueError("event rounds start at 1")

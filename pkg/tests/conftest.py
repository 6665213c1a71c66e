"""Shared builders for the test suite."""

from pathlib import Path

import pytest

from hflsim.config import AggregationFrequency, HflConfiguration
from hflsim.topology import DataProfile, NodeSpec, Topology

DATA_DIR = Path(__file__).parent / "data"

FREQ = AggregationFrequency(local_epochs=2, local_rounds=2)


def iid_profile(per_class: int = 100, num_classes: int = 10) -> DataProfile:
    return DataProfile({c: per_class for c in range(num_classes)})


def pair_profile(first: int, second: int, per_class: int = 100) -> DataProfile:
    return DataProfile({first: per_class, second: per_class})


def paper_topology(
    client_cost: float = 2.0,
    la_cost: float = 10.0,
    cross_cost: float = 40.0,
    default_cost: float = 100.0,
) -> Topology:
    """Two clusters of four clients, two LAs, one cloud GA/artifact server."""
    specs = [
        NodeSpec("cloud", can_aggregate=True, has_service_artifacts=True),
        NodeSpec("la1", can_aggregate=True),
        NodeSpec("la2", can_aggregate=True),
    ]
    links = [("la1", "cloud", la_cost), ("la2", "cloud", la_cost)]
    for i in range(1, 9):
        name = f"c{i}"
        specs.append(NodeSpec(name, can_train=True, data_profile=iid_profile()))
        home, away = ("la1", "la2") if i <= 4 else ("la2", "la1")
        links.append((name, home, client_cost))
        links.append((name, away, cross_cost))
    return Topology.build(
        specs,
        links,
        default_link_cost=default_cost,
        artifact_server="cloud",
        ga_candidate="cloud",
    )


def paper_config(frequency: AggregationFrequency = FREQ) -> HflConfiguration:
    return HflConfiguration(
        ga="cloud",
        clusters={
            "la1": {"c1", "c2", "c3", "c4"},
            "la2": {"c5", "c6", "c7", "c8"},
        },
        frequency=frequency,
    )


@pytest.fixture
def topology():
    return paper_topology()


@pytest.fixture
def config():
    return paper_config()

"""Shared fixtures and scripted policies for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from netsiege.game import (
    AttackerKind,
    DefenderTypeParams,
    DefenderVerb,
    GameConfig,
    GraphParams,
    defender_action_count,
)
from netsiege.netgraph import NetworkGraph, NodeState


def build_graph(n: int, edges: list[tuple[int, int]], high_value: int = 0,
                vulns: list[float] | None = None) -> NetworkGraph:
    """Hand-built graph for deterministic game tests."""
    vulns = vulns if vulns is not None else [0.5] * n
    nodes = [
        NodeState(id=i, vulnerability=vulns[i], initial_vulnerability=vulns[i],
                  is_high_value=(i == high_value))
        for i in range(n)
    ]
    adjacency: list[set[int]] = [set() for _ in range(n)]
    for a, b in edges:
        adjacency[a].add(b)
        adjacency[b].add(a)
    return NetworkGraph(nodes=nodes, adjacency=adjacency)


def line_graph(n: int, high_value: int = 0, vulns: list[float] | None = None) -> NetworkGraph:
    return build_graph(n, [(i, i + 1) for i in range(n - 1)], high_value, vulns)


class ScriptedPolicy:
    """Plays a fixed action index every step (or cycles through a list)."""

    def __init__(self, indices, obs_dim: int | None = None):
        self.indices = list(indices) if isinstance(indices, (list, tuple)) else [indices]
        self.pos = 0
        self.obs_dim = obs_dim

    def act(self, obs, mask, rng, greedy=False, collect=True):
        idx = self.indices[self.pos % len(self.indices)]
        self.pos += 1
        return idx

    def record(self, reward, done):
        pass


class UniformRandomPolicy:
    """Samples uniformly over the valid-action mask."""

    def __init__(self, obs_dim: int | None = None):
        self.obs_dim = obs_dim

    def act(self, obs, mask, rng, greedy=False, collect=True):
        valid = np.flatnonzero(mask)
        return int(valid[rng.integers(len(valid))])

    def record(self, reward, done):
        pass


def do_nothing_defender(n_nodes: int) -> ScriptedPolicy:
    return ScriptedPolicy(defender_action_count(n_nodes) - 1)


@pytest.fixture
def default_config() -> GameConfig:
    return GameConfig()


@pytest.fixture
def desk_graph_params() -> GraphParams:
    return GraphParams(n_nodes=10, edge_density=0.6)


@pytest.fixture
def balanced_defender() -> DefenderTypeParams:
    return DefenderTypeParams()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)

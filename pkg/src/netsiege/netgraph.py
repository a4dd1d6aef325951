"""Random connected network topologies with per-node security attributes.

A graph is a set of nodes (machines) and undirected edges (connections).
Every node carries a vulnerability score, a true compromise flag that only
the attacker can see, and an alert flag that only the defender can see.
Exactly one node is the high-value target.  Isolating a node stashes its
incident edges so a later reconnect can restore them exactly.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from netsiege.errors import InvalidConfigError, InvalidTargetError

GENERATION_MAX_ATTEMPTS = 1000


@dataclass
class NodeState:
    """Mutable per-node state.

    ``vulnerability`` is the probability that a basic attack succeeds;
    ``initial_vulnerability`` is frozen at generation time so a restore can
    reset the node exactly.  ``compromised`` is attacker-visible truth,
    ``alert`` is the defender-visible noisy detection flag.
    """

    id: int
    vulnerability: float
    initial_vulnerability: float
    compromised: bool = False
    alert: bool = False
    is_high_value: bool = False
    isolated: bool = False


Edge = tuple[int, int]


def _norm_edge(a: int, b: int) -> Edge:
    return (a, b) if a < b else (b, a)


@dataclass
class NetworkGraph:
    """Undirected graph over ``NodeState`` objects.

    ``adjacency[i]`` is the set of neighbours of node *i*.  ``stashed_edges``
    maps a node id to the edges that were cut when it was isolated; each
    stashed edge is held by exactly one currently-isolated endpoint.
    """

    nodes: list[NodeState]
    adjacency: list[set[int]]
    stashed_edges: dict[int, set[Edge]] = field(default_factory=dict)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def edge_count(self) -> int:
        return sum(len(nbrs) for nbrs in self.adjacency) // 2

    def edges(self) -> list[Edge]:
        return sorted(
            _norm_edge(i, j) for i, nbrs in enumerate(self.adjacency) for j in nbrs if i < j
        )

    def has_edge(self, a: int, b: int) -> bool:
        return b in self.adjacency[a]

    def degree(self, node_id: int) -> int:
        return len(self.adjacency[node_id])

    def high_value_id(self) -> int:
        for node in self.nodes:
            if node.is_high_value:
                return node.id
        raise InvalidConfigError("graph has no high-value node")

    def check_node(self, node_id: int) -> None:
        if not (isinstance(node_id, (int, np.integer)) and 0 <= node_id < self.n_nodes):
            raise InvalidTargetError(f"unknown node id {node_id!r}")

    def copy(self) -> "NetworkGraph":
        """Independent deep copy; episodes each own their graph."""
        return NetworkGraph(
            nodes=[
                NodeState(
                    id=n.id,
                    vulnerability=n.vulnerability,
                    initial_vulnerability=n.initial_vulnerability,
                    compromised=n.compromised,
                    alert=n.alert,
                    is_high_value=n.is_high_value,
                    isolated=n.isolated,
                )
                for n in self.nodes
            ],
            adjacency=[set(nbrs) for nbrs in self.adjacency],
            stashed_edges={k: set(v) for k, v in self.stashed_edges.items()},
        )


def _is_connected(adjacency: list[set[int]]) -> bool:
    n = len(adjacency)
    if n == 0:
        return False
    seen = [False] * n
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        v = stack.pop()
        for w in adjacency[v]:
            if not seen[w]:
                seen[w] = True
                count += 1
                stack.append(w)
    return count == n


def generate_network(
    n: int,
    edge_density: float,
    vuln_range: tuple[float, float] = (0.2, 0.8),
    seed: int | np.random.Generator = 0,
) -> NetworkGraph:
    """Generate a connected random graph with ``n`` nodes.

    The target edge count is ``ceil(edge_density * n*(n-1)/2)``; edges are
    drawn uniformly without replacement and the draw is rejected and retried
    until the graph comes out connected.  Vulnerabilities are uniform over
    ``vuln_range`` and one node, chosen uniformly, is marked high-value.
    Fully deterministic for a fixed integer seed.
    """
    if n < 2:
        raise InvalidConfigError(f"need at least 2 nodes, got {n}")
    if not (0.0 < edge_density <= 1.0):
        raise InvalidConfigError(f"edge_density must be in (0, 1], got {edge_density}")
    lo, hi = vuln_range
    if not (0.0 <= lo <= hi <= 1.0):
        raise InvalidConfigError(f"vuln_range must satisfy 0 <= lo <= hi <= 1, got {vuln_range}")

    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    all_pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    m_target = int(np.ceil(edge_density * len(all_pairs)))
    if m_target < n - 1:
        raise InvalidConfigError(
            f"edge_density {edge_density} yields {m_target} edges; "
            f"a connected graph on {n} nodes needs at least {n - 1}"
        )

    adjacency: list[set[int]] | None = None
    for _ in range(GENERATION_MAX_ATTEMPTS):
        chosen = rng.choice(len(all_pairs), size=m_target, replace=False)
        candidate: list[set[int]] = [set() for _ in range(n)]
        for idx in chosen:
            a, b = all_pairs[idx]
            candidate[a].add(b)
            candidate[b].add(a)
        if _is_connected(candidate):
            adjacency = candidate
            break
    if adjacency is None:
        raise InvalidConfigError(
            f"could not generate a connected graph with n={n}, density={edge_density} "
            f"after {GENERATION_MAX_ATTEMPTS} attempts"
        )

    vulns = rng.uniform(lo, hi, size=n)
    high_value = int(rng.integers(n))

    nodes = [
        NodeState(
            id=i,
            vulnerability=float(vulns[i]),
            initial_vulnerability=float(vulns[i]),
            is_high_value=(i == high_value),
        )
        for i in range(n)
    ]
    return NetworkGraph(nodes=nodes, adjacency=adjacency)


def isolate(graph: NetworkGraph, node_id: int) -> NetworkGraph:
    """Cut every edge incident to ``node_id``, remembering them for reconnect.

    Idempotent: isolating an already-isolated node changes nothing.
    """
    graph.check_node(node_id)
    stash = graph.stashed_edges.setdefault(node_id, set())
    for nbr in sorted(graph.adjacency[node_id]):
        graph.adjacency[nbr].discard(node_id)
        stash.add(_norm_edge(node_id, nbr))
    graph.adjacency[node_id].clear()
    if not stash:
        graph.stashed_edges.pop(node_id, None)
    graph.nodes[node_id].isolated = True
    return graph


def reconnect(graph: NetworkGraph, node_id: int) -> NetworkGraph:
    """Restore the edges stashed when ``node_id`` was isolated.

    An edge whose other endpoint is still isolated stays stashed, but moves
    to that endpoint's stash so it comes back when *that* node reconnects.
    """
    graph.check_node(node_id)
    graph.nodes[node_id].isolated = False
    stash = graph.stashed_edges.pop(node_id, set())
    for edge in sorted(stash):
        a, b = edge
        other = b if a == node_id else a
        if graph.nodes[other].isolated:
            graph.stashed_edges.setdefault(other, set()).add(edge)
        else:
            graph.adjacency[a].add(b)
            graph.adjacency[b].add(a)
    return graph


def compromised_fraction(graph: NetworkGraph) -> float:
    """Fraction of nodes currently compromised."""
    return sum(1 for n in graph.nodes if n.compromised) / graph.n_nodes


def compromised_ids(graph: NetworkGraph) -> list[int]:
    return [n.id for n in graph.nodes if n.compromised]


def accessible_ids(graph: NetworkGraph) -> set[int]:
    """Nodes adjacent to at least one compromised node (the attack frontier)."""
    frontier: set[int] = set()
    for node in graph.nodes:
        if node.compromised:
            frontier.update(graph.adjacency[node.id])
    return frontier


# ---------------------------------------------------------------------------
# Text export/import
# ---------------------------------------------------------------------------

def graph_to_text(graph: NetworkGraph) -> str:
    """Serialize generation-time attributes (ids, vulnerabilities, the
    high-value flag and the edge list) to a plain-text document."""
    out = io.StringIO()
    out.write(f"nodes {graph.n_nodes}\n")
    for node in graph.nodes:
        out.write(f"node {node.id} {node.vulnerability!r} {int(node.is_high_value)}\n")
    edges = graph.edges()
    out.write(f"edges {len(edges)}\n")
    for a, b in edges:
        out.write(f"edge {a} {b}\n")
    return out.getvalue()


def graph_from_text(text: str) -> NetworkGraph:
    """Parse a document produced by :func:`graph_to_text`."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("nodes "):
        raise InvalidConfigError("graph document must start with a 'nodes <count>' line")
    n = int(lines[0].split()[1])
    if n < 2:
        raise InvalidConfigError(f"graph document declares {n} nodes; need at least 2")
    nodes: list[NodeState] = []
    adjacency: list[set[int]] = [set() for _ in range(n)]
    pos = 1
    for _ in range(n):
        parts = lines[pos].split()
        if parts[0] != "node":
            raise InvalidConfigError(f"expected node record, got {lines[pos]!r}")
        nid, vuln, hv = int(parts[1]), float(parts[2]), bool(int(parts[3]))
        nodes.append(
            NodeState(id=nid, vulnerability=vuln, initial_vulnerability=vuln, is_high_value=hv)
        )
        pos += 1
    if sum(node.is_high_value for node in nodes) != 1:
        raise InvalidConfigError("graph document must mark exactly one high-value node")
    if not lines[pos].startswith("edges "):
        raise InvalidConfigError("missing 'edges <count>' line")
    m = int(lines[pos].split()[1])
    pos += 1
    for _ in range(m):
        parts = lines[pos].split()
        if parts[0] != "edge":
            raise InvalidConfigError(f"expected edge record, got {lines[pos]!r}")
        a, b = int(parts[1]), int(parts[2])
        if a == b or not (0 <= a < n and 0 <= b < n):
            raise InvalidConfigError(f"bad edge {a}-{b}")
        adjacency[a].add(b)
        adjacency[b].add(a)
        pos += 1
    nodes.sort(key=lambda node: node.id)
    return NetworkGraph(nodes=nodes, adjacency=adjacency)


def save_graph(graph: NetworkGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(graph_to_text(graph))


def load_graph(path) -> NetworkGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return graph_from_text(fh.read())

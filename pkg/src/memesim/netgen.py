"""Synthetic social network generation.

Undirected scale-free graphs grown by preferential attachment (optionally
with triad closure for higher clustering), plus structural statistics and a
plain edge-list interchange format.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError, InputError


class Generator(Enum):
    BARABASI_ALBERT = "ba"
    HOLME_KIM = "holme_kim"


@dataclass(frozen=True)
class NetSpec:
    """Recipe for one synthetic network.

    ``m`` edges are attached per new node, so the mean degree of the grown
    graph approaches ``2 m``. ``triad_prob`` only applies to the Holme-Kim
    variant and controls how often an attachment is followed by a
    triad-closure step.
    """

    generator: Generator = Generator.BARABASI_ALBERT
    n: int = 1000
    m: int = 10
    triad_prob: float = 0.0
    seed: int = 0

    def validate(self):
        if not (1 <= self.m < self.n):
            raise ConfigError(
                f"need 1 <= m < n, got m={self.m}, n={self.n}"
            )
        if not (0.0 <= self.triad_prob <= 1.0):
            raise ConfigError(f"triad_prob must be in [0, 1], got {self.triad_prob}")


@dataclass(frozen=True)
class Graph:
    """Static undirected simple graph in adjacency form.

    ``adjacency[i]`` is a sorted int64 array of the neighbors of node ``i``.
    Instances are immutable and safe to share across worker processes.
    """

    node_count: int
    adjacency: tuple
    edge_count: int

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    def neighbor_lists(self) -> list:
        """Adjacency as plain Python lists (fast iteration in the simulator)."""
        return [list(map(int, a)) for a in self.adjacency]


def _finalize(adj_sets, n) -> Graph:
    adjacency = tuple(
        np.array(sorted(adj_sets[i]), dtype=np.int64) for i in range(n)
    )
    edge_count = sum(len(a) for a in adjacency) // 2
    return Graph(node_count=n, adjacency=adjacency, edge_count=edge_count)


def generate(spec: NetSpec) -> Graph:
    """Grow a network according to ``spec``.

    Both generators start from an ``m``-node clique; every later node
    attaches to ``m`` distinct existing nodes chosen with probability
    proportional to degree (no multi-edges, no self-loops). The Holme-Kim
    variant follows each attachment after the first with a triad-closure
    step with probability ``triad_prob``: the new node links to a random
    neighbor of the node it just attached to, which closes a triangle.
    Generation is deterministic given ``spec.seed``.
    """
    spec.validate()
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    n, m = spec.n, spec.m
    do_triads = spec.generator is Generator.HOLME_KIM and spec.triad_prob > 0

    adj = [set() for _ in range(n)]
    # degree-weighted target pool: node i appears deg(i) times
    repeated = []
    for i in range(m):
        for j in range(i + 1, m):
            adj[i].add(j)
            adj[j].add(i)
            repeated.append(i)
            repeated.append(j)

    for v in range(m, n):
        targets = []
        chosen = set()
        prev = -1
        while len(targets) < m:
            t = -1
            if not repeated:
                # m = 1 only: the 1-node seed clique has no edges yet
                t = 0
            else:
                if do_triads and prev >= 0 and rng.random() < spec.triad_prob:
                    # triad closure: random neighbor of the last attached node
                    candidates = [w for w in adj[prev] if w != v and w not in chosen]
                    if candidates:
                        t = candidates[rng.integers(len(candidates))]
                if t < 0:
                    t = repeated[rng.integers(len(repeated))]
                    if t in chosen:
                        continue
            chosen.add(t)
            targets.append(t)
            prev = t
        for t in targets:
            adj[v].add(t)
            adj[t].add(v)
            repeated.append(v)
            repeated.append(t)

    return _finalize(adj, n)


def clustering_coefficient(g: Graph) -> float:
    """Average local clustering coefficient.

    Nodes of degree < 2 contribute 0, which keeps star graphs at exactly 0.
    """
    neighbor_sets = [set(map(int, a)) for a in g.adjacency]
    total = 0.0
    for i in range(g.node_count):
        nbrs = g.adjacency[i]
        k = len(nbrs)
        if k < 2:
            continue
        links = 0
        si = neighbor_sets[i]
        for j in map(int, nbrs):
            # count each triangle edge once per ordered pair, halve below
            links += len(si & neighbor_sets[j])
        total += links / (k * (k - 1))
    return total / g.node_count


def is_connected(g: Graph) -> bool:
    if g.node_count == 0:
        return True
    seen = np.zeros(g.node_count, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        i = stack.pop()
        for j in g.adjacency[i]:
            if not seen[j]:
                seen[j] = True
                stack.append(int(j))
    return bool(seen.all())


def validate_graph(g: Graph):
    """Full structural scan: symmetry, no self-loops, no duplicate edges."""
    for i in range(g.node_count):
        a = g.adjacency[i]
        if len(a) != len(set(map(int, a))):
            raise AssertionError(f"duplicate edges at node {i}")
        for j in map(int, a):
            if j == i:
                raise AssertionError(f"self-loop at node {i}")
            if i not in g.adjacency[j]:
                raise AssertionError(f"asymmetric edge {i}->{j}")


def write_edge_list(g: Graph, path):
    """Write one ``i j`` pair per line, each undirected edge listed once."""
    with open(path, "w", encoding="utf-8") as f:
        for i in range(g.node_count):
            for j in map(int, g.adjacency[i]):
                if i < j:
                    f.write(f"{i} {j}\n")


def read_edge_list(path) -> Graph:
    """Load a graph written by :func:`write_edge_list` (or any i-j pair file)."""
    edges = []
    max_node = -1
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise InputError(f"malformed edge list line {line_no}: {line.strip()!r}")
            i, j = int(parts[0]), int(parts[1])
            if i == j:
                continue
            edges.append((i, j))
            max_node = max(max_node, i, j)
    n = max_node + 1
    adj = [set() for _ in range(n)]
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)
    return _finalize(adj, n)

"""Contact graphs over components, random complementary splits, and partial enumeration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .mesh import sample_surface

DEFAULT_TAU = 0.05
CONTACT_SAMPLES = 2048


class ContactGraphError(ValueError):
    def __init__(self, pieces):
        self.pieces = [sorted(p) for p in pieces]
        super().__init__(f"contact graph is disconnected: pieces {self.pieces}")


@dataclass(frozen=True)
class ContactGraph:
    nodes: tuple
    edges: frozenset  # of frozenset({u, v})

    def __post_init__(self):
        nodes = set(self.nodes)
        for e in self.edges:
            if len(e) != 2 or not e <= nodes:
                raise ValueError(f"bad edge {sorted(e)}")

    @classmethod
    def from_edges(cls, nodes, edges) -> "ContactGraph":
        return cls(tuple(sorted(nodes)), frozenset(frozenset(e) for e in edges))

    def neighbors(self, u) -> set:
        return {v for e in self.edges if u in e for v in e if v != u}

    def adjacency(self) -> dict:
        adj = {u: set() for u in self.nodes}
        for e in self.edges:
            u, v = tuple(e)
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def sorted_edges(self) -> list:
        return sorted(tuple(sorted(e)) for e in self.edges)

    def components_of(self, subset) -> list:
        """Connected pieces of the subgraph induced by ``subset``."""
        subset = set(subset)
        adj = self.adjacency()
        seen, pieces = set(), []
        for s in sorted(subset):
            if s in seen:
                continue
            piece, stack = set(), [s]
            while stack:
                u = stack.pop()
                if u in piece:
                    continue
                piece.add(u)
                stack.extend(adj[u] & subset - piece)
            seen |= piece
            pieces.append(piece)
        return pieces

    def is_connected(self, subset=None) -> bool:
        subset = self.nodes if subset is None else subset
        return len(self.components_of(subset)) == 1


def min_surface_distance(a, b, rng, samples: int = CONTACT_SAMPLES) -> float:
    pa, _ = sample_surface([a], samples, rng)
    pb, _ = sample_surface([b], samples, rng)
    d, _ = cKDTree(pa).query(pb, k=1)
    return float(d.min())


def build_contact_graph(components, tau: float = DEFAULT_TAU, rng_seed=0,
                        samples: int = CONTACT_SAMPLES) -> ContactGraph:
    """Connect components whose sampled surfaces come closer than ``tau``.

    Raises :class:`ContactGraphError` if the result is disconnected.
    """
    if not components:
        raise ValueError("need at least one component")
    if tau <= 0:
        raise ValueError("tau must be positive")
    rng = np.random.default_rng(rng_seed)
    clouds = [sample_surface([c.mesh], samples, rng)[0] for c in components]
    trees = [cKDTree(p) for p in clouds]
    edges = []
    for i in range(len(components)):
        for j in range(i + 1, len(components)):
            d, _ = trees[i].query(clouds[j], k=1)
            if d.min() < tau:
                edges.append((components[i].id, components[j].id))
    graph = ContactGraph.from_edges([c.id for c in components], edges)
    pieces = graph.components_of(graph.nodes)
    if len(pieces) != 1:
        raise ContactGraphError(pieces)
    return graph


@dataclass(frozen=True)
class IdSplit:
    query: tuple
    complement: tuple


def split_random(graph: ContactGraph, rng_seed) -> IdSplit:
    """Grow a random connected query side; the rest of the nodes form the complement.

    The query size is uniform on ``[1, m - 1]``.  Growth starts at a uniformly
    chosen node and repeatedly absorbs a uniformly chosen frontier node.  The
    complement may be disconnected.
    """
    m = len(graph.nodes)
    if m < 2:
        raise ValueError("cannot split a graph with fewer than two nodes")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    adj = graph.adjacency()
    size = int(rng.integers(1, m))
    start = graph.nodes[int(rng.integers(m))]
    chosen = {start}
    frontier = set(adj[start])
    while len(chosen) < size:
        if not frontier:
            raise ValueError("graph is disconnected; cannot grow query side")
        pick = sorted(frontier)[int(rng.integers(len(frontier)))]
        chosen.add(pick)
        frontier |= adj[pick]
        frontier -= chosen
    query = tuple(sorted(chosen))
    complement = tuple(n for n in graph.nodes if n not in chosen)
    return IdSplit(query, complement)


def enumerate_partials(graph: ContactGraph, max_count: int | None = None) -> list:
    """Connected induced subgraphs as sorted id tuples, in lexicographic order.

    Enumeration stops after ``max_count`` subsets.  Prefixes are pruned when
    they cannot become connected using only nodes that sort after their last
    element.
    """
    order = sorted(graph.nodes)
    adj = graph.adjacency()
    out: list = []

    def reachable_ok(prefix, last_pos):
        allowed = set(prefix) | set(order[last_pos + 1:])
        start = prefix[0]
        seen, stack = {start}, [start]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v in allowed and v not in seen:
                    seen.add(v)
                    stack.append(v)
        return set(prefix) <= seen

    def connected(prefix):
        s = set(prefix)
        seen, stack = {prefix[0]}, [prefix[0]]
        while stack:
            u = stack.pop()
            for v in adj[u] & s:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == len(s)

    def dfs(prefix, last_pos):
        if max_count is not None and len(out) >= max_count:
            return
        if connected(prefix):
            out.append(tuple(prefix))
        for pos in range(last_pos + 1, len(order)):
            if max_count is not None and len(out) >= max_count:
                return
            nxt = prefix + [order[pos]]
            if reachable_ok(nxt, pos):
                dfs(nxt, pos)

    for pos, node in enumerate(order):
        if max_count is not None and len(out) >= max_count:
            break
        dfs([node], pos)
    return out

"""Regenerate ``connected_graphs.txt``: every connected simple graph on 1..8 nodes, up to isomorphism.

Graphs on up to 7 nodes come from the networkx graph atlas.  Every connected
8-node graph has a non-cut vertex, so it arises from a connected 7-node graph
plus one vertex joined to a nonempty neighbor set; duplicates are removed by
a Weisfeiler-Lehman hash followed by exact isomorphism tests within a bucket.

Each output line is ``n mask`` where bit ``k`` of ``mask`` marks the k-th pair
``(i, j)``, ``i < j``, in ``itertools.combinations(range(n), 2)`` order.

Needs networkx (not a runtime dependency); takes about a minute.
"""

import itertools
from pathlib import Path

import networkx as nx


def mask_of(g, n):
    pairs = list(itertools.combinations(range(n), 2))
    return sum(1 << k for k, (i, j) in enumerate(pairs) if g.has_edge(i, j))


def main():
    rows = []
    atlas = [g for g in nx.graph_atlas_g() if g.number_of_nodes() >= 1 and nx.is_connected(g)]
    for g in atlas:
        rows.append((g.number_of_nodes(), mask_of(g, g.number_of_nodes())))
    buckets = {}
    for g in (g for g in atlas if g.number_of_nodes() == 7):
        for nbrs in range(1, 1 << 7):
            h = g.copy()
            h.add_edges_from((7, i) for i in range(7) if nbrs >> i & 1)
            key = nx.weisfeiler_lehman_graph_hash(h, iterations=3)
            bucket = buckets.setdefault(key, [])
            if not any(nx.is_isomorphic(h, r) for r in bucket):
                bucket.append(h)
                rows.append((8, mask_of(h, 8)))
    out = Path(__file__).with_name("connected_graphs.txt")
    out.write_text("".join(f"{n} {m}\n" for n, m in rows), encoding="utf-8")
    print(f"wrote {len(rows)} graphs to {out}")


if __name__ == "__main__":
    main()

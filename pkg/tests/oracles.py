"""Independent reference implementations used by the tests.

Nothing here imports the package's algorithms: these are deliberately naive
re-derivations (brute force, double loops, exact geometry) to compare against.
"""

import itertools
from pathlib import Path

import numpy as np

GRAPH_TABLE = Path(__file__).parent / "data" / "connected_graphs.txt"
# connected graphs on n unlabeled nodes, n = 1..8
CONNECTED_COUNTS = {1: 1, 2: 1, 3: 2, 4: 6, 5: 21, 6: 112, 7: 853, 8: 11117}


# -- graphs -------------------------------------------------------------------


def graph_table():
    """``(n, edges)`` for every connected graph on 1..8 nodes up to isomorphism."""
    out = []
    for line in GRAPH_TABLE.read_text(encoding="utf-8").split("\n"):
        if not line.strip():
            continue
        n, mask = map(int, line.split())
        pairs = itertools.combinations(range(n), 2)
        out.append((n, [p for k, p in enumerate(pairs) if mask >> k & 1]))
    return out


def brute_connected_subsets(nodes, edges):
    """All nonempty node subsets whose induced subgraph is connected, as sorted tuples."""
    nodes = sorted(nodes)
    adj = {u: set() for u in nodes}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    found = []
    for r in range(1, len(nodes) + 1):
        for subset in itertools.combinations(nodes, r):
            s = set(subset)
            reached = {subset[0]}
            frontier = [subset[0]]
            while frontier:
                u = frontier.pop()
                for v in adj[u]:
                    if v in s and v not in reached:
                        reached.add(v)
                        frontier.append(v)
            if reached == s:
                found.append(subset)
    return sorted(found)


# -- exact triangle geometry (closest-point formulas) -------------------------


def point_triangle_distance(p, a, b, c):
    ab, ac, ap = b - a, c - a, p - a
    d1, d2 = ab @ ap, ac @ ap
    if d1 <= 0 and d2 <= 0:
        return np.linalg.norm(p - a)
    bp = p - b
    d3, d4 = ab @ bp, ac @ bp
    if d3 >= 0 and d4 <= d3:
        return np.linalg.norm(p - b)
    vc = d1 * d4 - d3 * d2
    if vc <= 0 and d1 >= 0 and d3 <= 0:
        return np.linalg.norm(p - (a + d1 / (d1 - d3) * ab))
    cp = p - c
    d5, d6 = ab @ cp, ac @ cp
    if d6 >= 0 and d5 <= d6:
        return np.linalg.norm(p - c)
    vb = d5 * d2 - d1 * d6
    if vb <= 0 and d2 >= 0 and d6 <= 0:
        return np.linalg.norm(p - (a + d2 / (d2 - d6) * ac))
    va = d3 * d6 - d5 * d4
    if va <= 0 and (d4 - d3) >= 0 and (d5 - d6) >= 0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return np.linalg.norm(p - (b + w * (c - b)))
    denom = 1.0 / (va + vb + vc)
    q = a + ab * (vb * denom) + ac * (vc * denom)
    return np.linalg.norm(p - q)


def segment_distance(p1, q1, p2, q2):
    d1, d2, r = q1 - p1, q2 - p2, p1 - p2
    a, e, f = d1 @ d1, d2 @ d2, d2 @ r
    c = d1 @ r
    b = d1 @ d2
    denom = a * e - b * b
    s = np.clip((b * f - c * e) / denom, 0.0, 1.0) if denom > 1e-18 else 0.0
    t = (b * s + f) / e
    if t < 0:
        t, s = 0.0, np.clip(-c / a, 0.0, 1.0)
    elif t > 1:
        t, s = 1.0, np.clip((b - c) / a, 0.0, 1.0)
    return np.linalg.norm((p1 + d1 * s) - (p2 + d2 * t))


def _segment_hits_triangle(p, q, a, b, c, eps=1e-12):
    d = q - p
    e1, e2 = b - a, c - a
    h = np.cross(d, e2)
    det = e1 @ h
    if abs(det) < eps:
        return False
    s = p - a
    u = (s @ h) / det
    if u < 0 or u > 1:
        return False
    qv = np.cross(s, e1)
    v = (d @ qv) / det
    if v < 0 or u + v > 1:
        return False
    t = (e2 @ qv) / det
    return 0 <= t <= 1


def triangle_distance(t1, t2):
    for (p, q) in ((t1[0], t1[1]), (t1[1], t1[2]), (t1[2], t1[0])):
        if _segment_hits_triangle(p, q, *t2):
            return 0.0
    for (p, q) in ((t2[0], t2[1]), (t2[1], t2[2]), (t2[2], t2[0])):
        if _segment_hits_triangle(p, q, *t1):
            return 0.0
    best = min(point_triangle_distance(p, *t2) for p in t1)
    best = min(best, min(point_triangle_distance(p, *t1) for p in t2))
    for i in range(3):
        for j in range(3):
            best = min(best, segment_distance(t1[i], t1[(i + 1) % 3], t2[j], t2[(j + 1) % 3]))
    return float(best)


def mesh_distance(m1, m2, cutoff):
    """Exact min distance between two triangle soups, or ``cutoff`` if it is at least that."""
    T1 = m1.vertices[m1.triangles]
    T2 = m2.vertices[m2.triangles]
    lo1, hi1 = T1.min(axis=1), T1.max(axis=1)
    lo2, hi2 = T2.min(axis=1), T2.max(axis=1)
    gap = np.maximum(0.0, np.maximum(lo1[:, None] - hi2[None], lo2[None] - hi1[:, None]))
    box_d = np.linalg.norm(gap, axis=-1)
    best = cutoff
    for i, j in zip(*np.nonzero(box_d < cutoff)):
        if box_d[i, j] < best:
            best = min(best, triangle_distance(T1[i], T2[j]))
            if best == 0.0:
                return 0.0
    return best


# -- losses -------------------------------------------------------------------


def ranking_loss_loops(E, alpha):
    n = len(E)
    total = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                total += max(0.0, E[i][i] - E[i][j] + alpha)
    for j in range(n):
        for i in range(n):
            if i != j:
                total += max(0.0, E[j][j] - E[i][j] + alpha)
    return total


def threshold_loss_loops(E, alpha, t):
    n = len(E)
    pos = sum(max(0.0, E[i][i] - (t - alpha / 2)) for i in range(n)) / n
    neg = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                neg += max(0.0, (t + alpha / 2) - E[i][j])
    return pos + neg / (n * (n - 1))


def complementarity_loops(fx, gx, fy, gy):
    e = 0.0
    for k in range(len(fx)):
        e += max(0.0, fx[k] - gy[k]) ** 2
        e += max(0.0, fy[k] - gx[k]) ** 2
    return e

"""Triangle meshes, primitive builders and surface point sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class GeometryError(ValueError):
    pass


@dataclass
class Mesh:
    vertices: np.ndarray  # (V, 3) float64
    triangles: np.ndarray  # (T, 3) int64

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if len(self.triangles) == 0:
            raise GeometryError("mesh has no triangles")
        if not np.all(np.isfinite(self.vertices)):
            raise GeometryError("mesh has non-finite vertices")
        if self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices):
            raise GeometryError("triangle index out of range")

    def triangle_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        return 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)

    @property
    def area(self) -> float:
        return float(self.triangle_areas().sum())

    def transformed(self, scale=1.0, offset=(0.0, 0.0, 0.0)) -> "Mesh":
        return Mesh(self.vertices * scale + np.asarray(offset, dtype=np.float64), self.triangles)

    @staticmethod
    def merge(meshes) -> "Mesh":
        verts, tris, base = [], [], 0
        for m in meshes:
            verts.append(m.vertices)
            tris.append(m.triangles + base)
            base += len(m.vertices)
        return Mesh(np.concatenate(verts), np.concatenate(tris))


@dataclass
class Component:
    id: str
    mesh: Mesh
    label: str = ""


# Outward-facing quads of a unit cube, as corner indices into _CUBE_CORNERS.
_CUBE_CORNERS = np.array([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], dtype=float)
_CUBE_QUADS = [
    (0, 1, 3, 2),  # x = 0
    (4, 6, 7, 5),  # x = 1
    (0, 4, 5, 1),  # y = 0
    (2, 3, 7, 6),  # y = 1
    (0, 2, 6, 4),  # z = 0
    (1, 5, 7, 3),  # z = 1
]


def box(lo, hi) -> Mesh:
    """Axis-aligned box between corners ``lo`` and ``hi``; 12 triangles."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(hi <= lo):
        raise GeometryError(f"degenerate box {lo} .. {hi}")
    verts = lo + _CUBE_CORNERS * (hi - lo)
    tris = []
    for a, b, c, d in _CUBE_QUADS:
        tris += [(a, b, c), (a, c, d)]
    return Mesh(verts, np.array(tris))


def frustum(center, radius_bottom, radius_top, height, segments=16, caps=True) -> Mesh:
    """Closed truncated cone along +z starting at ``center``; a cylinder if radii match."""
    cx, cy, cz = center
    ang = np.linspace(0.0, 2 * np.pi, segments, endpoint=False)
    ring = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    bottom = np.column_stack([cx + radius_bottom * ring[:, 0], cy + radius_bottom * ring[:, 1],
                              np.full(segments, cz)])
    top = np.column_stack([cx + radius_top * ring[:, 0], cy + radius_top * ring[:, 1],
                           np.full(segments, cz + height)])
    verts = [bottom, top]
    tris = []
    for i in range(segments):
        j = (i + 1) % segments
        tris += [(i, j, segments + j), (i, segments + j, segments + i)]
    if caps:
        cb = 2 * segments
        ct = cb + 1
        verts.append(np.array([[cx, cy, cz], [cx, cy, cz + height]]))
        for i in range(segments):
            j = (i + 1) % segments
            tris += [(cb, j, i), (ct, segments + i, segments + j)]
    return Mesh(np.concatenate(verts), np.array(tris))


def cylinder(center, radius, height, segments=16) -> Mesh:
    return frustum(center, radius, radius, height, segments)


def sample_surface(meshes, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Area-weighted uniform samples on the union of ``meshes``.

    Returns the points and the index of the triangle (in concatenation order)
    each point was drawn from.
    """
    merged = Mesh.merge(meshes)
    areas = merged.triangle_areas()
    total = areas.sum()
    if not total > 0:
        raise GeometryError("cannot sample a zero-area surface")
    tri_idx = rng.choice(len(areas), size=n, p=areas / total)
    u = rng.random((n, 2))
    su = np.sqrt(u[:, 0])
    w0 = 1.0 - su
    w1 = su * (1.0 - u[:, 1])
    w2 = su * u[:, 1]
    p = merged.vertices[merged.triangles[tri_idx]]
    pts = w0[:, None] * p[:, 0] + w1[:, None] * p[:, 1] + w2[:, None] * p[:, 2]
    return pts, tri_idx


def bbox_center(points: np.ndarray) -> np.ndarray:
    return 0.5 * (points.min(axis=0) + points.max(axis=0))


def sample_point_cloud(components, n: int = 1024, rng_seed=0) -> np.ndarray:
    """Sample ``n`` surface points and translate their bounding-box center to the origin.

    No rescaling is applied; partial shapes keep the scale of their object.
    """
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    pts, _ = sample_surface([c.mesh if isinstance(c, Component) else c for c in components], n, rng)
    return pts - bbox_center(pts)

"""Procedural component assemblies for table, chair and lamp categories.

Each template builds an object from labeled slots with randomized primitive
dimensions and per-slot style variants, scales it to unit radius, and keeps
only assemblies whose contact graph is connected.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import DEFAULT_TAU, ContactGraph, ContactGraphError, build_contact_graph
from .mesh import Component, Mesh, box, cylinder, frustum

CATEGORIES = ("table", "chair", "lamp")
TRAIN_FRACTION = 0.8
MAX_RETRIES = 20


@dataclass
class GeneratorConfig:
    category: str = "table"
    n_objects: int = 20
    variants: int = 3  # style variants available per slot
    tau: float = DEFAULT_TAU

    def validate(self):
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category {self.category!r}; expected one of {CATEGORIES}")
        if self.n_objects < 1:
            raise ValueError("n_objects must be at least 1")
        if self.variants < 1:
            raise ValueError("variants must be at least 1")
        if self.tau <= 0:
            raise ValueError("tau must be positive")


@dataclass
class ShapeObject:
    id: str
    category: str
    components: list
    graph: ContactGraph
    split: str = "train"

    def component(self, cid: str) -> Component:
        for c in self.components:
            if c.id == cid:
                return c
        raise KeyError(f"object {self.id} has no component {cid!r}")

    def select(self, ids) -> list:
        return [self.component(i) for i in ids]


@dataclass
class Dataset:
    objects: list
    config: dict = field(default_factory=dict)

    def split(self, tag: str) -> list:
        return [o for o in self.objects if o.split == tag]

    @property
    def train(self) -> list:
        return self.split("train")

    @property
    def test(self) -> list:
        return self.split("test")

    def get(self, object_id: str) -> ShapeObject:
        for o in self.objects:
            if o.id == object_id:
                return o
        raise KeyError(f"unknown object id {object_id!r}")


def _u(rng, lo, hi):
    return float(rng.uniform(lo, hi))


def _leg(rng, style, x, y, z0, height, thick):
    if style == 0:
        h = thick / 2
        return box((x - h, y - h, z0), (x + h, y + h, z0 + height))
    if style == 1:
        return cylinder((x, y, z0), thick / 2, height, segments=12)
    # tapered: wide at the top
    return frustum((x, y, z0), thick * 0.3, thick * 0.6, height, segments=12)


def _table(rng, variants):
    W = _u(rng, 1.0, 1.8)
    Dp = _u(rng, 0.6, 1.2)
    tt = _u(rng, 0.04, 0.1)
    H = _u(rng, 0.6, 1.0)
    lt = _u(rng, 0.05, 0.1)
    inset = _u(rng, 0.05, 0.12)
    leg_style = int(rng.integers(variants)) % 3
    top_style = int(rng.integers(variants)) % 2
    z_leg = H - tt
    if top_style == 0:
        top = box((-W / 2, -Dp / 2, z_leg), (W / 2, Dp / 2, H))
    else:
        r = 0.5 * np.hypot(W, Dp) * 0.8
        top = cylinder((0.0, 0.0, z_leg), r, tt, segments=24)
        # keep legs under a round top
        W, Dp = np.sqrt(2) * r * 0.9, np.sqrt(2) * r * 0.9
    lx = W / 2 - inset
    ly = Dp / 2 - inset
    parts = [Component("top", top, "top")]
    for side, x in (("left", -lx), ("right", lx)):
        legs = Mesh.merge([_leg(rng, leg_style, x, y, 0.0, z_leg, lt) for y in (-ly, ly)])
        parts.append(Component(f"legs_{side}", legs, "leg"))
    half = lt / 2 if leg_style != 2 else lt * 0.3
    z_shelf = None
    if rng.random() < 0.5:
        z_shelf = _u(rng, 0.08, 0.2) * H
        st = _u(rng, 0.02, 0.04)
        shelf = box((-lx, -ly, z_shelf), (lx, ly, z_shelf + st))
        parts.append(Component("shelf", shelf, "shelf"))
    zs_top = None
    if rng.random() < 0.6:
        zs = _u(rng, 0.35, 0.55) * z_leg
        if z_shelf is not None:
            zs = max(zs, z_shelf + 0.2)
        s = _u(rng, 0.02, 0.035)
        rails = [box((-lx + half * 0.5, y - s, zs), (lx - half * 0.5, y + s, zs + 2 * s))
                 for y in (-ly, ly)]
        parts.append(Component("stretcher", Mesh.merge(rails), "stretcher"))
        zs_top = zs + 2 * s
    if rng.random() < 0.4 and top_style == 0:
        ah = _u(rng, 0.06, 0.12)
        at = 0.02
        za = z_leg - ah
        if zs_top is None or za > zs_top + 0.15:
            frame = [
                box((-lx, -ly - at, za), (lx, -ly + at, z_leg)),
                box((-lx, ly - at, za), (lx, ly + at, z_leg)),
            ]
            parts.append(Component("apron", Mesh.merge(frame), "apron"))
    return parts


def _chair(rng, variants):
    W = _u(rng, 0.45, 0.7)
    Dp = _u(rng, 0.45, 0.7)
    Hs = _u(rng, 0.4, 0.55)
    st = _u(rng, 0.04, 0.09)
    Hb = _u(rng, 0.4, 0.7)
    bt = _u(rng, 0.03, 0.07)
    lt = _u(rng, 0.035, 0.07)
    inset = _u(rng, 0.01, 0.05)
    leg_style = int(rng.integers(variants)) % 3
    back_style = int(rng.integers(variants)) % 2
    z_leg = Hs - st
    seat = box((-W / 2, -Dp / 2, z_leg), (W / 2, Dp / 2, Hs))
    parts = [Component("seat", seat, "seat")]
    yb = -Dp / 2
    if back_style == 0:
        back = box((-W / 2, yb, Hs), (W / 2, yb + bt, Hs + Hb))
    else:
        # two posts and a top rail
        pw = 0.08 * W + 0.02
        back = Mesh.merge([
            box((-W / 2, yb, Hs), (-W / 2 + pw, yb + bt, Hs + Hb)),
            box((W / 2 - pw, yb, Hs), (W / 2, yb + bt, Hs + Hb)),
            box((-W / 2 + pw, yb, Hs + 0.6 * Hb), (W / 2 - pw, yb + bt, Hs + Hb)),
        ])
    parts.append(Component("back", back, "back"))
    lx = W / 2 - inset - lt / 2
    ly = Dp / 2 - inset - lt / 2
    legs = Mesh.merge([_leg(rng, leg_style, x, y, 0.0, z_leg, lt)
                       for x in (-lx, lx) for y in (-ly, ly)])
    parts.append(Component("legs", legs, "leg"))
    if rng.random() < 0.8:
        ah = _u(rng, 0.18, 0.3)
        aw = _u(rng, 0.03, 0.06)
        arms = []
        for sx in (-1, 1):
            x0 = sx * W / 2
            xs = sorted((x0, x0 - sx * aw))
            arms.append(box((xs[0], yb + bt, Hs + ah - aw), (xs[1], Dp / 2 - 0.05, Hs + ah)))
            arms.append(box((xs[0], Dp / 2 - 0.05 - aw, Hs), (xs[1], Dp / 2 - 0.05, Hs + ah - aw)))
        parts.append(Component("arms", Mesh.merge(arms), "arm"))
    return parts


def _lamp(rng, variants):
    base_style = int(rng.integers(variants)) % 2
    br = _u(rng, 0.15, 0.3)
    bh = _u(rng, 0.03, 0.08)
    if base_style == 0:
        base = cylinder((0.0, 0.0, 0.0), br, bh, segments=20)
    else:
        base = box((-br, -br, 0.0), (br, br, bh))
    sh = _u(rng, 0.5, 1.0)
    sr = _u(rng, 0.015, 0.03)
    parts = [Component("base", base, "base"),
             Component("stem", cylinder((0.0, 0.0, bh), sr, sh, segments=10), "stem")]
    top = bh + sh
    shade_h = _u(rng, 0.2, 0.4)
    r_lo = _u(rng, 0.15, 0.3)
    r_hi = r_lo * _u(rng, 0.4, 0.9)
    if rng.random() < 0.5:
        ah = _u(rng, 0.1, 0.2)
        neck = box((-0.012, -0.012, top), (0.012, 0.012, top + ah))
        parts.append(Component("neck", neck, "neck"))
        top += ah
    parts.append(Component("shade", frustum((0.0, 0.0, top), r_lo, r_hi, shade_h, segments=20),
                           "shade"))
    if rng.random() < 0.5:
        fr = _u(rng, 0.02, 0.04)
        parts.append(Component("finial", cylinder((0.0, 0.0, top + shade_h), fr, fr * 2,
                                                  segments=10), "finial"))
    return parts


_TEMPLATES = {"table": _table, "chair": _chair, "lamp": _lamp}


def normalize_unit_radius(components) -> list:
    """Center at the vertex bounding-box center and scale the farthest vertex to distance 1."""
    allv = np.concatenate([c.mesh.vertices for c in components])
    center = 0.5 * (allv.min(axis=0) + allv.max(axis=0))
    radius = np.linalg.norm(allv - center, axis=1).max()
    return [Component(c.id, Mesh((c.mesh.vertices - center) / radius, c.mesh.triangles), c.label)
            for c in components]


def generate_object(category: str, object_id: str, rng: np.random.Generator,
                    variants: int = 3, tau: float = DEFAULT_TAU) -> ShapeObject:
    template = _TEMPLATES[category]
    last = None
    for _ in range(MAX_RETRIES):
        comps = normalize_unit_radius(template(rng, variants))
        try:
            graph = build_contact_graph(comps, tau, rng_seed=int(rng.integers(2**31)))
        except ContactGraphError as err:
            last = err
            continue
        return ShapeObject(object_id, category, comps, graph)
    raise RuntimeError(f"{object_id}: no connected assembly after {MAX_RETRIES} tries: {last}")


def object_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master_seed), int(index)])


def generate_synthetic_dataset(config: GeneratorConfig, rng_seed: int = 0) -> Dataset:
    config.validate()
    objects = []
    for i in range(config.n_objects):
        rng = np.random.default_rng(object_seed(rng_seed, i))
        objects.append(generate_object(config.category, f"{config.category}_{i:04d}", rng,
                                       config.variants, config.tau))
    n_train = int(round(TRAIN_FRACTION * config.n_objects))
    order = np.random.default_rng(object_seed(rng_seed, -1 % 2**32)).permutation(config.n_objects)
    for rank, idx in enumerate(order):
        objects[idx].split = "train" if rank < n_train else "test"
    meta = {"category": config.category, "n_objects": config.n_objects,
            "variants": config.variants, "tau": config.tau, "seed": int(rng_seed)}
    return Dataset(objects, meta)

"""Partial shapes (connected component subsets with sampled clouds) and split pairs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import IdSplit, split_random
from .mesh import sample_point_cloud

DEFAULT_POINTS = 1024


@dataclass
class PartialShape:
    object_id: str
    component_ids: tuple
    points: np.ndarray

    @property
    def id(self) -> str:
        return partial_id(self.object_id, self.component_ids)


def partial_id(object_id: str, component_ids) -> str:
    return f"{object_id}/{'+'.join(sorted(component_ids))}"


@dataclass
class SplitPair:
    query: PartialShape
    complement: PartialShape
    source_object_id: str


def make_partial(obj, component_ids, n: int = DEFAULT_POINTS, rng_seed=0) -> PartialShape:
    ids = tuple(sorted(component_ids))
    if not ids:
        raise ValueError("a partial shape needs at least one component")
    if not obj.graph.is_connected(ids):
        raise ValueError(f"components {list(ids)} of {obj.id} are not a connected subgraph")
    return PartialShape(obj.id, ids, sample_point_cloud(obj.select(ids), n, rng_seed))


def make_split_pair(obj, rng_seed, n: int = DEFAULT_POINTS, split: IdSplit | None = None) -> SplitPair:
    """Random split of ``obj`` with both sides sampled; the complement may be disconnected.

    Pass ``split`` to sample clouds for an already drawn split.
    """
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    if split is None:
        split = split_random(obj.graph, rng)
    q = make_partial(obj, split.query, n, rng)
    c = PartialShape(obj.id, split.complement, sample_point_cloud(obj.select(split.complement), n, rng))
    return SplitPair(q, c, obj.id)

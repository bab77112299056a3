"""Candidate databases, complement / interchangeability ranking, and evaluation metrics."""

from __future__ import annotations

import csv
import json
import zlib
from dataclasses import dataclass, field

import numpy as np

from .encoder import EncoderParams, embed_stack
from .fuzzy import DualEmbedding, complementarity_energy, interchangeability_energy
from .shapes.graph import enumerate_partials
from .shapes.mesh import sample_point_cloud
from .shapes.partial import partial_id

DEFAULT_CAP = 512  # partial subsets enumerated per object


class RetrievalError(ValueError):
    pass


@dataclass
class RetrievalIndex:
    """Immutable database of embedded partial shapes, ordered by id."""

    ids: list
    object_ids: list
    component_ids: list
    embeddings: DualEmbedding  # stacked (M, D)
    labels: list = field(default_factory=list)  # per candidate, None when not a single part
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.ids)) != len(self.ids):
            raise RetrievalError("candidate ids must be unique")
        self._position = {cid: i for i, cid in enumerate(self.ids)}
        order = sorted(range(len(self.ids)), key=self.ids.__getitem__)
        self._id_rank = np.empty(len(self.ids), dtype=np.int64)
        self._id_rank[order] = np.arange(len(self.ids))

    def __len__(self):
        return len(self.ids)

    def position(self, cid: str) -> int:
        try:
            return self._position[cid]
        except KeyError:
            raise RetrievalError(f"id {cid!r} is not in the index") from None

    def embedding(self, cid: str) -> DualEmbedding:
        i = self.position(cid)
        return DualEmbedding(self.embeddings.f[i], self.embeddings.g[i])


def cloud_seed(master_seed: int, cid: str) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master_seed), zlib.crc32(cid.encode("utf-8"))])


def index_entries(objects, max_count: int | None = DEFAULT_CAP, include_full: bool = False,
                  single_parts: bool = False):
    """``(object, component_ids)`` pairs for every enumerated partial, sorted by id."""
    entries = []
    for obj in objects:
        if single_parts:
            subsets = [(n,) for n in sorted(obj.graph.nodes)]
        else:
            subsets = enumerate_partials(obj.graph, max_count)
        full = tuple(sorted(obj.graph.nodes))
        for ids in subsets:
            if ids == full and not include_full and not single_parts:
                continue
            entries.append((obj, ids))
    entries.sort(key=lambda e: partial_id(e[0].id, e[1]))
    return entries


def build_index(params: EncoderParams, objects, *, max_count: int | None = DEFAULT_CAP,
                include_full: bool = False, single_parts: bool = False,
                rng_seed: int = 0) -> RetrievalIndex:
    """Embed every connected partial shape of ``objects``.

    The full object is left out unless ``include_full``; each candidate's cloud
    is sampled with a seed derived from its id, so the index does not depend on
    object order.  ``single_parts`` indexes individual components instead and
    records their labels.
    """
    entries = index_entries(objects, max_count, include_full, single_parts)
    ids = [partial_id(o.id, c) for o, c in entries]
    clouds = [sample_point_cloud(o.select(c), params.config.points, cloud_seed(rng_seed, i))
              for (o, c), i in zip(entries, ids)]
    labels = []
    for o, c in entries:
        labels.append(o.component(c[0]).label if len(c) == 1 else None)
    meta = {"cap": max_count, "include_full": include_full, "single_parts": single_parts,
            "seed": rng_seed}
    return RetrievalIndex(ids, [o.id for o, _ in entries], [c for _, c in entries],
                          embed_stack(params, clouds), labels, meta)


def _rank(index: RetrievalIndex, energies: np.ndarray) -> np.ndarray:
    return np.lexsort((index._id_rank, energies))


def _top(index, energies, k):
    if len(index) == 0:
        raise RetrievalError("index is empty")
    if k > len(index):
        raise RetrievalError(f"k={k} exceeds index size {len(index)}")
    order = _rank(index, energies)[:k]
    return [(index.ids[i], float(energies[i])) for i in order]


def complement_energies(index: RetrievalIndex, query: DualEmbedding) -> np.ndarray:
    return np.asarray(complementarity_energy(query, index.embeddings))


def interchange_energies(index: RetrievalIndex, query: DualEmbedding) -> np.ndarray:
    return np.asarray(interchangeability_energy(query, index.embeddings))


def retrieve_complements(index: RetrievalIndex, query: DualEmbedding, k: int) -> list:
    """Top ``k`` ``(id, energy)`` pairs by ascending complementarity energy, ties by id."""
    return _top(index, complement_energies(index, query) if len(index) else np.zeros(0), k)


def retrieve_interchangeable(index: RetrievalIndex, query: DualEmbedding, k: int) -> list:
    """Top ``k`` ``(id, energy)`` pairs by ascending interchangeability energy, ties by id."""
    return _top(index, interchange_energies(index, query) if len(index) else np.zeros(0), k)


# -- metrics --------------------------------------------------------------


def _gt_ranks(rankings, ground_truth) -> np.ndarray:
    ranks = []
    for q, (ranking, gt) in enumerate(zip(rankings, ground_truth)):
        try:
            ranks.append(list(ranking).index(gt) + 1)
        except ValueError:
            raise RetrievalError(f"query {q}: ground truth {gt!r} not in its ranking") from None
    return np.array(ranks)


def recall_at_n(rankings, ground_truth, n: int) -> float:
    """Percentage of queries whose ground truth appears within the top ``n``."""
    if not rankings:
        raise RetrievalError("no queries")
    ranks = _gt_ranks(rankings, ground_truth)
    return 100.0 * float(np.mean(ranks <= n))


def percentile_ranks(rankings, ground_truth) -> np.ndarray:
    """Per query: percentage of candidates ranked at or below the ground truth."""
    ranks = _gt_ranks(rankings, ground_truth)
    sizes = np.array([len(r) for r in rankings])
    return 100.0 * (sizes - ranks + 1) / sizes


def percentile_rank(rankings, ground_truth, aggregate: str = "median") -> float:
    values = percentile_ranks(rankings, ground_truth)
    if aggregate == "median":
        return float(np.median(values))
    if aggregate == "mean":
        return float(np.mean(values))
    raise ValueError(f"aggregate must be 'median' or 'mean', got {aggregate!r}")


def label_agreement_curve(index: RetrievalIndex, queries=None, k_max: int | None = None,
                          exclude_self: bool = True) -> np.ndarray:
    """Mean fraction of same-label neighbors among the top ``k`` by interchangeability.

    ``queries`` are candidate ids (default: every candidate).  Entry ``k - 1``
    of the result is the ratio for ``k`` neighbors.  ``k_max`` defaults to 10%
    of the candidate count.  The query itself is not counted as its own
    neighbor unless ``exclude_self`` is false.
    """
    if any(label is None or label == "" for label in index.labels) or len(index.labels) != len(index):
        raise RetrievalError("every candidate needs a semantic label")
    queries = list(index.ids) if queries is None else list(queries)
    if k_max is None:
        k_max = max(1, int(0.1 * len(index)))
    labels = np.array(index.labels, dtype=object)
    total = np.zeros(k_max)
    for qid in queries:
        qi = index.position(qid)
        order = _rank(index, interchange_energies(index, index.embedding(qid)))
        if exclude_self:
            order = order[order != qi]
        hits = (labels[order[:k_max]] == labels[qi]).astype(float)
        if len(hits) < k_max:
            raise RetrievalError(f"k_max={k_max} exceeds available neighbors")
        total += np.cumsum(hits) / np.arange(1, k_max + 1)
    return total / len(queries)


def label_prior(index: RetrievalIndex) -> float:
    """Largest label share among candidates."""
    _, counts = np.unique(np.array(index.labels, dtype=object).astype(str), return_counts=True)
    return float(counts.max() / counts.sum())


def complement_queries(index: RetrievalIndex, objects) -> list:
    """``(query_id, ground_truth_id)`` for every indexed partial whose complement is indexed too."""
    by_id = {o.id: o for o in objects}
    pairs = []
    for cid, oid, comps in zip(index.ids, index.object_ids, index.component_ids):
        obj = by_id[oid]
        rest = tuple(n for n in sorted(obj.graph.nodes) if n not in comps)
        if not rest:
            continue
        gt = partial_id(oid, rest)
        if gt in index._position:
            pairs.append((cid, gt))
    return pairs


def evaluate_complements(params: EncoderParams, objects, *, index: RetrievalIndex | None = None,
                         max_count: int | None = DEFAULT_CAP, rng_seed: int = 0) -> dict:
    """Recall@1/10 and percentile ranks of ground-truth complements over an index of ``objects``."""
    objects = list(objects)
    if not objects:
        raise RetrievalError("no objects to evaluate")
    if index is None:
        index = build_index(params, objects, max_count=max_count, rng_seed=rng_seed)
    queries = complement_queries(index, objects)
    if not queries:
        raise RetrievalError("no query has an indexed complement")
    rankings, gts = [], []
    for qid, gt in queries:
        order = _rank(index, complement_energies(index, index.embedding(qid)))
        rankings.append([index.ids[i] for i in order])
        gts.append(gt)
    m = len(index)
    return {
        "n_queries": len(queries),
        "n_candidates": m,
        "cap": max_count,
        "recall_at_1": recall_at_n(rankings, gts, 1),
        "recall_at_10": recall_at_n(rankings, gts, 10),
        "median_percentile_rank": percentile_rank(rankings, gts, "median"),
        "mean_percentile_rank": percentile_rank(rankings, gts, "mean"),
        "random_recall_at_10": 100.0 * min(10, m) / m,
    }


# -- output files -----------------------------------------------------------

TABLE_METRICS = ("recall_at_1", "recall_at_10", "median_percentile_rank", "mean_percentile_rank")


def write_metrics_csv(path, category: str, metrics: dict) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["category", "metric", "value"])
        for key in TABLE_METRICS + ("random_recall_at_10", "n_queries", "n_candidates", "cap"):
            if key in metrics:
                v = metrics[key]
                w.writerow([category, key, repr(v) if isinstance(v, float) else v])


def write_summary_json(path, category: str, metrics: dict, extra: dict | None = None) -> None:
    summary = {"category": category,
               "table": {k: metrics[k] for k in TABLE_METRICS},
               "details": {k: v for k, v in metrics.items() if k not in TABLE_METRICS}}
    summary.update(extra or {})
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_curve_csv(path, curve) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "ratio"])
        for k, r in enumerate(curve, start=1):
            w.writerow([k, repr(float(r))])

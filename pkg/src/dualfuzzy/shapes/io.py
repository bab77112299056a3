"""Reading and writing component-assembly datasets.

On-disk layout (text files UTF-8, binary files little-endian)::

    <root>/dataset.json              {"format": "dualfuzzy-dataset", "version": 1,
                                      "config": {...}, "objects": [<object id>, ...]}
    <root>/<object id>/object.json   {"id", "category", "split": "train" | "test",
                                      "components": [{"id", "label", "file"}, ...],
                                      "radius": max vertex distance from the bbox center}
    <root>/<object id>/edges.csv     header "u,v", one contact edge per row, sorted
    <root>/<object id>/<component id>.mesh
                                     tensor container (see ``numeric.container``) with
                                     "vertices" (V, 3) f64 and "triangles" (T, 3) i64;
                                     meta {"id", "label"}

Writing the same dataset twice produces byte-identical files.  The loader
accepts assemblies from any source in this layout; it checks the unit-radius
scale and rejects disconnected contact graphs.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from ..numeric import container
from .generator import Dataset, ShapeObject
from .graph import ContactGraph, ContactGraphError
from .mesh import Component, Mesh

FORMAT = "dualfuzzy-dataset"
VERSION = 1
RADIUS_TOL = 1e-6


class DatasetError(ValueError):
    pass


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def assembly_radius(components) -> float:
    allv = np.concatenate([c.mesh.vertices for c in components])
    center = 0.5 * (allv.min(axis=0) + allv.max(axis=0))
    return float(np.linalg.norm(allv - center, axis=1).max())


def save_object(obj: ShapeObject, directory) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    entries = []
    for c in obj.components:
        fname = f"{c.id}.mesh"
        container.save(d / fname, {"vertices": c.mesh.vertices, "triangles": c.mesh.triangles},
                       {"id": c.id, "label": c.label})
        entries.append({"id": c.id, "label": c.label, "file": fname})
    with open(d / "edges.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["u", "v"])
        w.writerows(obj.graph.sorted_edges())
    _write_json(d / "object.json", {"id": obj.id, "category": obj.category, "split": obj.split,
                                    "components": entries,
                                    "radius": assembly_radius(obj.components)})


def save_dataset(dataset: Dataset, root) -> None:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    for obj in dataset.objects:
        save_object(obj, root / obj.id)
    _write_json(root / "dataset.json", {"format": FORMAT, "version": VERSION,
                                        "config": dataset.config,
                                        "objects": [o.id for o in dataset.objects]})


def load_object(directory) -> ShapeObject:
    d = Path(directory)
    try:
        info = json.loads((d / "object.json").read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DatasetError(f"{d}: missing object.json") from None
    if info.get("split") not in ("train", "test"):
        raise DatasetError(f"{d}: split must be 'train' or 'test', got {info.get('split')!r}")
    comps = []
    for entry in info["components"]:
        try:
            tensors, meta = container.load(d / entry["file"])
        except (OSError, container.ContainerError) as err:
            raise DatasetError(f"{d / entry['file']}: {err}") from None
        comps.append(Component(entry["id"], Mesh(tensors["vertices"], tensors["triangles"]),
                               entry.get("label", meta.get("label", ""))))
    radius = assembly_radius(comps)
    if abs(radius - 1.0) > RADIUS_TOL:
        raise DatasetError(f"{d}: assembly radius {radius!r} is not 1")
    with open(d / "edges.csv", newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["u", "v"]:
        raise DatasetError(f"{d / 'edges.csv'}: expected header u,v")
    try:
        graph = ContactGraph.from_edges([c.id for c in comps], [tuple(r) for r in rows[1:]])
    except ValueError as err:
        raise DatasetError(f"{d / 'edges.csv'}: {err}") from None
    pieces = graph.components_of(graph.nodes)
    if len(pieces) != 1:
        raise DatasetError(f"{d}: {ContactGraphError(pieces)}")
    return ShapeObject(info["id"], info.get("category", ""), comps, graph, info["split"])


def load_dataset(root) -> Dataset:
    root = Path(root)
    index = root / "dataset.json"
    if not index.is_file():
        raise DatasetError(f"no dataset at {root} (missing dataset.json)")
    info = json.loads(index.read_text(encoding="utf-8"))
    if info.get("format") != FORMAT:
        raise DatasetError(f"{index}: not a {FORMAT} index")
    return Dataset([load_object(root / oid) for oid in info["objects"]], info.get("config", {}))

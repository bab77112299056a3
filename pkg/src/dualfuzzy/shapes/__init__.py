"""Component assemblies, contact graphs, splits and point-cloud sampling."""

from .generator import (
    CATEGORIES,
    Dataset,
    GeneratorConfig,
    ShapeObject,
    generate_object,
    generate_synthetic_dataset,
)
from .graph import (
    ContactGraph,
    ContactGraphError,
    IdSplit,
    build_contact_graph,
    enumerate_partials,
    split_random,
)
from .io import DatasetError, load_dataset, load_object, save_dataset, save_object
from .mesh import Component, GeometryError, Mesh, box, cylinder, frustum, sample_point_cloud
from .partial import PartialShape, SplitPair, make_partial, make_split_pair

__all__ = [
    "CATEGORIES",
    "Component",
    "ContactGraph",
    "ContactGraphError",
    "Dataset",
    "DatasetError",
    "GeneratorConfig",
    "GeometryError",
    "IdSplit",
    "Mesh",
    "PartialShape",
    "ShapeObject",
    "SplitPair",
    "box",
    "build_contact_graph",
    "cylinder",
    "enumerate_partials",
    "frustum",
    "generate_object",
    "generate_synthetic_dataset",
    "load_dataset",
    "load_object",
    "make_partial",
    "make_split_pair",
    "sample_point_cloud",
    "save_dataset",
    "save_object",
    "split_random",
]

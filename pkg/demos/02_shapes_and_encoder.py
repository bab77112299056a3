"""Procedural shapes, their contact graphs, and the dual encoder.

Each generated object is a set of labeled box/cylinder components.  Two
components touch when their surfaces come within ``tau`` of each other; a
partial shape is any connected set of components.

    python3 demos/02_shapes_and_encoder.py
"""

import numpy as np

from dualfuzzy import EmbedConfig, embed, init_params
from dualfuzzy.shapes import GeneratorConfig, enumerate_partials, generate_synthetic_dataset
from dualfuzzy.shapes.graph import split_random
from dualfuzzy.shapes.partial import make_split_pair

ds = generate_synthetic_dataset(GeneratorConfig("chair", 4), rng_seed=1)
obj = ds.objects[0]
print(obj.id, "components:")
for c in obj.components:
    print(f"  {c.id:12s} {c.label:6s} {len(c.mesh.triangles):4d} triangles")
print("contact edges:", obj.graph.sorted_edges())

partials = enumerate_partials(obj.graph)
print(f"{len(partials)} connected partial shapes, e.g. {partials[:3]}")

split = split_random(obj.graph, np.random.default_rng(3))
print("a random split:", split.query, "|", split.complement)

pair = make_split_pair(obj, 3, n=512)
print("query cloud", pair.query.points.shape, "centered:",
      np.allclose(0.5 * (pair.query.points.min(0) + pair.query.points.max(0)), 0))

# An untrained encoder already maps clouds to unit-norm positive vectors.
params = init_params(EmbedConfig(dim=8, points=512))
e = embed(params, pair.query.points)
print("f =", np.round(e.f, 3))
print("g =", np.round(e.g, 3))
print("norms", np.linalg.norm(e.f).round(12), np.linalg.norm(e.g).round(12))

# Point order does not matter: max pooling makes the result bit-identical.
shuffled = pair.query.points[np.random.default_rng(0).permutation(512)]
print("permutation invariant:", embed(params, shuffled).f.tobytes() == e.f.tobytes())

"""Fuzzy vectors, inclusion energies and the bounds they satisfy.

A fuzzy vector is a nonnegative coordinate vector read as membership scores.
Inclusion of ``a`` in ``b`` holds when every coordinate of ``a`` is at most
the matching coordinate of ``b``; the directional energy measures how far
that is from being true.

    python3 demos/01_fuzzy_algebra.py
"""

import numpy as np

from dualfuzzy import (
    DualEmbedding,
    complementarity_energy,
    directional_energy,
    fuzzy_join,
    fuzzy_meet,
    interchangeability_energy,
    is_subset,
)
from dualfuzzy.checks import bound_sweep

a = np.array([0.2, 0.5, 0.1])
b = np.array([0.4, 0.5, 0.3])
print("a =", a, " b =", b)
print("meet:", fuzzy_meet(a, b), " join:", fuzzy_join(a, b))
print("a in b?", bool(is_subset(a, b)), " energy", directional_energy(a, b))
print("b in a?", bool(is_subset(b, a)), " energy", round(float(directional_energy(b, a)), 6))

# The energy is the squared distance from b to its meet with a.
print("|b - (b ^ a)|^2 =", round(float(np.sum((b - fuzzy_meet(b, a)) ** 2)), 6))

# A shape carries two vectors: f in the subset space, g in the superset space.
# x and y complement each other when f(x) sits inside g(y) and vice versa.
rng = np.random.default_rng(0)


def unit(v):
    return v / np.linalg.norm(v)


x = DualEmbedding(unit(rng.random(8)), unit(rng.random(8)))
y = DualEmbedding(unit(rng.random(8)), unit(rng.random(8)))
print("\ncomplementarity E_c(x, y) =", round(float(complementarity_energy(x, y)), 5))
print("interchangeability E_r(x, y) =", round(float(interchangeability_energy(x, y)), 5))
print("E_r(x, x) =", float(interchangeability_energy(x, x)))

# The join/meet bounds hold for every random triple we throw at them.
for row in bound_sweep(n=20_000, dims=(2, 16)):
    print(f"D={row['dim']:3d}: {row['triples']} triples, violations "
          f"{row['prop1']} / {row['prop2']} / {row['corollary3']}")

"""Fuzzy-set algebra on embedding coordinates and the relation energies.

A fuzzy vector is a nonnegative coordinate vector read as membership scores.
Meet and join are the elementwise min and max.  All functions broadcast over
leading axes (the last axis holds the D coordinates) and accept either numpy
arrays or tape tensors, so the same code scores retrieval candidates and
builds training losses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numeric import ad
from .numeric.autodiff import value

UNIT_NORM_TOL = 1e-6
SLACK = 1e-12


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class DualEmbedding:
    """Coordinates of one partial shape (or a stack of them) in both spaces.

    ``f`` lives in the subset space and ``g`` in the superset space.
    """

    f: object
    g: object

    def __post_init__(self):
        if np.shape(value(self.f))[-1] != np.shape(value(self.g))[-1]:
            raise DimensionError(
                f"subset/superset dimension mismatch: {np.shape(value(self.f))} "
                f"vs {np.shape(value(self.g))}")

    @property
    def dim(self) -> int:
        return np.shape(value(self.f))[-1]

    def __getitem__(self, idx) -> "DualEmbedding":
        return DualEmbedding(self.f[idx], self.g[idx])


def _check_dims(a, b):
    da, db = np.shape(value(a)), np.shape(value(b))
    if not da or not db or da[-1] != db[-1]:
        raise DimensionError(f"fuzzy vectors of different dimension: {da} vs {db}")


def fuzzy_meet(a, b):
    _check_dims(a, b)
    return ad.minimum(a, b)


def fuzzy_join(a, b):
    _check_dims(a, b)
    return ad.maximum(a, b)


def is_subset(a, b):
    """Crisp inclusion: every coordinate of ``a`` is at most that of ``b``."""
    _check_dims(a, b)
    return np.all(value(a) <= value(b), axis=-1)


def directional_energy(a, b):
    """Squared-hinge violation of ``a`` being included in ``b``."""
    _check_dims(a, b)
    return ad.sum(ad.sq_hinge(ad.sub(a, b)), axis=-1)


def complementarity_energy_oneway(x: DualEmbedding, y: DualEmbedding):
    """Energy of ``x -> y``: inclusion of ``f(x)`` in ``g(y)``."""
    return directional_energy(x.f, y.g)


def complementarity_energy(x: DualEmbedding, y: DualEmbedding):
    return ad.add(complementarity_energy_oneway(x, y), complementarity_energy_oneway(y, x))


def _require_unit(v, what):
    norms = np.linalg.norm(value(v), axis=-1)
    if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
        worst = float(np.max(np.abs(norms - 1.0)))
        raise ValueError(f"{what} must have unit l2 norm (off by {worst:.3g})")


def interchangeability_energy(x: DualEmbedding, y: DualEmbedding):
    """Squared norm of the subset-space join minus that of the superset-space meet.

    With unit-norm coordinates, ``|f(x) v f(y)|^2 - |g(x) ^ g(y)|^2`` equals
    ``sum(max(f)^2 - (f(x)^2 + f(y)^2) / 2) + sum((g(x)^2 + g(y)^2) / 2 - min(g)^2)``
    because the subtracted halves add up to ``1 - 1``.  The second form is what
    gets evaluated: every summand is nonnegative and exactly symmetric in
    floating point, and identical inputs give exactly zero.  Non-unit inputs
    are rejected since the identity (and the zero point) depends on the norm.
    """
    _check_dims(x.f, y.f)
    for name, v in (("f(x)", x.f), ("g(x)", x.g), ("f(y)", y.f), ("g(y)", y.g)):
        _require_unit(v, name)
    join = ad.maximum(x.f, y.f)
    meet = ad.minimum(x.g, y.g)
    f_mean = ad.mul(ad.add(ad.mul(x.f, x.f), ad.mul(y.f, y.f)), 0.5)
    g_mean = ad.mul(ad.add(ad.mul(x.g, x.g), ad.mul(y.g, y.g)), 0.5)
    return ad.add(ad.sum(ad.sub(ad.mul(join, join), f_mean), axis=-1),
                  ad.sum(ad.sub(g_mean, ad.mul(meet, meet)), axis=-1))


def check_bound_prop1(a, b, c, slack: float = SLACK):
    """Join in the subset space bounds both one-way energies toward ``c``.

    ``a`` and ``b`` play ``f(x)`` and ``f(y)``; ``c`` plays ``g(z)``.
    """
    lhs = np.maximum(directional_energy(a, c), directional_energy(b, c))
    return lhs <= directional_energy(fuzzy_join(a, b), c) + slack


def check_bound_prop2(a, b, c, slack: float = SLACK):
    """Meet in the superset space bounds both one-way energies from ``c``.

    ``a`` and ``b`` play ``g(x)`` and ``g(y)``; ``c`` plays ``f(z)``.
    """
    lhs = np.maximum(directional_energy(c, a), directional_energy(c, b))
    return lhs <= directional_energy(c, fuzzy_meet(a, b)) + slack


def check_corollary3(x: DualEmbedding, y: DualEmbedding, z: DualEmbedding, slack: float = SLACK):
    lhs = 0.5 * (complementarity_energy(x, z) + complementarity_energy(y, z))
    rhs = (directional_energy(fuzzy_join(x.f, y.f), z.g)
           + directional_energy(z.f, fuzzy_meet(x.g, y.g)))
    return lhs <= rhs + slack

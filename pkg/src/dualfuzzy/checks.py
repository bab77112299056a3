"""Self-checks: randomized sweeps of the fuzzy bounds and finite-difference gradient checks.

These back the ``check`` command and can be called directly from notebooks.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .encoder import EmbedConfig, encode, init_params
from .fuzzy import DualEmbedding, check_bound_prop1, check_bound_prop2, check_corollary3
from .numeric import ad, forward_backward, grad_check
from .numeric.gradcheck import GradCheckReport
from .training import energy_matrix, ranking_loss, threshold_loss

DEFAULT_DIMS = (2, 16, 100)
GRAD_TARGETS = ("complementarity", "ranking", "threshold")


def _unit(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def random_fuzzy(rng, n, dim, tie_fraction=0.1):
    """Uniform ``[0, 1)`` coordinates with some copied between rows to create exact ties."""
    a, b, c = (rng.random((n, dim)) for _ in range(3))
    tie = rng.random((n, dim)) < tie_fraction
    b[tie] = a[tie]
    tie = rng.random((n, dim)) < tie_fraction
    c[tie] = a[tie]
    return a, b, c


def bound_sweep(n: int = 100_000, dims=DEFAULT_DIMS, seed: int = 0, chunk: int = 20_000):
    """Count violations of the three bounds over ``n`` random triples per dimension."""
    rows = []
    for dim in dims:
        rng = np.random.default_rng([seed, dim])
        start = time.perf_counter()
        fails = {"prop1": 0, "prop2": 0, "corollary3": 0}
        for lo in range(0, n, chunk):
            m = min(chunk, n - lo)
            a, b, c = random_fuzzy(rng, m, dim)
            fails["prop1"] += int(np.sum(~check_bound_prop1(a, b, c)))
            fails["prop2"] += int(np.sum(~check_bound_prop2(a, b, c)))
            x, y, z = (DualEmbedding(_unit(rng.random((m, dim)) + 1e-12),
                                     _unit(rng.random((m, dim)) + 1e-12)) for _ in range(3))
            fails["corollary3"] += int(np.sum(~check_corollary3(x, y, z)))
        rows.append({"dim": dim, "triples": n, **fails,
                     "seconds": time.perf_counter() - start})
    return rows


@dataclass
class GradCase:
    draw: int
    target: str
    dim: int
    points: int
    report: GradCheckReport


def _case_program(target: str, config: EmbedConfig, n_pairs: int, alpha: float):
    def program(P, I):
        both = encode(P, np.concatenate([I["x"], I["y"]]), config)
        energies = energy_matrix(both[:n_pairs], both[n_pairs:])
        if target == "complementarity":
            return ad.sum(ad.mul(energies, I["w"]))
        if target == "ranking":
            return ranking_loss(energies, alpha)
        return threshold_loss(energies, alpha, P["t"])

    return program


def _random_inputs(rng, n_pairs, points):
    clouds = rng.uniform(-0.5, 0.5, size=(2 * n_pairs, points, 3))
    clouds -= 0.5 * (clouds.min(axis=1, keepdims=True) + clouds.max(axis=1, keepdims=True))
    return {"x": clouds[:n_pairs], "y": clouds[n_pairs:],
            "w": rng.uniform(0.5, 1.5, size=(n_pairs, n_pairs))}


def gradient_suite(draws: int = 100, seed: int = 0, tolerance: float = 1e-4, h: float = 1e-5,
                   coords_per_param: int = 2, n_pairs: int = 3, alpha: float = 0.05,
                   targets=GRAD_TARGETS, corrupt: float | None = None):
    """Finite-difference check of encoder + energy + each loss on random small problems.

    Each draw picks D in [4, 8] and 16..64 points, fresh weights and fresh
    clouds.  ``corrupt`` scales the analytic gradients before comparison,
    which must make the check fail (a self-test of the checker).
    """
    cases = []
    for draw in range(draws):
        rng = np.random.default_rng([seed, draw])
        dim = int(rng.integers(4, 9))
        points = int(rng.integers(16, 65))
        config = EmbedConfig(dim=dim, points=points)
        params = init_params(config, rng_seed=rng.integers(2**32)).arrays
        params["t"] = np.array(rng.uniform(0.05, 0.6))
        inputs = _random_inputs(rng, n_pairs, points)
        for target in targets:
            program = _case_program(target, config, n_pairs, alpha)
            grads = None
            if corrupt is not None:
                _, grads = forward_backward(program, params, inputs)
                grads = {k: g * corrupt + (corrupt - 1.0) * 1e-3 for k, g in grads.items()}
            report = grad_check(program, params, inputs, tolerance, h=h,
                                coords_per_param=coords_per_param, rng=rng, grads=grads)
            cases.append(GradCase(draw, target, dim, points, report))
    return cases

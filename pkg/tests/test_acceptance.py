"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line through the ``criterion`` fixture; the
lines are repeated in the terminal summary.  The training criteria run at the
stated desk scale and take several minutes in total.
"""

import time

import numpy as np

from dualfuzzy.checks import bound_sweep, gradient_suite
from dualfuzzy.cli import EXIT_OK, main
from dualfuzzy.encoder import EmbedConfig
from dualfuzzy.fuzzy import DualEmbedding, directional_energy, interchangeability_energy, is_subset
from dualfuzzy.retrieval import (
    RetrievalIndex,
    build_index,
    evaluate_complements,
    label_agreement_curve,
    label_prior,
)
from dualfuzzy.shapes import ContactGraph, GeneratorConfig, enumerate_partials, generate_synthetic_dataset
from dualfuzzy.training import LossConfig, ranking_loss, threshold_loss, train
from oracles import brute_connected_subsets, graph_table, ranking_loss_loops, threshold_loss_loops

N_RANDOM = 100_000
CHAIR_OBJECTS = 100
CHAIR_EPOCHS = 40
CONTROL_DRAWS = 50


def unit(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def test_bound_suite(criterion):
    start = time.perf_counter()
    rows = bound_sweep(N_RANDOM, (2, 16, 100), seed=0)
    seconds = time.perf_counter() - start
    failures = sum(r["prop1"] + r["prop2"] + r["corollary3"] for r in rows)
    ok = failures == 0 and seconds < 30 and all(r["triples"] == N_RANDOM for r in rows)
    assert criterion("bound suite", ok,
                     f"{failures} violations over 3 x {N_RANDOM} triples at D=2,16,100 in {seconds:.1f}s")


def test_fuzzy_consistency(criterion):
    rng = np.random.default_rng(1)
    worst, mismatches, n_subsets = 0.0, 0, 0
    for dim in (2, 16, 100):
        a = rng.random((N_RANDOM, dim))
        b = rng.random((N_RANDOM, dim))
        # half the pairs are made crisp subsets, some coordinates tie exactly
        lift = rng.random(N_RANDOM) < 0.5
        b[lift] = np.maximum(b[lift], a[lift])
        tie = rng.random((N_RANDOM, dim)) < 0.2
        b[tie] = a[tie]
        e = directional_energy(a, b)
        subset = np.array([all(x <= y for x, y in zip(ra, rb)) for ra, rb in zip(a[:2000], b[:2000])])
        mismatches += int(np.sum((e == 0) != is_subset(a, b)))
        mismatches += int(np.sum(subset != is_subset(a[:2000], b[:2000])))
        n_subsets += int(np.sum(is_subset(a, b)))
        meet_form = np.sum((a - np.minimum(a, b)) ** 2, axis=1)
        worst = max(worst, float(np.max(np.abs(e - meet_form))))
    ok = mismatches == 0 and worst <= 1e-12 and 0 < n_subsets < 3 * N_RANDOM
    assert criterion("fuzzy consistency", ok,
                     f"{mismatches} zero/subset mismatches ({n_subsets} subsets of {3 * N_RANDOM}); "
                     f"max |E_dir - meet form| = {worst:.2e}")


def test_interchangeability_calibration(criterion):
    rng = np.random.default_rng(2)
    bad_zero = bad_sign = bad_sym = 0
    for dim in (2, 16, 100):
        x = DualEmbedding(unit(rng.random((N_RANDOM, dim))), unit(rng.random((N_RANDOM, dim))))
        y = DualEmbedding(unit(rng.random((N_RANDOM, dim))), unit(rng.random((N_RANDOM, dim))))
        exy = interchangeability_energy(x, y)
        bad_zero += int(np.count_nonzero(interchangeability_energy(x, x)))
        bad_sign += int(np.sum(exy < 0))
        bad_sym += int(np.sum(exy != interchangeability_energy(y, x)))
    ok = bad_zero == bad_sign == bad_sym == 0
    assert criterion("interchangeability calibration", ok,
                     f"nonzero self {bad_zero}, negative {bad_sign}, asymmetric {bad_sym} "
                     f"over 3 x {N_RANDOM} pairs")


def test_gradient_checks(criterion):
    cases = gradient_suite(draws=100, seed=0, tolerance=1e-4, h=1e-5)
    failed = [c for c in cases if not c.report.passed]
    worst = max(c.report.max_rel_error for c in cases)
    kinks = sum(c.report.skipped_kinks for c in cases)
    dims = {c.dim for c in cases}
    points = {c.points for c in cases}
    ok = (not failed and len({c.draw for c in cases}) >= 100 and min(dims) >= 4 and max(dims) <= 8
          and min(points) >= 16 and max(points) <= 64)
    assert criterion("gradient checks", ok,
                     f"{len(cases)} cases over 100 draws, {len(failed)} failed, max rel err {worst:.2e}, "
                     f"{kinks} kink samples skipped")


def test_loss_fixtures(criterion):
    # exact up to the rounding of the decimal inputs themselves
    fixtures = (abs(ranking_loss(np.array([[0.1, 0.4], [0.2, 0.3]]), 0.05) - 0.15) <= 1e-15
                and abs(threshold_loss(np.array([[0.1, 0.3], [0.15, 0.25]]), 0.05, 0.2) - 0.075) <= 1e-15)
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 9))
        E = rng.random((n, n))
        t = float(rng.random())
        worst = max(worst, abs(ranking_loss(E, 0.05) - ranking_loss_loops(E.tolist(), 0.05)),
                    abs(threshold_loss(E, 0.05, t) - threshold_loss_loops(E.tolist(), 0.05, t)))
    ok = bool(fixtures) and worst <= 1e-12
    assert criterion("loss fixtures", ok,
                     f"N=2 fixtures {'match' if fixtures else 'differ'}; "
                     f"max deviation from double loops {worst:.1e} on 100 matrices")


def test_training_smoke(criterion):
    ds = generate_synthetic_dataset(GeneratorConfig("table", 20), rng_seed=0)
    start = time.perf_counter()
    result = train(ds.train, LossConfig(mode="ranking", epochs=200, batch_size=8, seed=0),
                   EmbedConfig(dim=16, seed=0), threads=1)
    minutes = (time.perf_counter() - start) / 60
    first, final = result.log[0]["mean_loss"], result.log[-1]["mean_loss"]
    metrics = evaluate_complements(result.params, ds.test)
    recall, baseline = metrics["recall_at_10"], metrics["random_recall_at_10"]
    ok = minutes <= 10 and final <= 0.5 * first and recall >= 5 * baseline
    assert criterion("training smoke", ok,
                     f"{minutes:.1f} min; loss {first:.3f} -> {final:.3f} "
                     f"({100 * final / first:.0f}% of epoch 1); Recall@10 {recall:.1f} vs "
                     f"5 x baseline {5 * baseline:.1f} ({metrics['n_candidates']} candidates)")


def test_label_agreement(criterion):
    ds = generate_synthetic_dataset(GeneratorConfig("chair", CHAIR_OBJECTS), rng_seed=0)
    result = train(ds.train, LossConfig(mode="threshold", epochs=CHAIR_EPOCHS, batch_size=8, seed=0),
                   EmbedConfig(dim=16, seed=0), threads=1)
    parts = build_index(result.params, ds.test, single_parts=True)
    prior = label_prior(parts)
    k1 = float(label_agreement_curve(parts, k_max=1)[0])
    rng = np.random.default_rng(4)
    controls = []
    for _ in range(CONTROL_DRAWS):
        m, d = len(parts), parts.embeddings.dim
        emb = DualEmbedding(unit(rng.random((m, d))), unit(rng.random((m, d))))
        control_index = RetrievalIndex(parts.ids, parts.object_ids, parts.component_ids, emb, parts.labels)
        controls.append(label_agreement_curve(control_index, k_max=1)[0])
    control = float(np.mean(controls))
    ok = k1 >= prior + 0.1 and abs(control - prior) <= 0.05
    assert criterion("label agreement", ok,
                     f"k=1 agreement {k1:.3f} vs prior {prior:.3f} (+0.1 needed); random control "
                     f"{control:.3f} over {CONTROL_DRAWS} draws ({len(parts)} parts)")


def _tree(root):
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_cli_determinism(criterion, tmp_path):
    small = ["--set", "dim=6", "--set", "points=128", "--set", "batch_size=4", "--set", "threads=1"]
    for run in ("a", "b"):
        root = tmp_path / run
        codes = [
            main(["gen", "--out", str(root / "data"), "--set", "n_objects=12", "--seed", "7"]),
            main(["train", "--out", str(root / "train"), "--set", f"dataset={root / 'data'}",
                  "--set", "epochs=3", "--set", "mode=threshold", "--seed", "7", *small]),
            main(["eval", "--out", str(root / "eval"), "--set", f"dataset={root / 'data'}",
                  "--set", f"checkpoint={root / 'train' / 'model.ckpt'}", "--seed", "7", *small]),
        ]
        assert codes == [EXIT_OK] * 3
    a, b = tmp_path / "a", tmp_path / "b"
    same_data = _tree(a / "data") == _tree(b / "data")
    same_train = (a / "train" / "metrics.csv").read_bytes() == (b / "train" / "metrics.csv").read_bytes()
    same_eval = all((a / "eval" / f).read_bytes() == (b / "eval" / f).read_bytes()
                    for f in ("metrics.csv", "curve.csv", "summary.json"))
    ok = same_data and same_train and same_eval
    assert criterion("determinism", ok,
                     f"dataset files {'identical' if same_data else 'differ'}, training log "
                     f"{'identical' if same_train else 'differs'}, eval outputs "
                     f"{'identical' if same_eval else 'differ'}")


def test_enumeration_oracle(criterion):
    graphs = graph_table()
    mismatched = 0
    for n, edges in graphs:
        nodes = [f"v{i}" for i in range(n)]
        named = [(nodes[i], nodes[j]) for i, j in edges]
        if enumerate_partials(ContactGraph.from_edges(nodes, named)) != brute_connected_subsets(nodes, named):
            mismatched += 1
    ok = mismatched == 0 and len(graphs) == 12113
    assert criterion("enumeration oracle", ok,
                     f"{mismatched} mismatches over all {len(graphs)} connected graphs on 1-8 nodes")

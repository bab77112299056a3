import numpy as np
import pytest

from dualfuzzy.encoder import (
    EmbedConfig,
    EncoderInputError,
    embed,
    embed_batch,
    embed_stack,
    encode,
    init_params,
    layer_shapes,
    load_checkpoint,
    save_checkpoint,
)
from dualfuzzy.fuzzy import complementarity_energy
from dualfuzzy.numeric import AdamState, grad_check
from dualfuzzy.training import energy_matrix, ranking_loss

SMALL = EmbedConfig(dim=4, points=16)


def centered_cloud(rng, n):
    c = rng.normal(size=(n, 3))
    return c - 0.5 * (c.min(axis=0) + c.max(axis=0))


def test_layer_widths():
    assert layer_shapes(16) == [(3, 64), (64, 128), (128, 128), (128, 128), (128, 16)]


def test_init_determinism_and_layout():
    a = init_params(EmbedConfig(dim=8, seed=3))
    b = init_params(EmbedConfig(dim=8, seed=3))
    c = init_params(EmbedConfig(dim=8, seed=4))
    assert a.arrays.keys() == b.arrays.keys()
    for k in a.arrays:
        assert a.arrays[k].tobytes() == b.arrays[k].tobytes()
    assert not np.array_equal(a.arrays["f.w1"], c.arrays["f.w1"])
    assert a.t == 0.1
    assert np.all(a.arrays["g.b3"] == 0)
    assert np.abs(a.arrays["f.w1"]).max() <= np.sqrt(6 / 3)
    assert not np.array_equal(a.arrays["f.w1"], a.arrays["g.w1"])  # disjoint nets


def test_unit_norm_positive_outputs():
    params = init_params(EmbedConfig(dim=16, points=64))
    rng = np.random.default_rng(0)
    for _ in range(5):
        e = embed(params, centered_cloud(rng, 64))
        for v in (e.f, e.g):
            assert v.shape == (16,)
            assert abs(np.linalg.norm(v) - 1) < 1e-9
            assert np.all(v > 0)


def test_point_permutation_is_bit_identical():
    params = init_params(EmbedConfig(dim=8, points=128))
    rng = np.random.default_rng(1)
    cloud = centered_cloud(rng, 128)
    a = embed(params, cloud)
    b = embed(params, cloud[rng.permutation(128)])
    assert a.f.tobytes() == b.f.tobytes() and a.g.tobytes() == b.g.tobytes()


def test_duplicated_points_same_embedding():
    params = init_params(EmbedConfig(dim=8, points=32))
    cloud = centered_cloud(np.random.default_rng(2), 32)
    a = embed(params, cloud)
    doubled = init_params(EmbedConfig(dim=8, points=64))
    b = embed(doubled, np.concatenate([cloud, cloud]))
    np.testing.assert_array_equal(a.f, b.f)
    np.testing.assert_array_equal(a.g, b.g)


def test_input_validation():
    params = init_params(EmbedConfig(dim=4, points=16))
    rng = np.random.default_rng(0)
    with pytest.raises(EncoderInputError, match="centered"):
        embed(params, centered_cloud(rng, 16) + 0.5)
    with pytest.raises(EncoderInputError, match="16 points"):
        embed(params, centered_cloud(rng, 20))
    with pytest.raises(EncoderInputError, match="item 1"):
        embed_batch(params, [centered_cloud(rng, 16), centered_cloud(rng, 15)])


def test_config_validation():
    with pytest.raises(ValueError):
        EmbedConfig(dim=1).validate()
    with pytest.raises(ValueError):
        EmbedConfig(points=4).validate()


def test_batch_matches_items():
    params = init_params(EmbedConfig(dim=6, points=32))
    rng = np.random.default_rng(3)
    clouds = [centered_cloud(rng, 32) for _ in range(32)]
    items = embed_batch(params, clouds)
    assert len(items) == 32 and all(e.f.shape == (6,) for e in items)
    stacked = embed_stack(params, clouds, chunk=7)
    np.testing.assert_allclose(stacked.f, np.stack([e.f for e in items]), rtol=0, atol=1e-14)
    np.testing.assert_allclose(stacked.g, np.stack([e.g for e in items]), rtol=0, atol=1e-14)
    assert embed_batch(params, []) == []


@pytest.mark.parametrize("seed", range(4))
def test_gradients_through_encoder_and_ranking_loss(seed):
    rng = np.random.default_rng(seed)
    params = init_params(SMALL, rng_seed=seed).arrays
    clouds = np.stack([centered_cloud(rng, 16) for _ in range(6)])

    def program(P, I):
        both = encode(P, I["c"], SMALL)
        return ranking_loss(energy_matrix(both[:3], both[3:]), 0.05)

    report = grad_check(program, params, {"c": clouds}, tolerance=1e-4, coords_per_param=4, rng=rng)
    assert report.passed, list(report.lines())


def test_gradients_of_single_pair_energy():
    rng = np.random.default_rng(9)
    params = init_params(SMALL, rng_seed=9).arrays
    clouds = np.stack([centered_cloud(rng, 16) for _ in range(2)])

    def program(P, I):
        e = encode(P, I["c"], SMALL)
        return complementarity_energy(e[0], e[1])

    report = grad_check(program, params, {"c": clouds}, tolerance=1e-4, coords_per_param=6, rng=rng)
    assert report.passed, list(report.lines())


def test_checkpoint_round_trip(tmp_path):
    config = EmbedConfig(dim=5, points=32, seed=2)
    params = init_params(config)
    adam = AdamState(step=7)
    adam.m = {k: v + 1 for k, v in params.arrays.items()}
    adam.v = {k: v + 2 for k, v in params.arrays.items()}
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, params, adam, {"epoch": 3})
    back, adam2, meta = load_checkpoint(path, expect=config)
    assert meta["epoch"] == 3 and back.config == config
    for k, v in params.arrays.items():
        assert back.arrays[k].tobytes() == v.tobytes()
        assert adam2.m[k].tobytes() == adam.m[k].tobytes()
    assert adam2.step == 7


def test_checkpoint_dimension_check(tmp_path):
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, init_params(EmbedConfig(dim=5, points=32)))
    with pytest.raises(ValueError, match="D=5"):
        load_checkpoint(path, expect=EmbedConfig(dim=6, points=32))

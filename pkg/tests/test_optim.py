import math

import numpy as np
import pytest

from dualfuzzy.numeric import AdamState, NonFiniteError, ShapeError, adam_step


def reference_adam(grads, lr, beta1=0.9, beta2=0.999, eps=1e-8, p=0.0):
    """Scalar Adam written out longhand, one list entry per step."""
    m = v = 0.0
    out = []
    for t, g in enumerate(grads, start=1):
        m = beta1 * m + (1 - beta1) * g
        v = beta2 * v + (1 - beta2) * g * g
        mhat = m / (1 - beta1**t)
        vhat = v / (1 - beta2**t)
        p = p - lr * mhat / (math.sqrt(vhat) + eps)
        out.append(p)
    return out


def test_scalar_matches_reference_step_for_step():
    state = AdamState(lr=0.1)
    params = {"p": np.array(0.0)}
    expected = reference_adam([1.0, 1.0, 1.0], lr=0.1)
    for want in expected:
        params, state = adam_step(state, params, {"p": np.array(1.0)})
        assert float(params["p"]) == pytest.approx(want, rel=0, abs=1e-15)
    assert state.step == 3


def test_varying_gradients_match_reference():
    rng = np.random.default_rng(0)
    gs = rng.normal(size=25)
    state = AdamState(lr=0.01)
    params = {"p": np.array(0.3)}
    for g, want in zip(gs, reference_adam(gs, lr=0.01, p=0.3)):
        params, state = adam_step(state, params, {"p": np.array(g)})
        assert float(params["p"]) == pytest.approx(want, abs=1e-14)


def test_zero_gradient_leaves_params_unchanged():
    state = AdamState()
    p = {"w": np.arange(6.0).reshape(2, 3)}
    for _ in range(5):
        new, state = adam_step(state, p, {"w": np.zeros((2, 3))})
        np.testing.assert_array_equal(new["w"], p["w"])
        p = new
    assert state.step == 5
    np.testing.assert_array_equal(state.m["w"], 0.0)


def test_moments_match_param_shapes():
    state = AdamState()
    p = {"a": np.ones((3, 2)), "b": np.ones(4)}
    _, state = adam_step(state, p, {"a": np.ones((3, 2)), "b": np.ones(4)})
    assert state.m["a"].shape == (3, 2)
    assert state.v["b"].shape == (4,)


def test_decay_boundary():
    state = AdamState(lr=1e-3, decay_rate=0.7, decay_steps=3)
    assert state.effective_lr() == 1e-3
    state.step = 2
    assert state.effective_lr() == 1e-3
    state.step = 3
    assert state.effective_lr() == pytest.approx(0.7e-3, rel=1e-15)
    state.step = 6
    assert state.effective_lr() == pytest.approx(0.49e-3, rel=1e-15)


def test_decayed_lr_is_used_after_boundary():
    # with one parameter and a constant gradient, the first Adam steps move by ~lr
    state = AdamState(lr=0.1, decay_rate=0.5, decay_steps=1)
    p = {"p": np.array(0.0)}
    p, state = adam_step(state, p, {"p": np.array(1.0)})
    first = -float(p["p"])
    before = float(p["p"])
    p, state = adam_step(state, p, {"p": np.array(1.0)})
    second = before - float(p["p"])
    assert first == pytest.approx(0.1, rel=1e-6)
    assert second == pytest.approx(0.05, rel=1e-6)


def test_default_hyperparameters():
    s = AdamState()
    assert (s.lr, s.decay_rate, s.decay_steps) == (1e-3, 0.7, 200_000)
    assert (s.beta1, s.beta2, s.eps) == (0.9, 0.999, 1e-8)


def test_shape_mismatch():
    with pytest.raises(ShapeError):
        adam_step(AdamState(), {"w": np.ones(3)}, {"w": np.ones(4)})


def test_non_finite_gradient_names_param():
    with pytest.raises(NonFiniteError, match="w2"):
        adam_step(AdamState(), {"w1": np.ones(2), "w2": np.ones(2)},
                  {"w1": np.ones(2), "w2": np.array([1.0, np.nan])})


def test_negative_step_rejected():
    with pytest.raises(ValueError):
        adam_step(AdamState(step=-1), {"w": np.ones(1)}, {"w": np.ones(1)})

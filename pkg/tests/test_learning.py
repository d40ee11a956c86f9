import copy
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prasp.inference import InferenceConfig
from prasp.learning import (LearningConfig, LearningTask, barzilai_borwein, bb_learn,
                            bb_step_size, central_gradient, format_hypothesis, likelihood,
                            numeric_gradient, with_config)
from prasp.syntax import Program, parse_formula, parse_program

FIX = Path(__file__).parent / "fixtures"
F = parse_formula


def task(hyp, examples, background="", **cfg):
    bg = parse_program(background) if background.strip() else Program()
    return LearningTask([F(h) for h in hyp], bg, [F(e) for e in examples], LearningConfig(**cfg))


def localization(**cfg):
    return LearningTask([F("moved(1)")],
                        parse_program((FIX / "localization_background.prasp").read_text()),
                        [F("safe")], LearningConfig(**cfg))


def test_closed_form_likelihoods():
    t = task(["a"], ["a"])
    assert likelihood([0.7], t) == pytest.approx(0.7, abs=1e-9)
    t2 = task(["a"], ["a", "not a"])
    for w in (0.1, 0.3, 0.5, 0.9):
        assert likelihood([w], t2) == pytest.approx(w * (1 - w), abs=1e-9)


def test_closed_form_gradients():
    assert numeric_gradient([0.4], task(["a"], ["a"]))[0] == pytest.approx(1.0, abs=1e-6)
    assert numeric_gradient([0.5], task(["a"], ["a", "not a"]))[0] == pytest.approx(0.0, abs=1e-6)


def test_gradient_at_bounds():
    t = task(["a"], ["a"])
    assert numeric_gradient([0.0], t)[0] == pytest.approx(1.0, abs=1e-6)
    assert numeric_gradient([1.0], t)[0] == pytest.approx(1.0, abs=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_forward_matches_central_on_smooth_function(x, y):
    fn = lambda w: np.sin(3 * w[0]) * np.exp(w[1]) + w[0] * w[1] ** 2
    np.testing.assert_allclose(numeric_gradient([x, y], fn), central_gradient([x, y], fn),
                               atol=1e-4)


@pytest.mark.parametrize("w", [0.2, 0.5, 0.8])
def test_forward_matches_central_on_localization(w):
    t = localization()
    assert abs(numeric_gradient([w], t)[0] - central_gradient([w], t)[0]) <= 1e-4


def test_bb_on_quadratic_is_rayleigh_quotient():
    rng = np.random.default_rng(3)
    M = rng.normal(size=(4, 4))
    Q = M @ M.T + 4 * np.eye(4)
    s = rng.normal(size=4)
    y = -Q @ s      # gradient change of -(w^T Q w) / 2
    assert bb_step_size(s, y) == pytest.approx(s @ Q @ s / (s @ s), rel=1e-10)


def test_bb_keeps_previous_alpha_when_not_concave():
    assert bb_step_size(np.array([1.0]), np.array([2.0]), previous=3.0) == 3.0
    assert bb_step_size(np.zeros(2), np.zeros(2), previous=0.5) == 0.5


def test_bb_maximizes_concave_quadratic():
    c = np.array([0.3, 0.7])
    f = lambda w, k: -float(np.sum((w - c) ** 2 * np.array([1.0, 5.0])))
    g = lambda w, k, fw: -2 * (w - c) * np.array([1.0, 5.0])
    res = barzilai_borwein(f, g, [0.9, 0.1], tol=1e-10, max_iters=200)
    np.testing.assert_allclose(res.weights, c, atol=1e-6)
    assert res.converged


def test_recovers_one():
    res = bb_learn(task(["a"], ["a"]))
    assert abs(res.weights[0] - 1.0) <= 1e-3


def test_recovers_half():
    res = bb_learn(task(["a"], ["a", "not a"], w0=(0.1,)))
    assert abs(res.weights[0] - 0.5) <= 1e-3


def test_background_unchanged():
    bg = parse_program("[0.3] b.\n[0.8] a :- b.\n")
    before = copy.deepcopy(bg.statements)
    t = LearningTask([F("a")], bg, [F("b")])
    bb_learn(t)
    assert bg.statements == before
    assert [s.weight for s in bg.statements] == [0.3, 0.8]


def test_ascent_property_on_trace():
    res = bb_learn(task(["a"], ["a", "not a"], w0=(0.05,)))
    assert res.likelihood >= res.trace[0].likelihood
    assert res.likelihood == max(e.likelihood for e in res.trace)


def test_localization_learns_zero():
    res = bb_learn(localization())
    assert res.weights[0] <= 0.05


def test_divergence_is_reported():
    # an objective that always gets worse after the first step
    f = lambda w, k: -float(k)
    g = lambda w, k, fw: np.array([1.0])
    res = barzilai_borwein(f, g, [0.0], alpha0=1e6, patience=3, max_iters=50)
    assert res.diverged and res.weights == (0.0,)


def test_sampled_structure_used_above_cap():
    cfg = dict(world_cap=2, inference=InferenceConfig(mode="sampled", samples=50, seed=1))
    t = task(["a"], ["a"], background="{b; c}.\n", **cfg)
    assert likelihood([0.6], t) == pytest.approx(0.6, abs=1e-6)


def test_format_and_validation():
    assert format_hypothesis([F("moved(1)")], [0.0]) == "[0] moved(1).\n"
    with pytest.raises(ValueError):
        LearningTask([], Program(), [F("a")])
    with pytest.raises(ValueError):
        likelihood([0.1, 0.2], task(["a"], ["a"]))
    t = with_config(task(["a"], ["a"]), max_iters=3)
    assert t.config.max_iters == 3

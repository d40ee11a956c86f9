from collections import Counter
from pathlib import Path

import numpy as np
import pytest

from prasp.grounding import ground
from prasp.sampling import (SamplingError, XorConstraint, apply_xor, call_rng, draw_xor,
                            sample_answer_set, sample_worlds)
from prasp.solver import GroundProgram, GroundRule, check_answer_set, enumerate_answer_sets
from prasp.syntax import parse_program
from prasp.transform import spanning_program

FIX = Path(__file__).parent / "fixtures"


def free_choice(*atoms) -> GroundProgram:
    return GroundProgram((GroundRule(tuple(atoms), choice=True),))


EIGHT = free_choice("a", "b", "c")


def test_draw_is_reproducible():
    assert draw_xor(["a", "b", "c"], np.random.default_rng(42)) == XorConstraint(("b",), False)
    x1 = draw_xor(list("abcdefgh"), np.random.default_rng(3))
    x2 = draw_xor(list("abcdefgh"), np.random.default_rng(3))
    assert x1 == x2


def test_draw_rates():
    rng = np.random.default_rng(11)
    atoms = [f"x{i}" for i in range(5)]
    draws = [draw_xor(atoms, rng) for _ in range(10_000)]
    for a in atoms:
        assert abs(np.mean([a in d.atoms for d in draws]) - 0.5) <= 0.02
    assert abs(np.mean([d.includes_true for d in draws]) - 0.5) <= 0.02


def test_apply_xor_filters():
    p = GroundProgram((GroundRule(("a", "b"), choice=True, lower=1, upper=1),))
    assert enumerate_answer_sets(apply_xor(p, XorConstraint(("a",), False))) == [frozenset({"a"})]
    assert enumerate_answer_sets(apply_xor(p, XorConstraint((), False))) == []
    # with ``true`` counted an even number of the atoms must hold
    assert enumerate_answer_sets(apply_xor(p, XorConstraint(("a", "b"), True))) == []


def test_halving_law():
    rng = np.random.default_rng(5)
    fractions = []
    for _ in range(400):
        c = draw_xor(EIGHT.atoms, rng)
        fractions.append(len(enumerate_answer_sets(apply_xor(EIGHT, c))) / 8)
    assert abs(np.mean(fractions) - 0.5) <= 0.05


def test_single_answer_set_always_returned():
    p = GroundProgram((GroundRule(("a",)), GroundRule(("b",), ("a",))))
    for i in range(20):
        assert sample_answer_set(p, call_rng(1, i)) == frozenset({"a", "b"})


def test_near_uniform_on_eight_models():
    counts = Counter(sample_answer_set(EIGHT, call_rng(9, i)) for i in range(2000))
    assert len(counts) == 8
    freqs = np.array([c / 2000 for c in counts.values()])
    assert np.all(np.abs(freqs - 1 / 8) <= 0.04)


def test_total_variation_on_sixteen_models():
    p = free_choice("a", "b", "c", "d")
    counts = Counter(sample_answer_set(p, call_rng(21, i)) for i in range(2000))
    tv = 0.5 * sum(abs(counts.get(m, 0) / 2000 - 1 / 16) for m in enumerate_answer_sets(p))
    assert tv <= 0.1


def test_localization_samples_are_answer_sets():
    sp = spanning_program(ground(parse_program((FIX / "localization.prasp").read_text())))
    for m in sample_worlds(sp.program, 5, seed=4):
        assert check_answer_set(sp.program, m)


def test_sample_worlds_basic():
    four = free_choice("a", "b")
    assert len(sample_worlds(four, 1, seed=0)) == 1
    assert set(sample_worlds(four, 100, seed=0)) == set(enumerate_answer_sets(four))
    assert sample_worlds(EIGHT, 30, seed=8) == sample_worlds(EIGHT, 30, seed=8)


def test_unsatisfiable_program():
    p = GroundProgram((GroundRule(("a",)), GroundRule((), ("a",))))
    with pytest.raises(SamplingError):
        sample_answer_set(p, call_rng(0, 0), retries=2)


def test_bad_sample_count():
    with pytest.raises(ValueError):
        sample_worlds(EIGHT, 0)

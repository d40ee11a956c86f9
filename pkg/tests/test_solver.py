import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from prasp.solver import (GroundProgram, GroundRule, ParityConstraint, ResourceLimitError,
                          check_answer_set, enumerate_answer_sets, holds, read_models,
                          write_ground_program)
from prasp.syntax import parse_formula

from oracles import oracle, random_program


def prog(*rules, parity=()):
    return GroundProgram(tuple(rules), tuple(parity))


def R(head=(), pos=(), neg=(), **kw):
    return GroundRule(tuple(head), tuple(pos), tuple(neg), **kw)


def test_oracle_equivalence_random_programs():
    rng = random.Random(20240)
    checked = 0
    for _ in range(220):
        p = random_program(rng)
        assert set(enumerate_answer_sets(p)) == oracle(p), str(p)
        checked += 1
    assert checked >= 200


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_check_answer_set_matches_oracle(seed):
    p = random_program(random.Random(seed))
    if len(p.atoms) > 9:
        return
    stable = oracle(p)
    atoms = p.atoms
    for k in range(len(atoms) + 1):
        for m in itertools.combinations(atoms, k):
            assert check_answer_set(p, m) == (frozenset(m) in stable)


def test_fact():
    assert enumerate_answer_sets(prog(R(("a",)))) == [frozenset({"a"})]


def test_disjunction_minimality():
    p = prog(R(("a", "b")))
    assert check_answer_set(p, {"a"})
    assert not check_answer_set(p, {"a", "b"})
    assert sorted(map(sorted, enumerate_answer_sets(p))) == [["a"], ["b"]]


def test_default_negation():
    assert check_answer_set(prog(R(("a",), neg=("b",))), {"a"})


def test_positive_loop_unfounded():
    p = prog(R(("a",), ("b",)), R(("b",), ("a",)))
    assert enumerate_answer_sets(p) == [frozenset()]


def test_strong_negation_consistency():
    p = prog(R(("p", "-p")), R(("p",), neg=("q",)), R(("-p",), neg=("q",)))
    assert enumerate_answer_sets(p) == []
    for m in enumerate_answer_sets(prog(R(("p", "-p"), choice=True))):
        assert not {"p", "-p"} <= m


def test_disjunctive_minimality_invariant():
    rng = random.Random(7)
    for _ in range(30):
        atoms = [f"x{i}" for i in range(6)]
        rules = [R(tuple(rng.sample(atoms, rng.randint(1, 3)))) for _ in range(rng.randint(1, 5))]
        models = enumerate_answer_sets(GroundProgram(tuple(rules)))
        for a, b in itertools.permutations(models, 2):
            assert not a < b


def test_cardinality_counts():
    p = prog(R(("a", "b", "c"), choice=True, lower=1, upper=2))
    assert len(enumerate_answer_sets(p)) == 6


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from("abcdef"), min_size=0, max_size=6, unique=True))
def test_parity_keeps_odd(subset):
    base = prog(R(tuple("abcdef"), choice=True))
    constrained = base.with_rules(parity=[ParityConstraint(tuple(subset), odd=True)])
    expected = [m for m in enumerate_answer_sets(base) if len(m & set(subset)) % 2 == 1]
    assert enumerate_answer_sets(constrained) == expected


def test_resource_limits():
    p = prog(R(tuple(f"a{i}" for i in range(8)), choice=True))
    with pytest.raises(ResourceLimitError):
        enumerate_answer_sets(p, max_models=100)
    with pytest.raises(ResourceLimitError):
        enumerate_answer_sets(p, max_atoms=4)


def test_output_is_sorted():
    models = enumerate_answer_sets(prog(R(("c", "a", "b"), choice=True)))
    assert models == sorted(models, key=lambda m: tuple(sorted(m)))


@pytest.mark.parametrize("world,formula,expected", [
    ({"p", "q"}, "q :- p", True),
    ({"p"}, "q :- p", False),
    (set(), "not p", True),
    ({"-p", "r"}, "-p & r", True),
    ({"a"}, "a -> b", False),
])
def test_holds(world, formula, expected):
    assert holds(frozenset(world), parse_formula(formula)) is expected


def test_adapter_round_trip():
    p = prog(R(("a", "b"), choice=True, lower=1), R((), ("a",), ("b",)),
             parity=[ParityConstraint(("a", "b"))])
    text = write_ground_program(p)
    assert "1{a; b}" in text and "#odd{a; b}." in text
    models = enumerate_answer_sets(p)
    lines = "\n".join(" ".join(sorted(m)) or "{}" for m in models)
    assert read_models(lines) == models

import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import null_space

from prasp.distribution import (LEAST_VIOLATION, MAX_ENTROPY, UNIQUE, LinearSystem,
                                build_constraint_system, entropy, solve_distribution)
from prasp.grounding import ground
from prasp.solver import enumerate_answer_sets
from prasp.syntax import parse_program
from prasp.transform import spanning_program

FIX = Path(__file__).parent / "fixtures"


def system_for(text):
    gwp = ground(parse_program(text))
    sp = spanning_program(gwp)
    worlds = [sp.program.project(m) for m in enumerate_answer_sets(sp.program)]
    return build_constraint_system(worlds, gwp.formulas)


def by_world(sys, vec):
    return {w: float(v) for w, v in zip(sys.worlds, vec)}


W = frozenset
PQ, NPR, E, P = W({"p", "q"}), W({"-p", "r"}), W(), W({"p"})


def test_rows_of_three_formula_program():
    sys = system_for((FIX / "spanning.prasp").read_text())
    rows = [by_world(sys, row) for row in sys.A]
    assert rows[0] == {PQ: 1, NPR: 1, E: 1, P: 0}
    assert rows[1] == {PQ: 1, NPR: 0, E: 0, P: 1}
    assert rows[2] == {PQ: 0, NPR: 1, E: 0, P: 0}
    assert all(v == 1 for v in rows[3].values())
    assert list(sys.b) == [0.7, 0.3, 0.2, 1.0]


def test_unique_solution_matches_linear_algebra():
    sys = system_for((FIX / "spanning.prasp").read_text())
    d = solve_distribution(sys)
    oracle = np.linalg.solve(sys.A, sys.b)   # square and regular here
    assert d.status == UNIQUE
    np.testing.assert_allclose(d.probabilities, oracle, atol=1e-8)
    got = by_world(sys, d.probabilities)
    for w, v in {PQ: 0.0, NPR: 0.2, E: 0.5, P: 0.3}.items():
        assert got[w] == pytest.approx(v, abs=1e-8)


def test_trivial_system():
    sys = build_constraint_system([W({"a"})], parse_program("[1] a.").statements)
    assert sys.A.tolist() == [[1.0], [1.0]] and sys.b.tolist() == [1.0, 1.0]
    assert solve_distribution(sys).probabilities.tolist() == [1.0]


def test_symmetric_max_entropy_is_uniform():
    d = solve_distribution(system_for("[0.5] a.\n[0.5] b.\n"))
    assert d.status == MAX_ENTROPY
    np.testing.assert_allclose(d.probabilities, 0.25, atol=1e-8)


def test_coin_rows():
    sys = system_for((FIX / "coin3.prasp").read_text())
    assert sys.A.shape == (4, 8)
    heads1 = [("coin_out(1,heads)" in w) for w in sys.worlds]
    assert sys.A[0].astype(bool).tolist() == heads1
    assert sys.A[:3].sum(axis=1).tolist() == [4, 4, 4]


@pytest.mark.parametrize("p,expected", [
    (np.full(4, 0.25), math.log(4)),
    (np.array([1.0, 0, 0]), 0.0),
    (np.array([0.2, 0.5, 0.3, 0.0]), -(0.2 * math.log(0.2) + 0.5 * math.log(0.5) + 0.3 * math.log(0.3))),
])
def test_entropy(p, expected):
    assert entropy(p) == pytest.approx(expected, abs=1e-12)


def test_entropy_value_of_three_formula_solution():
    assert entropy([0.2, 0.5, 0.3, 0.0]) == pytest.approx(1.0297, abs=1e-4)


def _check_optimal(sys, d):
    p = d.probabilities
    assert abs(p.sum() - 1) <= 1e-9 and p.min() >= -1e-9 and p.max() <= 1 + 1e-9
    assert np.max(np.abs(sys.A @ p - sys.b)) <= 1e-8
    support = p > 1e-12
    if d.status == MAX_ENTROPY:
        N = null_space(sys.A[:, support])
        if N.size:
            grad = -(np.log(p[support]) + 1)
            assert np.linalg.norm(N.T @ grad) <= 1e-6


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 12), st.integers(1, 5), st.integers(0, 2**31 - 1))
def test_random_consistent_systems(n, m, seed):
    rng = np.random.default_rng(seed)
    A = (rng.random((m, n)) < 0.5).astype(float)
    x = rng.dirichlet(np.ones(n))
    if rng.random() < 0.3:          # push some worlds to zero
        x[rng.random(n) < 0.4] = 0
        x = x / x.sum() if x.sum() > 0 else np.full(n, 1 / n)
    A = np.vstack([A, np.ones(n)])
    sys = LinearSystem(A, A @ x, tuple(range(n)))
    d = solve_distribution(sys)
    assert d.status in (UNIQUE, MAX_ENTROPY)
    _check_optimal(sys, d)


def test_quantifier_system_is_feasible():
    sys = system_for((FIX / "quantifiers.prasp").read_text())
    d = solve_distribution(sys)
    assert d.status == MAX_ENTROPY
    _check_optimal(sys, d)


def test_inconsistent_weights():
    sys = system_for("[0.3] a.\n[0.6] a & b.\n")
    d = solve_distribution(sys)
    assert d.status == LEAST_VIOLATION
    # closed form: mass t on {a,b}, nothing on {a}; minimize (t-.3)^2 + (t-.6)^2
    got = by_world(sys, d.probabilities)
    assert got[W({"a", "b"})] == pytest.approx(0.45, abs=1e-9)
    assert d.residual == pytest.approx(math.sqrt(2 * 0.15 ** 2), abs=1e-9)
    assert abs(d.probabilities.sum() - 1) <= 1e-9


def test_least_violation_tie_break_by_entropy():
    # a is over-constrained; b is free and should stay uniform given a
    sys = system_for("[0.3] a.\n[0.6] a & c.\n[0.5] b.\n")
    d = solve_distribution(sys)
    assert d.status == LEAST_VIOLATION
    pb = sum(p for w, p in zip(sys.worlds, d.probabilities) if "b" in w)
    assert pb == pytest.approx(0.5, abs=1e-9)

from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prasp.grounding import ground
from prasp.inference import (InferenceConfig, ZeroProbabilityError, conditional,
                             emulation_frequency, evaluate_query, format_probability,
                             inclusion_exclusion, inclusion_exclusion_check, marginal, prepare)
from prasp.syntax import And, Not, Or, parse_formula, parse_program, parse_queries, parse_query

FIX = Path(__file__).parent / "fixtures"
F = parse_formula


def load(name):
    return ground(parse_program((FIX / name).read_text()))


COIN = load("coin3.prasp")
SPAN = load("spanning.prasp")
QUANT = load("quantifiers.prasp")


def test_coin_marginals():
    assert marginal(COIN, F("coin_out(1,tails)")) == pytest.approx(0.4, abs=1e-9)
    assert marginal(COIN, F("win")) == pytest.approx(0.15, abs=1e-9)


def test_tautology():
    for g in (COIN, SPAN, QUANT):
        assert marginal(g, F("a | not a")) == pytest.approx(1.0, abs=1e-12)


def test_conditionals():
    allheads = F("coin_out(1,heads) & coin_out(2,heads) & coin_out(3,heads)")
    assert conditional(COIN, F("win"), allheads) == pytest.approx(1.0, abs=1e-9)
    assert conditional(COIN, F("win"), F("win")) == pytest.approx(1.0, abs=1e-12)
    assert conditional(SPAN, F("q"), F("p")) == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(ZeroProbabilityError):
        conditional(SPAN, F("r"), F("p & q"))


def test_answer_lines():
    q = parse_query("[?] coin_out(1,heads) | coin_out(1,tails).")
    assert evaluate_query(COIN, q).line() == "[1] coin_out(1,heads) | coin_out(1,tails)."
    qs, decls = parse_queries((FIX / "quantifiers.queries").read_text())
    dm = QUANT.domains.with_decls(decls)
    lines = [evaluate_query(QUANT, q, domains=dm) for q in qs]
    assert lines[1].line(digits=6) == "[0.1] ![Z]: v(Z)."
    cond = evaluate_query(COIN, parse_query("[?|coin_out(1,heads)] win."))
    assert cond.line(digits=6) == "[0.25|coin_out(1,heads)] win."


def test_format_probability():
    assert format_probability(1.0) == "1"
    assert format_probability(0.0) == "0"
    assert format_probability(0.3999999999999999) == "0.3999999999999999"
    assert format_probability(0.15000000000000005, 6) == "0.15"


def test_query_with_domain_variable():
    assert marginal(QUANT, F("v(X)")) == pytest.approx(0.1, abs=1e-9)


def test_constant_formula_warning(caplog):
    g = ground(parse_program("a.\n[0.5] a.\n"))
    with caplog.at_level("WARNING"):
        prepare(g, InferenceConfig(seed=123))
    assert any("every world" in r.message for r in caplog.records)


# ---- properties on exact distributions -----------------------------------

coin_atoms = [f"coin_out({i},{s})" for i in (1, 2, 3) for s in ("heads", "tails")] + ["win"]
lits = st.sampled_from(coin_atoms).map(F) | st.sampled_from(coin_atoms).map(lambda a: Not(F(a)))


@settings(max_examples=40, deadline=None)
@given(lits, lits)
def test_complement_and_monotonicity(a, b):
    pa, pb = marginal(COIN, a), marginal(COIN, b)
    assert pa + marginal(COIN, Not(a)) == pytest.approx(1.0, abs=1e-9)
    pand, por = marginal(COIN, And((a, b))), marginal(COIN, Or((a, b)))
    assert pand <= min(pa, pb) + 1e-12
    assert max(pa, pb) <= por + 1e-12


@settings(max_examples=25, deadline=None)
@given(st.lists(lits, min_size=3, max_size=3))
def test_inclusion_exclusion_on_coin(ls):
    assert inclusion_exclusion_check(COIN, ls)


def test_inclusion_exclusion_disjoint():
    g = ground(parse_program("1{a; b}1.\n[0.3] a.\n"))
    lhs, rhs = inclusion_exclusion(g, [F("a"), F("b")])
    assert lhs == pytest.approx(marginal(g, F("a")) + marginal(g, F("b")), abs=1e-12)
    assert lhs == pytest.approx(rhs, abs=1e-9)


def test_inclusion_exclusion_quantifier_identity():
    lhs, rhs = inclusion_exclusion(QUANT, [F("v(1)"), F("v(2)"), F("v(3)")])
    assert lhs == pytest.approx(rhs, abs=1e-9)


# ---- modes --------------------------------------------------------------

def test_sampled_with_full_world_set_equals_exact():
    exact = prepare(COIN)
    cfg = InferenceConfig(mode="sampled", samples=300, seed=2)
    sampled = prepare(COIN, cfg)
    assert set(sampled.worlds) == set(exact.worlds)
    for a in coin_atoms:
        assert marginal(COIN, F(a), cfg) == pytest.approx(marginal(COIN, F(a)), abs=1e-12)


def test_sampled_mode_close_at_500():
    cfg = InferenceConfig(mode="sampled", samples=500, seed=17)
    assert abs(marginal(COIN, F("win"), cfg) - 0.15) <= 0.05


def test_emulation_matches_exact_on_three_coins():
    emu = InferenceConfig(mode="emulation")
    for a in coin_atoms:
        assert marginal(COIN, F(a), emu) == pytest.approx(marginal(COIN, F(a)), abs=1e-9)


def test_emulation_ten_coins():
    g = load("coin10.prasp")
    emu = InferenceConfig(mode="emulation")
    assert emulation_frequency(g, F("win"), emu) == Fraction("0.001171875")
    assert emulation_frequency(g, F("not win"), emu) == Fraction("0.998828125")
    assert emulation_frequency(g, F("coin_out(1,heads)"), emu) == Fraction(3, 5)
    assert emulation_frequency(g, F("coin_out(2,heads)"), emu) == Fraction(1, 2)


def test_config_validation():
    with pytest.raises(ValueError):
        InferenceConfig(mode="magic")
    with pytest.raises(ValueError):
        InferenceConfig(mode="sampled", samples=0)


def test_quantifier_distribution_against_optimizer_oracle():
    from oracles import maxent_oracle
    model = prepare(QUANT)
    ref = maxent_oracle(model.system.A, model.system.b)
    np.testing.assert_allclose(model.distribution.probabilities, ref, atol=1e-6)
    exists = sum(p for w, p in zip(model.worlds, ref) if any(a.startswith("v(") for a in w))
    assert marginal(QUANT, F("?[X]: v(X)")) == pytest.approx(exists, abs=1e-6)

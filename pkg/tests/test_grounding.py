from pathlib import Path

import pytest

from prasp.grounding import (DomainMap, GroundingError, atoms_of, build_domains,
                             expand_quantifiers, expand_sugar, free_vars, ground,
                             ground_query_formula)
from prasp.syntax import (And, Atom, Cardinality, Or, Var, parse_formula, parse_program,
                          print_formula, print_statement)

FIX = Path(__file__).parent / "fixtures"


def dom(**vars_) -> DomainMap:
    return DomainMap(tuple(sorted((k, tuple(v)) for k, v in vars_.items())))


def test_sugar_coin_rules():
    prog = parse_program((FIX / "coin3.prasp").read_text())
    out = [print_statement(s) for s in expand_sugar(prog).statements if s.weight == 0.5]
    assert out == ["[0.5] coin_out(2,heads) :- coin(2), 2 != 1.",
                   "[0.5] coin_out(3,heads) :- coin(3), 3 != 1."]


def test_sugar_ground_formula_unchanged():
    out = expand_sugar(parse_program("[[0.5]] f."))
    assert [print_statement(s) for s in out.statements] == ["[0.5] f."]


def test_sugar_weight_one_expansion():
    out = expand_sugar(parse_program("p(1). p(2).\n#domain p(X).\n[[1.0]] p(X)."))
    assert [print_statement(s) for s in out.statements][2:] == ["[1] p(1).", "[1] p(2)."]


def test_sugar_unbound_variable():
    with pytest.raises(GroundingError):
        expand_sugar(parse_program("[[0.5]] f(X)."))


def test_sugar_instance_count_respects_guards():
    prog = parse_program("n(1..6).\n[[0.5]] a(X) :- n(X), X > 2, X != 5.")
    assert sum(1 for s in expand_sugar(prog).statements if s.weight == 0.5) == 3


def test_quantifiers():
    v = lambda i: Atom("v", (i,))
    d = dom(Z=[1, 2, 3])
    assert expand_quantifiers(parse_formula("![Z]: v(Z)"), d) == And((v(1), v(2), v(3)))
    assert expand_quantifiers(parse_formula("?[Z]: v(Z)"), d) == Or((v(1), v(2), v(3)))
    assert expand_quantifiers(parse_formula("![Z]: v(Z)"), dom(Z=["c"])) == Atom("v", ("c",))


def test_quantifier_without_domain():
    with pytest.raises(GroundingError):
        expand_quantifiers(parse_formula("?[Y]: v(Y)"), dom(Z=[1]))


def test_nested_quantifier_shadowing():
    f = expand_quantifiers(parse_formula("![Z]: (v(Z) & ?[Z]: w(Z))"), dom(Z=[1, 2]))
    assert print_formula(f) == "(v(1) & (w(1) | w(2))) & (v(2) & (w(1) | w(2)))"


def test_conditional_literal_expansion():
    g = ground(parse_program("point(1..100).\n1{atpoint(X):point(X)}1."))
    card = [s.formula for s in g.formulas if isinstance(s.formula, Cardinality)]
    assert len(card) == 1 and len(card[0].elements) == 100
    assert card[0].elements[0].literal == Atom("atpoint", (1,))


def test_ground_identity():
    text = "a.\nb :- a, not c.\n[0.4] c | d.\n"
    g = ground(parse_program(text))
    assert "\n".join(print_statement(s) for s in g.formulas) + "\n" == text
    assert g.atoms == ("a", "b", "c", "d")


def test_weighted_domain_formula_is_one_conjunction():
    g = ground(parse_program((FIX / "quantifiers.prasp").read_text()))
    assert print_statement(g.formulas[-1]) == "[0.1] v(1) & v(2) & v(3)."


def test_unsafe_variable():
    with pytest.raises(GroundingError, match="unsafe"):
        ground(parse_program("q(X) :- not p(X).\np(1)."))


def test_empty_domain():
    with pytest.raises(GroundingError, match="empty domain"):
        build_domains(parse_program("#domain p(X).\na."))


def test_rule_binding_through_derived_atoms():
    g = ground(parse_program("n(1..2).\nm(X) :- n(X).\nk(X) :- m(X)."))
    assert "k(2)" in g.atoms and "k(3)" not in g.atoms


def test_deterministic_and_variable_free():
    text = (FIX / "coin3.prasp").read_text()
    a, b = ground(parse_program(text)), ground(parse_program(text))
    assert a == b and [str(s) for s in a.formulas] == [str(s) for s in b.formulas]
    for s in a.formulas:
        assert not free_vars(s.formula)
        assert not any(isinstance(t, Var) for at in atoms_of(s.formula) for t in at.args)


def test_query_universal_closure():
    d = dom(X=[1, 2, 3])
    assert print_formula(ground_query_formula(parse_formula("v(X)"), d)) == "v(1) & v(2) & v(3)"
    with pytest.raises(GroundingError):
        ground_query_formula(parse_formula("v(Y)"), d)

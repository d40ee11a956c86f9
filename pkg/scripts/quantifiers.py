"""Quantifier queries plus the inclusion-exclusion cross-check."""
from _common import FIXTURES, load
from prasp.inference import evaluate_query, inclusion_exclusion, prepare
from prasp.syntax import parse_formula, parse_queries


def main():
    gwp = load("quantifiers.prasp")
    queries, decls = parse_queries((FIXTURES / "quantifiers.queries").read_text())
    domains = gwp.domains.with_decls(decls)
    for q in queries:
        print(evaluate_query(gwp, q, domains=domains).line())
    lhs, rhs = inclusion_exclusion(gwp, [parse_formula(f"v({i})") for i in (1, 2, 3)])
    print(f"Pr(v(1) | v(2) | v(3)) = {lhs!r}; inclusion-exclusion sum = {rhs!r}")
    print(prepare(gwp).distribution.report())


if __name__ == "__main__":
    main()

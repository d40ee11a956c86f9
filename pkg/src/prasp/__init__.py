"""Probabilistic answer set programming: parsing, grounding, answer-set
enumeration, maximum-entropy world distributions, XOR-streamlined sampling,
inference and weight learning."""

from prasp.syntax import parse_program, parse_query, parse_queries, print_formula

__version__ = "0.1.0"

__all__ = ["parse_program", "parse_query", "parse_queries", "print_formula"]

"""Answer the three-coin queries in exact and sampled mode."""
import argparse

from _common import FIXTURES, load
from prasp.inference import InferenceConfig, evaluate_query
from prasp.syntax import parse_queries


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    gwp = load("coin3.prasp")
    queries, _ = parse_queries((FIXTURES / "coin3.queries").read_text())
    sampled = InferenceConfig(mode="sampled", samples=args.samples, seed=args.seed)
    print(f"{'exact':>20} {'sampled':>20}  query")
    for q in queries:
        a, b = evaluate_query(gwp, q), evaluate_query(gwp, q, sampled)
        print(f"{a.probability!r:>20} {b.probability!r:>20}  {a.line(6)}")


if __name__ == "__main__":
    main()

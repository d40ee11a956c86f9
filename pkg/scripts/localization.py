"""Learn the weight of moved(1) from the observation safe."""
import argparse
import time

from _common import FIXTURES, load
from prasp.learning import LearningConfig, LearningTask, bb_learn, format_hypothesis
from prasp.solver import enumerate_answer_sets
from prasp.syntax import parse_formula, parse_program
from prasp.transform import spanning_program


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--w0", type=float, default=0.5)
    args = ap.parse_args()

    t0 = time.perf_counter()
    n = len(enumerate_answer_sets(spanning_program(load("localization.prasp")).program))
    print(f"spanning program: {n} answer sets ({time.perf_counter() - t0:.2f} s)")

    background = parse_program((FIXTURES / "localization_background.prasp").read_text())
    hyp = [parse_formula("moved(1)")]
    task = LearningTask(hyp, background, [parse_formula("safe")], LearningConfig(w0=(args.w0,)))
    t0 = time.perf_counter()
    res = bb_learn(task)
    print(f"learning: {res.iterations} iterations, likelihood {res.likelihood!r} "
          f"({time.perf_counter() - t0:.2f} s)")
    print(format_hypothesis(hyp, res.weights), end="")


if __name__ == "__main__":
    main()

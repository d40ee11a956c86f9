"""Command-line interface: ``prasp infer | learn | worlds``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import TextIO

from prasp.distribution import SolverOptions
from prasp.grounding import GroundingError, ground
from prasp.inference import InferenceConfig, InferenceError, evaluate_query, prepare
from prasp.learning import LearningConfig, LearningTask, bb_learn, format_hypothesis
from prasp.sampling import SamplingError
from prasp.solver import ResourceLimitError
from prasp.syntax import ParseError, Program, parse_program, parse_queries
from prasp.transform import UnsupportedFormulaError

__all__ = ["RunConfig", "UsageError", "run_infer", "run_learn", "run_worlds", "main",
           "build_parser"]

log = logging.getLogger("prasp")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2

_RUNTIME_ERRORS = (ParseError, GroundingError, UnsupportedFormulaError, InferenceError,
                   SamplingError, ResourceLimitError, ValueError)


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    program: Path | None = None
    queries: Path | None = None
    inline_queries: list[str] = field(default_factory=list)
    hypothesis: Path | None = None
    examples: Path | None = None
    output_path: Path | None = None
    trace_path: Path | None = None
    mode: str = "exact"
    samples: int = 100
    seed: int = 0
    xor_n: int | None = None
    retries: int = 32
    output: str = "text"
    round_digits: int | None = None
    tol: float = 1e-6
    max_iters: int = 500
    alpha0: float = 1.0

    def inference(self) -> InferenceConfig:
        return InferenceConfig(mode=self.mode, samples=self.samples, seed=self.seed,
                               xor_n=self.xor_n, retries=self.retries,
                               solver=SolverOptions())


def _read(path: Path | None, what: str) -> str:
    if path is None:
        raise UsageError(f"missing {what} file")
    try:
        return Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise UsageError(f"{what} file not found: {path}") from None
    except OSError as exc:
        raise UsageError(f"cannot read {what} file {path}: {exc}") from None


def _open_out(path: Path | None, default: TextIO):
    return open(path, "w", encoding="utf-8") if path is not None else default


def _log_model(model) -> None:
    if model.distribution is None:
        log.info("emulation: %d answer sets", model.world_count)
    else:
        log.info("%s: %d worlds, status %s, residual %.3e", model.config.mode,
                 model.world_count, model.status, model.residual)


def run_infer(cfg: RunConfig, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    program = parse_program(_read(cfg.program, "program"))
    text = _read(cfg.queries, "query") if cfg.queries is not None else ""
    text += "".join(q if q.rstrip().endswith(".") else q + "." for q in cfg.inline_queries)
    queries, decls = parse_queries(text)
    gwp = ground(program)
    domains = gwp.domains.with_decls(decls)
    icfg = cfg.inference()
    if queries:
        _log_model(prepare(gwp, icfg))
    stream = _open_out(cfg.output_path, out)
    try:
        for q in queries:
            ans = evaluate_query(gwp, q, icfg, domains=domains)
            if cfg.output == "structured":
                stream.write(json.dumps(ans.record()) + "\n")
            else:
                stream.write(ans.line(cfg.round_digits) + "\n")
    finally:
        if stream is not out:
            stream.close()
    return EXIT_OK


def run_worlds(cfg: RunConfig, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    gwp = ground(parse_program(_read(cfg.program, "program")))
    model = prepare(gwp, cfg.inference())
    _log_model(model)
    if cfg.output == "structured":
        probs = (model.distribution.probabilities if model.distribution is not None
                 else [1.0 / model.world_count] * model.world_count)
        for w, p in zip(model.worlds, probs):
            out.write(json.dumps({"world": sorted(w), "probability": float(p)}) + "\n")
    elif model.distribution is not None:
        out.write(model.distribution.report() + "\n")
    else:
        out.write(f"status: emulation\nworlds: {model.world_count}\n")
        for w in model.worlds:
            out.write("  {" + ", ".join(sorted(w)) + "}\n")
    return EXIT_OK


def run_learn(cfg: RunConfig, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    background = (parse_program(_read(cfg.program, "background"))
                  if cfg.program is not None else Program())
    hyp_prog = parse_program(_read(cfg.hypothesis, "hypothesis"))
    ex_prog = parse_program(_read(cfg.examples, "examples"))
    hypothesis = [st.formula for st in hyp_prog.statements]
    # weights already present in the hypothesis file are starting points
    w0 = tuple(0.5 if st.weight is None else st.weight for st in hyp_prog.statements)
    examples = [st.formula for st in ex_prog.statements]
    bad = [st for st in ex_prog.statements if st.weight is not None]
    if bad:
        log.warning("ignoring weights on %d example(s)", len(bad))
    background = Program(list(background.statements),
                         list(background.domains) + list(hyp_prog.domains))
    lcfg = LearningConfig(alpha0=cfg.alpha0, w0=w0, tol=cfg.tol, max_iters=cfg.max_iters,
                          inference=cfg.inference())
    result = bb_learn(LearningTask(hypothesis, background, examples, lcfg))
    stream = _open_out(cfg.output_path, out)
    try:
        stream.write(format_hypothesis(hypothesis, result.weights))
    finally:
        if stream is not out:
            stream.close()
    if cfg.trace_path is not None:
        with open(cfg.trace_path, "w", encoding="utf-8") as fh:
            for e in result.trace:
                fh.write(json.dumps({"iteration": e.iteration, "weights": list(e.weights),
                                     "likelihood": e.likelihood, "step_norm": e.step_norm,
                                     "alpha": e.alpha}) + "\n")
    print(f"likelihood: {result.likelihood!r}", file=sys.stderr)
    print(f"iterations: {result.iterations} ({result.message})", file=sys.stderr)
    if result.diverged and result.likelihood <= result.trace[0].likelihood:
        log.error("learning diverged without improving the likelihood")
        return EXIT_FAILURE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prasp", description="Probabilistic answer set programming.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug diagnostics")
    parser.add_argument("--quiet", action="store_true", help="only warnings and errors")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        # logging flags are accepted after the subcommand too
        p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
        p.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
        p.add_argument("--mode", choices=["exact", "sampled", "emulation"], default="exact")
        p.add_argument("--samples", type=int, default=100, help="sampling calls (sampled mode)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--xor-n", type=int, default=None,
                       help="XOR constraints per sample (default ceil(log2 #atoms))")
        p.add_argument("--retries", type=int, default=32,
                       help="redraws before the XOR count is halved")
        p.add_argument("--output", choices=["text", "structured"], default="text")
        p.add_argument("-o", "--output-file", type=Path, default=None)

    p = sub.add_parser("infer", help="answer queries")
    p.add_argument("program", type=Path)
    p.add_argument("queries", type=Path, nargs="?", default=None)
    p.add_argument("-q", "--query", action="append", default=[],
                   help="inline query such as '[?] win.' (repeatable)")
    p.add_argument("--round", type=int, default=None, metavar="DIGITS",
                   help="round probabilities for display")
    common(p)

    p = sub.add_parser("learn", help="learn hypothesis weights")
    p.add_argument("--background", type=Path, default=None)
    p.add_argument("--hypothesis", type=Path, required=True)
    p.add_argument("--examples", type=Path, required=True)
    p.add_argument("--trace", type=Path, default=None, help="write the iteration trace (JSON lines)")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--alpha0", type=float, default=1.0)
    common(p)

    p = sub.add_parser("worlds", help="list possible worlds and their probabilities")
    p.add_argument("program", type=Path)
    common(p)
    return parser


def _config(args) -> RunConfig:
    cfg = RunConfig(command=args.command, mode=args.mode, samples=args.samples,
                    seed=args.seed, xor_n=args.xor_n, retries=args.retries,
                    output=args.output, output_path=args.output_file)
    if args.command == "infer":
        cfg.program, cfg.queries = args.program, args.queries
        cfg.inline_queries, cfg.round_digits = args.query, args.round
    elif args.command == "worlds":
        cfg.program = args.program
    else:
        cfg.program, cfg.hypothesis, cfg.examples = args.background, args.hypothesis, args.examples
        cfg.trace_path = args.trace
        cfg.tol, cfg.max_iters, cfg.alpha0 = args.tol, args.max_iters, args.alpha0
    if cfg.samples < 1:
        raise UsageError("--samples must be at least 1")
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("prasp: %(levelname)s: %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(level)
    log.propagate = False
    commands = {"infer": run_infer, "learn": run_learn, "worlds": run_worlds}
    try:
        cfg = _config(args)
        return commands[args.command](cfg)
    except UsageError as exc:
        print(f"prasp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _RUNTIME_ERRORS as exc:
        print(f"prasp: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())

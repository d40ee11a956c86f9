"""Marginal and conditional queries over possible worlds.

Three modes are available:

``exact``
    all answer sets of the spanning program are the worlds;
``sampled``
    the worlds are a near-uniform sample of those answer sets, obtained
    with random XOR constraints, and the distribution is solved on them;
``emulation``
    weights are compiled into helper atoms and a formula's probability is
    the fraction of answer sets in which it holds (no equation solving).
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from prasp.distribution import (LinearSystem, SolverOptions, WorldDistribution,
                                build_constraint_system, solve_distribution)
from prasp.grounding import (DomainMap, GroundWeightedProgram, ground_query_formula,
                             is_ground)
from prasp.sampling import DEFAULT_RETRIES, sample_worlds
from prasp.solver import DEFAULT_MAX_ATOMS, DEFAULT_MAX_MODELS, enumerate_answer_sets, holds
from prasp.syntax import And, Formula, Or, Query, print_formula
from prasp.transform import DEFAULT_MAX_DENOMINATOR, helper_atom_transform, spanning_program

__all__ = [
    "InferenceConfig", "InferenceError", "ZeroProbabilityError", "WorldModel",
    "Answer", "prepare", "marginal", "conditional", "evaluate_query",
    "emulation_frequency", "inclusion_exclusion", "inclusion_exclusion_check",
    "format_probability", "MODES",
]

log = logging.getLogger(__name__)

MODES = ("exact", "sampled", "emulation")


class InferenceError(RuntimeError):
    pass


class ZeroProbabilityError(InferenceError):
    pass


@dataclass(frozen=True)
class InferenceConfig:
    mode: str = "exact"
    samples: int = 100
    seed: int = 0
    xor_n: int | None = None
    retries: int = DEFAULT_RETRIES
    max_atoms: int = DEFAULT_MAX_ATOMS
    max_models: int = DEFAULT_MAX_MODELS
    max_denominator: int = DEFAULT_MAX_DENOMINATOR
    zero_tol: float = 1e-12
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        if self.mode == "sampled" and self.samples < 1:
            raise ValueError("sampled mode needs at least one sample")


@dataclass
class WorldModel:
    """Worlds plus either a solved distribution or (emulation) raw models."""
    program: GroundWeightedProgram
    config: InferenceConfig
    worlds: tuple
    distribution: WorldDistribution | None = None
    system: LinearSystem | None = None

    @property
    def world_count(self) -> int:
        return len(self.worlds)

    @property
    def residual(self) -> float:
        return 0.0 if self.distribution is None else self.distribution.residual

    @property
    def status(self) -> str:
        return "emulation" if self.distribution is None else self.distribution.status

    def indicator(self, phi: Formula) -> np.ndarray:
        return np.fromiter((holds(w, phi) for w in self.worlds), dtype=bool,
                           count=len(self.worlds))

    def probability(self, phi: Formula) -> float:
        mask = self.indicator(phi)
        if self.distribution is None:
            return float(Fraction(int(mask.sum()), len(self.worlds)))
        p = float(self.distribution.probabilities[mask].sum())
        return min(max(p, 0.0), 1.0)

    def frequency(self, phi: Formula) -> Fraction:
        return Fraction(int(self.indicator(phi).sum()), len(self.worlds))


def _warn_constant(system: LinearSystem, gwp: GroundWeightedProgram) -> None:
    for row, label, st in zip(system.A[:-1], system.labels,
                              (s for s in gwp.formulas if s.weight is not None)):
        if st.weight in (0.0, 1.0):
            continue
        if row.all() or not row.any():
            log.warning("weighted formula %s is %s in every world; its weight %r "
                        "cannot be met", label, "true" if row.all() else "false", st.weight)


@functools.lru_cache(maxsize=64)
def prepare(gwp: GroundWeightedProgram, cfg: InferenceConfig = InferenceConfig()) -> WorldModel:
    """Compute (and memoize) the worlds and distribution for ``gwp`` under ``cfg``."""
    if cfg.mode == "emulation":
        prog = helper_atom_transform(gwp, cfg.max_denominator)
        models = enumerate_answer_sets(prog, max_atoms=cfg.max_atoms,
                                       max_models=cfg.max_models)
        if not models:
            raise InferenceError("the helper-atom program has no answer sets")
        worlds = tuple(prog.project(m) for m in models)
        log.debug("emulation: %d answer sets", len(worlds))
        return WorldModel(gwp, cfg, worlds)
    sp = spanning_program(gwp)
    if cfg.mode == "exact":
        models = enumerate_answer_sets(sp.program, max_atoms=cfg.max_atoms,
                                       max_models=cfg.max_models)
    else:
        models = sample_worlds(sp.program, cfg.samples, cfg.seed, n_xor=cfg.xor_n,
                               retries=cfg.retries, max_atoms=cfg.max_atoms)
    if not models:
        raise InferenceError("the spanning program has no answer sets")
    worlds = tuple(dict.fromkeys(sp.program.project(m) for m in models))
    system = build_constraint_system(worlds, gwp.formulas)
    _warn_constant(system, gwp)
    dist = solve_distribution(system, cfg.solver)
    log.debug("%s: %d worlds, status %s, residual %.3e", cfg.mode, len(worlds),
             dist.status, dist.residual)
    return WorldModel(gwp, cfg, worlds, dist, system)


def _ground_query(phi: Formula, domains: DomainMap) -> Formula:
    return phi if is_ground(phi) else ground_query_formula(phi, domains)


def marginal(program: GroundWeightedProgram, phi: Formula,
             cfg: InferenceConfig = InferenceConfig(), *,
             domains: DomainMap | None = None) -> float:
    model = prepare(program, cfg)
    return model.probability(_ground_query(phi, domains or program.domains))


def conditional(program: GroundWeightedProgram, a: Formula, b: Formula,
                cfg: InferenceConfig = InferenceConfig(), *,
                domains: DomainMap | None = None) -> float:
    """``Pr(a & b) / Pr(b)`` over a single world set and distribution."""
    dm = domains or program.domains
    model = prepare(program, cfg)
    ga, gb = _ground_query(a, dm), _ground_query(b, dm)
    pb = model.probability(gb)
    if pb <= cfg.zero_tol:
        raise ZeroProbabilityError(f"condition {print_formula(b)} has probability {pb!r}")
    return min(model.probability(And((ga, gb))) / pb, 1.0)


def emulation_frequency(program: GroundWeightedProgram, phi: Formula,
                        cfg: InferenceConfig = InferenceConfig(mode="emulation"), *,
                        domains: DomainMap | None = None) -> Fraction:
    """Exact answer-set frequency of ``phi`` in the helper-atom program."""
    if cfg.mode != "emulation":
        raise ValueError("emulation_frequency needs an emulation-mode config")
    model = prepare(program, cfg)
    return model.frequency(_ground_query(phi, domains or program.domains))


def format_probability(p: float, digits: int | None = None) -> str:
    if digits is not None:
        p = round(p, digits)
    if float(p).is_integer():
        return str(int(p))
    return repr(float(p))


@dataclass(frozen=True)
class Answer:
    query: Query
    probability: float
    mode: str
    world_count: int
    residual: float
    status: str

    def line(self, digits: int | None = None) -> str:
        p = format_probability(self.probability, digits)
        target = print_formula(self.query.target)
        if self.query.condition is None:
            return f"[{p}] {target}."
        return f"[{p}|{print_formula(self.query.condition)}] {target}."

    def record(self) -> dict:
        out = {"probability": self.probability, "formula": print_formula(self.query.target),
               "mode": self.mode, "world_count": self.world_count,
               "residual": self.residual, "status": self.status}
        if self.query.condition is not None:
            out["condition"] = print_formula(self.query.condition)
        return out


def evaluate_query(program: GroundWeightedProgram, q: Query,
                   cfg: InferenceConfig = InferenceConfig(), *,
                   domains: DomainMap | None = None) -> Answer:
    model = prepare(program, cfg)
    if q.condition is None:
        p = marginal(program, q.target, cfg, domains=domains)
    else:
        p = conditional(program, q.target, q.condition, cfg, domains=domains)
    return Answer(q, p, cfg.mode, model.world_count, model.residual, model.status)


def inclusion_exclusion(program: GroundWeightedProgram, literals: Sequence[Formula],
                        cfg: InferenceConfig = InferenceConfig()) -> tuple[float, float]:
    """``(Pr(l1 | ... | ln), sum over non-empty subsets S of (-1)^(|S|+1) Pr(AND S))``."""
    literals = list(literals)
    if not 1 <= len(literals) <= 4:
        raise ValueError("inclusion-exclusion check supports 1 to 4 formulas")
    lhs = marginal(program, Or(tuple(literals)), cfg)
    rhs = 0.0
    for r in range(1, len(literals) + 1):
        for subset in combinations(literals, r):
            conj = subset[0] if r == 1 else And(subset)
            rhs += (-1) ** (r + 1) * marginal(program, conj, cfg)
    return lhs, rhs


def inclusion_exclusion_check(program: GroundWeightedProgram, literals: Iterable[Formula],
                              cfg: InferenceConfig = InferenceConfig(),
                              tol: float = 1e-9) -> bool:
    lhs, rhs = inclusion_exclusion(program, list(literals), cfg)
    return abs(lhs - rhs) <= tol

"""Weight learning for hypothesis formulas.

The weights ``w`` of the hypothesis formulas ``H`` are chosen to maximize
``prod_i Pr(e_i | H_w ∪ B)`` over the examples ``e_i``.  The gradient is
approximated by forward differences and the ascent uses Barzilai-Borwein
step sizes.  Background weights are never modified.

The possible worlds do not depend on ``w`` as long as every hypothesis
formula stays soft, so they are computed once; each likelihood evaluation
only re-solves the distribution for new targets.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from prasp.distribution import LinearSystem, build_constraint_system, solve_distribution
from prasp.grounding import ground, ground_query_formula, is_ground
from prasp.inference import InferenceConfig, InferenceError
from prasp.sampling import sample_worlds
from prasp.solver import ResourceLimitError, enumerate_answer_sets, holds
from prasp.syntax import Formula, Program, WeightedFormula, print_formula, format_weight
from prasp.transform import spanning_program

__all__ = [
    "LearningConfig", "LearningTask", "TraceEntry", "LearningResult",
    "likelihood", "numeric_gradient", "central_gradient", "bb_step_size",
    "barzilai_borwein", "bb_learn", "UNIT_ROUNDOFF", "format_hypothesis",
]

log = logging.getLogger(__name__)

UNIT_ROUNDOFF = 2.0 ** -53
ALPHA_MIN, ALPHA_MAX = 1e-10, 1e10


@dataclass(frozen=True)
class LearningConfig:
    alpha0: float = 1.0
    w0: tuple[float, ...] | None = None   # default 0.5 for every hypothesis
    tol: float = 1e-6
    max_iters: int = 500
    patience: int = 10                    # consecutive decreases before giving up
    world_cap: int = 100_000              # beyond this, worlds are sampled
    inference: InferenceConfig = field(default_factory=InferenceConfig)


@dataclass
class LearningTask:
    hypothesis: list[Formula]
    background: Program
    examples: list[Formula]
    config: LearningConfig = field(default_factory=LearningConfig)

    def __post_init__(self):
        if not self.hypothesis:
            raise ValueError("the hypothesis must contain at least one formula")
        if not self.examples:
            raise ValueError("at least one example is required")
        self._structures: dict = {}


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    weights: tuple[float, ...]
    likelihood: float
    step_norm: float
    alpha: float


@dataclass
class LearningResult:
    weights: tuple[float, ...]
    likelihood: float
    iterations: int
    converged: bool
    diverged: bool
    trace: list[TraceEntry]
    message: str = ""


# --------------------------------------------------------------------------
# Objective
# --------------------------------------------------------------------------

class _Structure:
    """Worlds, constraint matrix and example indicators for one world set."""

    def __init__(self, task: LearningTask, worlds, gwp, hyp_rows: list[int]):
        self.worlds = tuple(worlds)
        self.system = build_constraint_system(self.worlds, gwp.formulas)
        self.hyp_rows = hyp_rows
        dm = gwp.domains
        self.masks = []
        for e in task.examples:
            g = e if is_ground(e) else ground_query_formula(e, dm)
            self.masks.append(np.array([holds(w, g) for w in self.worlds], dtype=bool))
        self.solver_opts = task.config.inference.solver

    def likelihood(self, w: np.ndarray) -> float:
        b = self.system.b.copy()
        b[self.hyp_rows] = np.clip(w, 0.0, 1.0)
        dist = solve_distribution(LinearSystem(self.system.A, b, self.worlds), self.solver_opts)
        out = 1.0
        for m in self.masks:
            out *= min(max(float(dist.probabilities[m].sum()), 0.0), 1.0)
        return out


def _combined(task: LearningTask):
    stmts = list(task.background.statements)
    nb = len(stmts)
    stmts += [WeightedFormula(h, 0.5) for h in task.hypothesis]
    gwp = ground(Program(stmts, list(task.background.domains)))
    weighted = [i for i, st in enumerate(gwp.formulas) if st.weight is not None]
    row_of = {fi: r for r, fi in enumerate(weighted)}
    hyp_rows = [row_of[fi] for fi, src in enumerate(gwp.sources) if src >= nb]
    if len(hyp_rows) != len(task.hypothesis):
        raise ValueError("each hypothesis formula must ground to exactly one formula")
    return gwp, hyp_rows


def _structure(task: LearningTask, k: int) -> _Structure:
    """World structure used at iteration ``k`` (fixed unless sampling)."""
    cache = task._structures
    if "exact" in cache:
        return cache["exact"]
    if k in cache:
        return cache[k]
    if "base" not in cache:
        cache["base"] = _combined(task)
    gwp, hyp_rows = cache["base"]
    program = spanning_program(gwp).program
    cfg = task.config
    if not cache.get("sampled"):
        try:
            models = enumerate_answer_sets(program, max_atoms=cfg.inference.max_atoms,
                                           max_models=cfg.world_cap)
        except ResourceLimitError:
            log.info("more than %d worlds; learning on sampled worlds", cfg.world_cap)
            cache["sampled"] = True
        else:
            if not models:
                raise InferenceError("the spanning program has no answer sets")
            worlds = dict.fromkeys(program.project(m) for m in models)
            cache["exact"] = _Structure(task, worlds, gwp, hyp_rows)
            return cache["exact"]
    seed = int(np.random.SeedSequence([cfg.inference.seed, k]).generate_state(1)[0])
    models = sample_worlds(program, cfg.inference.samples, seed, n_xor=cfg.inference.xor_n,
                           retries=cfg.inference.retries, max_atoms=cfg.inference.max_atoms)
    worlds = dict.fromkeys(program.project(m) for m in models)
    cache[k] = _Structure(task, worlds, gwp, hyp_rows)
    return cache[k]


def likelihood(w: Sequence[float], task: LearningTask, iteration: int = 0) -> float:
    """``prod_i Pr(e_i | H_w ∪ B)`` with ``w`` clamped to [0, 1]."""
    w = np.asarray(w, dtype=float)
    if w.shape != (len(task.hypothesis),):
        raise ValueError(f"expected {len(task.hypothesis)} weights, got {w.shape}")
    return _structure(task, iteration).likelihood(np.clip(w, 0.0, 1.0))


def _as_objective(task_or_fn, iteration: int = 0) -> Callable[[np.ndarray], float]:
    if isinstance(task_or_fn, LearningTask):
        return lambda w: likelihood(w, task_or_fn, iteration)
    return task_or_fn


def _step(wi: float) -> float:
    return math.sqrt(UNIT_ROUNDOFF) * (wi if wi > 0 else 1.0)


def numeric_gradient(w: Sequence[float], task_or_fn, iteration: int = 0,
                     f0: float | None = None) -> np.ndarray:
    """Forward differences with step ``sqrt(u) * w_i`` (``sqrt(u)`` at ``w_i = 0``).

    Where ``w_i + h`` would leave [0, 1] the backward difference is used.
    """
    fn = _as_objective(task_or_fn, iteration)
    w = np.asarray(w, dtype=float)
    base = fn(w) if f0 is None else f0
    g = np.empty_like(w)
    for i, wi in enumerate(w):
        h = _step(wi)
        e = np.zeros_like(w)
        e[i] = h
        if wi + h <= 1.0:
            g[i] = (fn(w + e) - base) / h
        else:
            g[i] = (base - fn(w - e)) / h
    return g


def central_gradient(w: Sequence[float], task_or_fn, h: float = 1e-6,
                     iteration: int = 0) -> np.ndarray:
    """Central-difference reference gradient (interior points only)."""
    fn = _as_objective(task_or_fn, iteration)
    w = np.asarray(w, dtype=float)
    g = np.empty_like(w)
    for i in range(len(w)):
        e = np.zeros_like(w)
        e[i] = h
        g[i] = (fn(w + e) - fn(w - e)) / (2 * h)
    return g


def bb_step_size(s: np.ndarray, y: np.ndarray, previous: float | None = None) -> float:
    """Barzilai-Borwein inverse step for ascent, ``-s.y / s.s``.

    ``y`` is the change of the gradient of the maximized function, so the
    quotient is positive where the function is locally concave.  Otherwise
    the previous value is kept.
    """
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    ss = float(s @ s)
    alpha = -float(s @ y) / ss if ss > 0 else 0.0
    if not alpha > 0:
        return previous if previous is not None else 1.0
    return min(max(alpha, ALPHA_MIN), ALPHA_MAX)


def barzilai_borwein(objective: Callable[[np.ndarray, int], float],
                     gradient: Callable[[np.ndarray, int, float], np.ndarray],
                     w0: Sequence[float], *, alpha0: float = 1.0, tol: float = 1e-6,
                     max_iters: int = 500, patience: int = 10,
                     lower: float = 0.0, upper: float = 1.0) -> LearningResult:
    """Projected BB gradient ascent.

    ``objective(w, k)`` and ``gradient(w, k, f_w)`` receive the iteration
    index.  Each step is ``w + g / alpha`` clamped to the box; the next
    ``alpha`` comes from the effective step.  The best iterate is returned.
    """
    w = np.clip(np.asarray(w0, dtype=float), lower, upper)
    alpha = float(alpha0)
    f = objective(w, 0)
    g = gradient(w, 0, f)
    trace = [TraceEntry(0, tuple(w), f, 0.0, alpha)]
    best_w, best_f = w.copy(), f
    decreases = 0
    converged = diverged = False
    message = "maximum number of iterations reached"
    k = 0
    for k in range(1, max_iters + 1):
        w_new = np.clip(w + g / alpha, lower, upper)
        s = w_new - w
        step_norm = float(np.max(np.abs(s))) if s.size else 0.0
        if step_norm < tol:
            converged = True
            message = "step below tolerance"
            k -= 1
            break
        f_new = objective(w_new, k)
        g_new = gradient(w_new, k, f_new)
        alpha = bb_step_size(s, g_new - g, alpha)
        trace.append(TraceEntry(k, tuple(w_new), f_new, step_norm, alpha))
        decreases = decreases + 1 if f_new < f else 0
        if f_new > best_f:
            best_w, best_f = w_new.copy(), f_new
        w, f, g = w_new, f_new, g_new
        if decreases >= patience:
            diverged = True
            message = f"likelihood decreased in {patience} consecutive steps"
            break
    return LearningResult(tuple(float(x) for x in best_w), best_f, k, converged,
                          diverged, trace, message)


def bb_learn(task: LearningTask) -> LearningResult:
    cfg = task.config
    n = len(task.hypothesis)
    w0 = cfg.w0 if cfg.w0 is not None else (0.5,) * n
    if len(w0) != n:
        raise ValueError(f"w0 has {len(w0)} entries for {n} hypothesis formulas")
    result = barzilai_borwein(
        lambda w, k: likelihood(w, task, k),
        lambda w, k, f: numeric_gradient(w, task, k, f0=f),
        w0, alpha0=cfg.alpha0, tol=cfg.tol, max_iters=cfg.max_iters, patience=cfg.patience)
    log.info("learning finished after %d iterations: %s; likelihood %r",
             result.iterations, result.message, result.likelihood)
    return result


def format_hypothesis(hypothesis: Sequence[Formula], weights: Sequence[float]) -> str:
    return "".join(f"[{format_weight(w)}] {print_formula(h)}.\n"
                   for h, w in zip(hypothesis, weights))


def with_config(task: LearningTask, **changes) -> LearningTask:
    return LearningTask(task.hypothesis, task.background, task.examples,
                        replace(task.config, **changes))

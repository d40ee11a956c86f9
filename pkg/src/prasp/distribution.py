"""Probability distributions over possible worlds.

A weighted formula ``[w] f`` asks that the worlds satisfying ``f`` carry
total probability ``w``.  Together with normalization and non-negativity
this is a linear feasibility problem ``A x = b, x >= 0``.

* When the feasible set is a single point, that point is returned.
* When it is larger, the maximum-entropy point is returned.  It is computed
  on the minimal face containing the feasible set (found with one LP), where
  it has full support and is the unique minimizer of the smooth convex dual
  ``log sum_j exp(l . a_j) - l . b`` (damped Newton).
* When the system is inconsistent, the simplex point closest to the targets
  in the Euclidean norm is taken, and ties are broken by maximum entropy.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog, nnls

from prasp.solver import holds
from prasp.syntax import WeightedFormula, print_formula

__all__ = [
    "LinearSystem", "WorldDistribution", "SolverOptions",
    "build_constraint_system", "solve_distribution", "entropy",
    "UNIQUE", "MAX_ENTROPY", "LEAST_VIOLATION",
]

log = logging.getLogger(__name__)

UNIQUE = "unique"
MAX_ENTROPY = "max-entropy-selected"
LEAST_VIOLATION = "least-violation"


@dataclass(frozen=True)
class SolverOptions:
    feasibility_tol: float = 1e-9
    support_tol: float = 1e-9
    gradient_tol: float = 1e-13
    max_newton_iters: int = 200
    normalization_weight: float = 1e4


@dataclass
class LinearSystem:
    """Rows are weighted formulas followed by the all-ones normalization row."""
    A: np.ndarray
    b: np.ndarray
    worlds: tuple
    labels: tuple[str, ...] = ()

    @property
    def n_worlds(self) -> int:
        return self.A.shape[1]


@dataclass
class WorldDistribution:
    worlds: tuple
    probabilities: np.ndarray
    residual: float
    entropy: float
    status: str
    details: dict = field(default_factory=dict)

    def probability(self, world) -> float:
        return float(self.probabilities[self.worlds.index(world)])

    def report(self) -> str:
        lines = [f"status: {self.status}", f"residual: {self.residual:.3e}",
                 f"entropy: {self.entropy:.12g}", f"worlds: {len(self.worlds)}"]
        for w, p in zip(self.worlds, self.probabilities):
            text = "{" + ", ".join(sorted(w)) + "}"
            lines.append(f"  {float(p)!r:<24} {text}")
        return "\n".join(lines)


def build_constraint_system(worlds: Sequence, formulas: Iterable[WeightedFormula]) -> LinearSystem:
    """One row per explicitly weighted formula, plus normalization."""
    worlds = tuple(worlds)
    if not worlds:
        raise ValueError("no possible worlds")
    rows, targets, labels = [], [], []
    for st in formulas:
        if st.weight is None:
            continue
        rows.append([1.0 if holds(w, st.formula) else 0.0 for w in worlds])
        targets.append(float(st.weight))
        labels.append(print_formula(st.formula))
    rows.append([1.0] * len(worlds))
    targets.append(1.0)
    A = np.array(rows, dtype=float).reshape(len(rows), len(worlds))
    return LinearSystem(A, np.array(targets, dtype=float), worlds, tuple(labels))


def entropy(d) -> float:
    """Shannon entropy in nats, with ``0 ln 0 = 0``."""
    p = np.asarray(d.probabilities if isinstance(d, WorldDistribution) else d, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


# --------------------------------------------------------------------------

def _max_support(A: np.ndarray, b: np.ndarray, opts: SolverOptions):
    """Maximal support of ``{x >= 0 : A x = b}`` or None when it is empty.

    Solves ``max sum z  s.t.  A y = b t, 0 <= z <= 1, z <= y, t >= 0``.  Any
    optimum saturates every coordinate that can be positive on the feasible
    set, and ``t > 0`` iff the set is non-empty.
    """
    m, n = A.shape
    # variables: y (n), z (n), t (1)
    c = np.concatenate([np.zeros(n), -np.ones(n), [0.0]])
    A_eq = np.hstack([A, np.zeros((m, n)), -b.reshape(-1, 1)])
    A_ub = np.hstack([-np.eye(n), np.eye(n), np.zeros((n, 1))])
    bounds = [(0, None)] * n + [(0, 1)] * n + [(0, None)]
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(n), A_eq=A_eq, b_eq=np.zeros(m),
                  bounds=bounds, method="highs")
    if res.status != 0:
        log.debug("support LP failed: %s", res.message)
        return None
    y, z, t = res.x[:n], res.x[n:2 * n], res.x[-1]
    if t <= opts.support_tol:
        return None
    x = y / t
    if np.max(np.abs(A @ x - b)) > 1e-6:
        return None
    # optimal z is 1 on every coordinate that can be positive
    return z > 0.5, x


def _maxent(A: np.ndarray, b: np.ndarray, opts: SolverOptions) -> tuple[np.ndarray, int, float]:
    """Maximum-entropy point of ``{x >= 0 : A x = b}`` assuming full support.

    ``A``'s last row is the normalization row and is handled by the
    partition function.
    """
    C, d = A[:-1], b[:-1]
    n = A.shape[1]
    if C.shape[0] == 0:
        return np.full(n, 1.0 / n), 0, 0.0
    lam = np.zeros(C.shape[0])

    def evaluate(lam):
        s = lam @ C
        smax = s.max()
        e = np.exp(s - smax)
        z = e.sum()
        return smax + np.log(z) - lam @ d, e / z

    f, p = evaluate(lam)
    it = 0
    gnorm = np.inf
    for it in range(1, opts.max_newton_iters + 1):
        mean = C @ p
        g = mean - d
        gnorm = float(np.max(np.abs(g)))
        if gnorm <= opts.gradient_tol:
            break
        H = (C * p) @ C.T - np.outer(mean, mean)
        step = -np.linalg.lstsq(H, g, rcond=None)[0]
        t = 1.0
        slope = float(g @ step)
        improved = False
        while t > 1e-12:
            f_new, p_new = evaluate(lam + t * step)
            if f_new <= f + 1e-4 * t * slope or (f_new <= f and t < 1e-6):
                improved = True
                break
            t *= 0.5
        if not improved:
            break
        lam = lam + t * step
        f, p = f_new, p_new
    return p, it, gnorm


def _solve_feasible(A, b, support, opts) -> tuple[np.ndarray, str, dict]:
    n = A.shape[1]
    idx = np.flatnonzero(support)
    As = A[:, idx]
    x = np.zeros(n)
    if np.linalg.matrix_rank(As) == len(idx):
        xs = np.linalg.lstsq(As, b, rcond=None)[0]
        x[idx] = np.clip(xs, 0.0, None)
        return x, UNIQUE, {"support": len(idx)}
    xs, iters, gnorm = _maxent(As, b, opts)
    x[idx] = xs
    return x, MAX_ENTROPY, {"support": len(idx), "newton_iterations": iters,
                            "dual_gradient": gnorm}


def _least_violation(A, b, opts) -> np.ndarray:
    """Simplex point minimizing ``||A x - b||_2``."""
    M = opts.normalization_weight
    A_aug = np.vstack([A, M * np.ones((1, A.shape[1]))])
    b_aug = np.concatenate([b, [M]])
    x, _ = nnls(A_aug, b_aug, maxiter=50 * A.shape[1] + 100)
    s = x.sum()
    x = x / s if s > 0 else np.full(A.shape[1], 1.0 / A.shape[1])
    # polish: exact equality-constrained least squares on the support
    idx = np.flatnonzero(x > 0)
    As = A[:, idx]
    k = len(idx)
    kkt = np.block([[2 * As.T @ As, np.ones((k, 1))], [np.ones((1, k)), np.zeros((1, 1))]])
    rhs = np.concatenate([2 * As.T @ b, [1.0]])
    sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0][:k]
    if np.all(sol >= 0) and (np.linalg.norm(As @ sol - b)
                             <= np.linalg.norm(A @ x - b) + 1e-15):
        x = np.zeros_like(x)
        x[idx] = sol
    return x


def solve_distribution(sys: LinearSystem, opts: SolverOptions | None = None) -> WorldDistribution:
    opts = opts or SolverOptions()
    A, b = sys.A, sys.b
    found = _max_support(A, b, opts)
    if found is not None:
        support, _x0 = found
        x, status, details = _solve_feasible(A, b, support, opts)
    else:
        x_lv = _least_violation(A, b, opts)
        achieved = A @ x_lv
        achieved[-1] = 1.0
        found = _max_support(A, achieved, opts)
        if found is None:
            x, details = x_lv, {}
        else:
            x, _status, details = _solve_feasible(A, achieved, found[0], opts)
        status = LEAST_VIOLATION
        log.warning("weights are inconsistent; using least-violation solution "
                    "(residual %.3e)", float(np.linalg.norm(A @ x - b)))
    s = x.sum()
    if s > 0:
        x = x / s
    residual = float(np.linalg.norm(A @ x - b))
    return WorldDistribution(sys.worlds, x, residual, entropy(x), status, details)

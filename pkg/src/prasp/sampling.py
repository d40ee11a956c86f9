"""Near-uniform answer-set sampling with random parity (XOR) constraints."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from prasp.solver import (DEFAULT_MAX_ATOMS, GroundProgram, ParityConstraint,
                          enumerate_answer_sets)

__all__ = [
    "XorConstraint", "SamplingError", "draw_xor", "apply_xor",
    "sample_answer_set", "sample_worlds", "default_xor_count", "call_rng",
]

log = logging.getLogger(__name__)

DEFAULT_RETRIES = 32


class SamplingError(RuntimeError):
    pass


@dataclass(frozen=True)
class XorConstraint:
    """Satisfied when an odd number of ``atoms ∪ ({true} if includes_true)`` hold."""
    atoms: tuple[str, ...]
    includes_true: bool

    def to_parity(self) -> ParityConstraint:
        # counting ``true`` flips the required parity of the atoms
        return ParityConstraint(self.atoms, odd=not self.includes_true)

    def satisfied(self, model) -> bool:
        return self.to_parity().satisfied(model)


def draw_xor(atoms, rng: np.random.Generator) -> XorConstraint:
    atoms = tuple(atoms)
    mask = rng.random(len(atoms)) < 0.5
    bit = bool(rng.random() < 0.5)
    return XorConstraint(tuple(a for a, m in zip(atoms, mask) if m), bit)


def apply_xor(p: GroundProgram, c: XorConstraint) -> GroundProgram:
    return p.with_rules(parity=[c.to_parity()])


def default_xor_count(n_atoms: int) -> int:
    return math.ceil(math.log2(n_atoms)) if n_atoms > 1 else 0


def call_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for sampling call ``index`` under ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def sample_answer_set(p: GroundProgram, rng: np.random.Generator, *,
                      n_xor: int | None = None, retries: int = DEFAULT_RETRIES,
                      max_atoms: int = DEFAULT_MAX_ATOMS) -> frozenset:
    """One answer set of ``p`` drawn near-uniformly.

    ``n_xor`` random parity constraints are added (default ``ceil(log2 |atoms|)``)
    and one of the surviving answer sets is picked uniformly.  When no answer
    set survives the constraints are redrawn, up to ``retries`` times, after
    which ``n_xor`` is halved.
    """
    atoms = p.atoms
    n = default_xor_count(len(atoms)) if n_xor is None else n_xor
    attempts = 0
    while True:
        for _ in range(retries if n > 0 else 1):
            attempts += 1
            xors = [draw_xor(atoms, rng) for _ in range(n)]
            constrained = p.with_rules(parity=[c.to_parity() for c in xors])
            models = enumerate_answer_sets(constrained, max_atoms=max_atoms)
            if models:
                return models[int(rng.integers(len(models)))]
        if n == 0:
            raise SamplingError(
                f"no answer set found after {attempts} attempts; the program is unsatisfiable")
        log.debug("all models eliminated %d times with %d XORs; halving", retries, n)
        n //= 2


def sample_worlds(p: GroundProgram, k: int, seed: int = 0, *,
                  n_xor: int | None = None, retries: int = DEFAULT_RETRIES,
                  max_atoms: int = DEFAULT_MAX_ATOMS) -> list[frozenset]:
    """Distinct answer sets from ``k`` independent sampling calls.

    Call ``i`` uses the stream ``call_rng(seed, i)``, so calls are
    independent of each other and may run in any order; the result keeps
    the order of first occurrence by call index.
    """
    if k < 1:
        raise ValueError("sample count must be at least 1")
    out: dict[frozenset, None] = {}
    for i in range(k):
        m = sample_answer_set(p, call_rng(seed, i), n_xor=n_xor, retries=retries,
                              max_atoms=max_atoms)
        out.setdefault(m)
    return list(out)

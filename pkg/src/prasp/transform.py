"""From weighted ground formulas to plain answer-set programs.

``spanning_program`` gives each soft formula ``[w] f`` (0 < w < 1) a fresh
activation atom ``h`` with a free choice ``{h}``.  When ``h`` is chosen the
formula is made true; two constraints then tie ``h`` to the classical truth
of ``f``, so every answer set satisfies ``h <-> f``.  Projected to source
atoms, the answer sets are the candidate possible worlds.

``helper_atom_transform`` replaces each ``[m/n] f`` by an exclusive choice
among ``n`` helper atoms, ``m`` of which activate ``f``.  For mutually
independent formulas the answer-set frequencies then realize the weights.

Auxiliary atoms start with an underscore.  The parser reads such names as
variables, so they never clash with source atoms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from prasp.grounding import GroundWeightedProgram, eval_compare
from prasp.solver import GroundProgram, GroundRule, ParityConstraint
from prasp.syntax import (And, Atom, Cardinality, Compare, Implies, Not, Or, Parity,
                          Rule, print_formula)

__all__ = [
    "UnsupportedFormulaError", "SpanningProgram", "spanning_program",
    "activation_encoding", "helper_atom_transform", "rational_weight",
    "DEFAULT_MAX_DENOMINATOR",
]

DEFAULT_MAX_DENOMINATOR = 64


class UnsupportedFormulaError(ValueError):
    pass


@dataclass(frozen=True)
class SpanningProgram:
    program: GroundProgram
    activation: tuple[tuple[int, str], ...]  # (formula index, activation atom)
    weights: tuple[float | None, ...]        # one per ground formula, as given
    soft: tuple[int, ...]                    # indices with 0 < w < 1


class _Encoder:
    def __init__(self, prefix: str = "_t"):
        self.prefix = prefix
        self.counter = 0
        self.rules: list[GroundRule] = []
        self.parity: list[ParityConstraint] = []
        self.hidden: set[str] = set()
        self.cache: dict = {}

    def fresh(self) -> str:
        self.counter += 1
        name = f"{self.prefix}{self.counter}"
        self.hidden.add(name)
        return name

    # ---- classical truth as an auxiliary atom (stratified definitions) ----

    def truth(self, f) -> str | bool:
        """An atom equivalent to ``f`` in every answer set, or a constant."""
        if isinstance(f, Atom):
            return str(f)
        if isinstance(f, Compare):
            return eval_compare(f)
        key = f
        if key in self.cache:
            return self.cache[key]
        out = self._truth(f)
        self.cache[key] = out
        return out

    def _truth(self, f) -> str | bool:
        if isinstance(f, Not):
            t = self.truth(f.arg)
            if isinstance(t, bool):
                return not t
            a = self.fresh()
            self.rules.append(GroundRule((a,), (), (t,)))
            return a
        if isinstance(f, And):
            parts = [self.truth(g) for g in f.args]
            if any(p is False for p in parts):
                return False
            atoms = tuple(dict.fromkeys(p for p in parts if p is not True))
            if not atoms:
                return True
            if len(atoms) == 1:
                return atoms[0]
            a = self.fresh()
            self.rules.append(GroundRule((a,), atoms))
            return a
        if isinstance(f, Or):
            parts = [self.truth(g) for g in f.args]
            if any(p is True for p in parts):
                return True
            atoms = tuple(dict.fromkeys(p for p in parts if p is not False))
            if not atoms:
                return False
            if len(atoms) == 1:
                return atoms[0]
            a = self.fresh()
            self.rules.extend(GroundRule((a,), (b,)) for b in atoms)
            return a
        if isinstance(f, Implies):
            return self.truth(Or((Not(f.antecedent), f.consequent)))
        if isinstance(f, Rule):
            body = f.body if f.body is not None else And(())
            if f.head is None:
                return self.truth(Not(body))
            return self.truth(Or((Not(body), f.head)))
        raise UnsupportedFormulaError(
            f"cannot express the truth of {print_formula(f)} inside a weighted formula")

    # ---- make a formula true when the guard holds ----

    def make_true(self, f, guard: tuple[str, ...]) -> None:
        if isinstance(f, Atom):
            self.rules.append(GroundRule((str(f),), guard))
        elif isinstance(f, Compare):
            if not eval_compare(f):
                self.rules.append(GroundRule((), guard))
        elif isinstance(f, Not):
            t = self.truth(f.arg)
            if t is True:
                self.rules.append(GroundRule((), guard))
            elif t is not False:
                self.rules.append(GroundRule((), guard + (t,)))
        elif isinstance(f, And):
            for g in f.args:
                self.make_true(g, guard)
        elif isinstance(f, Or):
            if not all(isinstance(g, Atom) for g in f.args):
                raise UnsupportedFormulaError(
                    f"disjunction {print_formula(f)} must consist of atoms")
            self.rules.append(GroundRule(tuple(dict.fromkeys(str(g) for g in f.args)), guard))
        elif isinstance(f, Implies):
            ante = f.antecedent
            disjuncts = ante.args if isinstance(ante, Or) else (ante,)
            for d in disjuncts:
                self.make_true(Rule(f.consequent, d), guard)
        elif isinstance(f, Rule):
            self._rule(f, guard)
        elif isinstance(f, Cardinality):
            self._cardinality(f, guard, ())
        else:
            raise UnsupportedFormulaError(f"unsupported formula {print_formula(f)}")

    def _body(self, body) -> tuple[tuple[str, ...], tuple[str, ...]] | None:
        """Split a conjunctive body into (pos, neg); None if it can never hold."""
        parts = body.args if isinstance(body, And) else (body,)
        pos: list[str] = []
        neg: list[str] = []
        for p in parts:
            if isinstance(p, Atom):
                pos.append(str(p))
            elif isinstance(p, Not) and isinstance(p.arg, Atom):
                neg.append(str(p.arg))
            elif isinstance(p, Compare):
                if not eval_compare(p):
                    return None
            elif isinstance(p, And):
                sub = self._body(p)
                if sub is None:
                    return None
                pos.extend(sub[0])
                neg.extend(sub[1])
            else:
                t = self.truth(p)
                if t is False:
                    return None
                if t is not True:
                    pos.append(t)
        return tuple(dict.fromkeys(pos)), tuple(dict.fromkeys(neg))

    def _rule(self, f: Rule, guard: tuple[str, ...]) -> None:
        if f.head is None and isinstance(f.body, Parity):
            if guard:
                raise UnsupportedFormulaError("parity constraints cannot carry a weight")
            # ":- #even{...}" keeps models with an odd count
            self.parity.append(ParityConstraint(tuple(str(a) for a in f.body.atoms), True))
            return
        split = ((), ()) if f.body is None else self._body(f.body)
        if split is None:
            return
        pos, neg = split
        pos = guard + pos
        head = f.head
        if head is None:
            self.rules.append(GroundRule((), pos, neg))
        elif isinstance(head, Atom):
            self.rules.append(GroundRule((str(head),), pos, neg))
        elif isinstance(head, Or) and all(isinstance(g, Atom) for g in head.args):
            self.rules.append(GroundRule(tuple(dict.fromkeys(str(g) for g in head.args)),
                                         pos, neg))
        elif isinstance(head, And) and all(isinstance(g, Atom) for g in head.args):
            for g in head.args:
                self.rules.append(GroundRule((str(g),), pos, neg))
        elif isinstance(head, Cardinality):
            self._cardinality(head, pos, neg)
        elif isinstance(head, Compare):
            if not eval_compare(head):
                self.rules.append(GroundRule((), pos, neg))
        elif isinstance(head, Not) and isinstance(head.arg, Atom):
            self.rules.append(GroundRule((), pos + (str(head.arg),), neg))
        else:
            raise UnsupportedFormulaError(f"unsupported rule head {print_formula(head)}")

    def _cardinality(self, c: Cardinality, pos: tuple[str, ...], neg: tuple[str, ...]) -> None:
        atoms = []
        for e in c.elements:
            if e.conditions or not isinstance(e.literal, Atom):
                raise UnsupportedFormulaError(
                    f"cardinality element {print_formula(e.literal)} must be a ground atom")
            atoms.append(str(e.literal))
        atoms = tuple(dict.fromkeys(atoms))
        lo, hi = c.lower, c.upper
        if hi is not None and hi > len(atoms):
            hi = len(atoms)
        if lo is not None and lo > len(atoms):
            # bounds can never be met: the body must fail
            self.rules.append(GroundRule((), pos, neg))
            return
        if hi is not None and lo is not None and lo > hi:
            self.rules.append(GroundRule((), pos, neg))
            return
        self.rules.append(GroundRule(atoms, pos, neg, True, lo, hi))

    def tie(self, f, h: str) -> None:
        """Constraints making ``h`` equivalent to the truth of ``f``."""
        t = self.truth(f)
        if t is True:
            self.rules.append(GroundRule((), (), (h,)))
        elif t is False:
            self.rules.append(GroundRule((), (h,)))
        else:
            self.rules.append(GroundRule((), (h,), (t,)))
            self.rules.append(GroundRule((), (t,), (h,)))

    def forbid(self, f) -> None:
        t = self.truth(f)
        if t is True:
            self.rules.append(GroundRule((), ()))
        elif t is not False:
            self.rules.append(GroundRule((), (t,)))


def activation_encoding(f, h: str, encoder: _Encoder | None = None) -> list[GroundRule]:
    """Rules under which ``h`` holds iff ``f`` holds, in every answer set.

    ``h`` itself is left open; callers add the choice that generates it.
    """
    enc = encoder if encoder is not None else _Encoder()
    start = len(enc.rules)
    enc.make_true(f, (h,))
    enc.tie(f, h)
    return enc.rules[start:]


def _is_soft(w: float | None) -> bool:
    return w is not None and 0.0 < w < 1.0


def spanning_program(gwp: GroundWeightedProgram) -> SpanningProgram:
    enc = _Encoder()
    activation = []
    weights = []
    soft = []
    for i, st in enumerate(gwp.formulas):
        w = st.weight
        weights.append(w)
        if _is_soft(w):
            h = f"_w{i}"
            enc.hidden.add(h)
            enc.rules.append(GroundRule((h,), choice=True))
            activation_encoding(st.formula, h, enc)
            activation.append((i, h))
            soft.append(i)
        elif w == 0.0:
            enc.forbid(st.formula)
        else:
            enc.make_true(st.formula, ())
    program = GroundProgram(tuple(enc.rules), tuple(enc.parity), frozenset(enc.hidden))
    return SpanningProgram(program, tuple(activation), tuple(weights), tuple(soft))


def rational_weight(w: float, max_denominator: int = DEFAULT_MAX_DENOMINATOR) -> Fraction:
    """Best rational approximation ``m/n`` with ``n <= max_denominator``."""
    fr = Fraction(w).limit_denominator(max_denominator)
    if abs(float(fr) - w) > 1e-9:
        raise ValueError(f"weight {w!r} is not a fraction with denominator <= {max_denominator}")
    return fr


def helper_atom_transform(gwp: GroundWeightedProgram,
                          max_denominator: int = DEFAULT_MAX_DENOMINATOR) -> GroundProgram:
    """Unweighted program whose answer-set frequencies realize the weights.

    Only sound when the weighted formulas are mutually independent; that is
    the caller's responsibility.
    """
    enc = _Encoder()
    k = 0
    for i, st in enumerate(gwp.formulas):
        w = st.weight
        if not _is_soft(w):
            if w == 0.0:
                enc.forbid(st.formula)
            else:
                enc.make_true(st.formula, ())
            continue
        fr = rational_weight(w, max_denominator)
        m, n = fr.numerator, fr.denominator
        helpers = []
        for _ in range(n):
            k += 1
            helpers.append(f"_hpatom{k}")
        enc.hidden.update(helpers)
        enc.rules.append(GroundRule(tuple(helpers), choice=True, lower=1, upper=1))
        act = f"_hpact{i}"
        enc.hidden.add(act)
        enc.rules.extend(GroundRule((act,), (hp,)) for hp in helpers[:m])
        activation_encoding(st.formula, act, enc)
    return GroundProgram(tuple(enc.rules), tuple(enc.parity), frozenset(enc.hidden))

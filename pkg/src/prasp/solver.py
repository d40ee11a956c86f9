"""Answer-set enumeration for ground programs.

Supported constructs: disjunctive heads, default negation in bodies, strong
negation (``-a`` is an ordinary atom plus the implicit constraint
``:- a, -a``), choice rules with optional cardinality bounds, integrity
constraints and parity constraints.

The search is a branch-and-propagate procedure over the atoms.  Propagation
covers rule satisfaction, support (an atom needs a rule whose body may hold
and which is not already satisfied by another head atom), cardinality bounds
and parity.  Every complete assignment is then verified: it must be a model
of the program and a minimal model of its reduct.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

__all__ = [
    "GroundRule", "ParityConstraint", "GroundProgram", "ResourceLimitError",
    "enumerate_answer_sets", "iter_answer_sets", "check_answer_set",
    "is_model", "holds", "write_ground_program", "read_models",
    "DEFAULT_MAX_ATOMS", "DEFAULT_MAX_MODELS",
]

DEFAULT_MAX_ATOMS = 4096
DEFAULT_MAX_MODELS = 10**6

PossibleWorld = frozenset


@dataclass(frozen=True)
class GroundRule:
    """``head :- pos, not neg.``

    With ``choice`` set the head atoms may be chosen freely when the body
    holds, subject to ``lower <= #true(head) <= upper``.  Otherwise the head
    is a disjunction; an empty head makes the rule an integrity constraint.
    """
    head: tuple[str, ...] = ()
    pos: tuple[str, ...] = ()
    neg: tuple[str, ...] = ()
    choice: bool = False
    lower: int | None = None
    upper: int | None = None

    def __post_init__(self):
        if not self.choice and (self.lower is not None or self.upper is not None):
            raise ValueError("bounds are only allowed on choice rules")
        lo = 0 if self.lower is None else self.lower
        hi = len(self.head) if self.upper is None else self.upper
        if self.choice and not 0 <= lo <= hi:
            raise ValueError(f"invalid cardinality bounds {self.lower}..{self.upper}")

    def __str__(self) -> str:
        body = list(self.pos) + [f"not {a}" for a in self.neg]
        if self.choice:
            lo = "" if self.lower is None else str(self.lower)
            hi = "" if self.upper is None else str(self.upper)
            head = f"{lo}{{{'; '.join(self.head)}}}{hi}"
        else:
            head = " | ".join(self.head)
        if not body:
            return f"{head}." if head else ":- ."
        return f"{head} :- {', '.join(body)}." if head else f":- {', '.join(body)}."


@dataclass(frozen=True)
class ParityConstraint:
    """Keeps models with an odd (``odd=True``) or even number of ``atoms`` true."""
    atoms: tuple[str, ...]
    odd: bool = True

    def satisfied(self, model) -> bool:
        return (sum(a in model for a in self.atoms) % 2 == 1) == self.odd

    def __str__(self) -> str:
        kind = "#odd" if self.odd else "#even"
        return f"{kind}{{{'; '.join(self.atoms)}}}."


@dataclass(frozen=True)
class GroundProgram:
    rules: tuple[GroundRule, ...] = ()
    parity: tuple[ParityConstraint, ...] = ()
    hidden: frozenset = field(default_factory=frozenset)  # auxiliary atoms

    @property
    def atoms(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for r in self.rules:
            for a in (*r.head, *r.pos, *r.neg):
                seen.setdefault(a)
        for c in self.parity:
            for a in c.atoms:
                seen.setdefault(a)
        return tuple(sorted(seen))

    def with_rules(self, rules: Iterable[GroundRule] = (),
                   parity: Iterable[ParityConstraint] = ()) -> "GroundProgram":
        return GroundProgram(self.rules + tuple(rules),
                             self.parity + tuple(parity), self.hidden)

    def project(self, model: Iterable[str]) -> frozenset:
        return frozenset(a for a in model if a not in self.hidden)

    def __str__(self) -> str:
        return write_ground_program(self)


class ResourceLimitError(RuntimeError):
    pass


# --------------------------------------------------------------------------
# Search
# --------------------------------------------------------------------------

_UNK, _F, _T = -1, 0, 1


class _Conflict(Exception):
    pass


class _Solver:
    def __init__(self, program: GroundProgram, max_atoms: int):
        atoms = list(program.atoms)
        if len(atoms) > max_atoms:
            raise ResourceLimitError(
                f"program has {len(atoms)} atoms, limit is {max_atoms}")
        self.names = atoms
        idx = {a: i for i, a in enumerate(atoms)}
        self.idx = idx
        rules = [(tuple(idx[a] for a in r.head), tuple(idx[a] for a in r.pos),
                  tuple(idx[a] for a in r.neg), r.choice, r.lower, r.upper)
                 for r in program.rules]
        # strong negation: a and -a never hold together
        for a in atoms:
            if a.startswith("-") and a[1:] in idx:
                rules.append(((), (idx[a[1:]], idx[a]), (), False, None, None))
        self.rules = rules
        self.parity = [(tuple(idx[a] for a in c.atoms), c.odd) for c in program.parity]
        n = len(atoms)
        self.in_body = [[] for _ in range(n)]
        self.in_head = [[] for _ in range(n)]
        self.in_parity = [[] for _ in range(n)]
        for ri, (head, pos, neg, *_rest) in enumerate(rules):
            for a in set(pos) | set(neg):
                self.in_body[a].append(ri)
            for a in set(head):
                self.in_head[a].append(ri)
        for ci, (pa, _odd) in enumerate(self.parity):
            for a in set(pa):
                self.in_parity[a].append(ci)
        self.disjunctive = any(len(r[0]) > 1 and not r[3] for r in rules)
        self.val = [_UNK] * n
        self.trail: list[int] = []
        chosen = {a for r in rules if r[3] for a in r[0]}
        # branch on freely chosen atoms first; derived atoms mostly propagate
        self.order = sorted(range(n), key=lambda a: (a not in chosen, a))

    # assignment ---------------------------------------------------------
    def assign(self, a: int, v: int, queue: list[int]) -> None:
        cur = self.val[a]
        if cur == v:
            return
        if cur != _UNK:
            raise _Conflict
        self.val[a] = v
        self.trail.append(a)
        queue.append(a)

    def undo(self, mark: int) -> None:
        val, trail = self.val, self.trail
        while len(trail) > mark:
            val[trail.pop()] = _UNK

    # propagation ----------------------------------------------------------
    def body_state(self, pos, neg):
        """Return (has_false, unassigned literals as (atom, needed_value))."""
        val = self.val
        unk = []
        for a in pos:
            v = val[a]
            if v == _F:
                return True, unk
            if v == _UNK:
                unk.append((a, _T))
        for a in neg:
            v = val[a]
            if v == _T:
                return True, unk
            if v == _UNK:
                unk.append((a, _F))
        return False, unk

    def check_rule(self, ri: int, queue: list[int]) -> None:
        head, pos, neg, choice, lower, upper = self.rules[ri]
        has_false, unk = self.body_state(pos, neg)
        if has_false:
            return
        val = self.val
        if choice:
            if lower is None and upper is None:
                return
            t = sum(1 for a in head if val[a] == _T)
            free = [a for a in head if val[a] == _UNK]
            violated = ((upper is not None and t > upper)
                        or (lower is not None and t + len(free) < lower))
            if violated:
                if not unk:
                    raise _Conflict
                if len(unk) == 1:
                    a, need = unk[0]
                    self.assign(a, 1 - need, queue)
                return
            if not unk:
                if upper is not None and t == upper:
                    for a in free:
                        self.assign(a, _F, queue)
                elif lower is not None and t + len(free) == lower:
                    for a in free:
                        self.assign(a, _T, queue)
            return
        free = []
        for a in head:
            v = val[a]
            if v == _T:
                return
            if v == _UNK:
                free.append(a)
        if not unk:
            if not free:
                raise _Conflict
            if len(free) == 1:
                self.assign(free[0], _T, queue)
        elif len(unk) == 1 and not free:
            a, need = unk[0]
            self.assign(a, 1 - need, queue)

    def check_support(self, a: int, queue: list[int]) -> None:
        val = self.val
        if val[a] == _F:
            return
        supporter = None
        count = 0
        for ri in self.in_head[a]:
            head, pos, neg, choice, _lo, _hi = self.rules[ri]
            has_false, _ = self.body_state(pos, neg)
            if has_false:
                continue
            if not choice and any(val[b] == _T for b in head if b != a):
                continue
            count += 1
            supporter = ri
            if count > 1:
                return
        if count == 0:
            self.assign(a, _F, queue)
        elif val[a] == _T:
            head, pos, neg, choice, _lo, _hi = self.rules[supporter]
            for b in pos:
                self.assign(b, _T, queue)
            for b in neg:
                self.assign(b, _F, queue)
            if not choice:
                for b in head:
                    if b != a:
                        self.assign(b, _F, queue)

    def check_parity(self, ci: int, queue: list[int]) -> None:
        atoms, odd = self.parity[ci]
        val = self.val
        t = 0
        free = []
        for a in atoms:
            v = val[a]
            if v == _T:
                t += 1
            elif v == _UNK:
                free.append(a)
        if not free:
            if (t % 2 == 1) != odd:
                raise _Conflict
        elif len(free) == 1:
            need_odd_rest = (t % 2 == 0) == odd
            self.assign(free[0], _T if need_odd_rest else _F, queue)

    def propagate(self, queue: list[int]) -> None:
        rules = self.rules
        while queue:
            a = queue.pop()
            for ri in self.in_body[a]:
                self.check_rule(ri, queue)
                for h in rules[ri][0]:
                    self.check_support(h, queue)
            for ri in self.in_head[a]:
                self.check_rule(ri, queue)
                r = rules[ri]
                if not r[3] and len(r[0]) > 1:
                    for h in r[0]:
                        if h != a:
                            self.check_support(h, queue)
            for ci in self.in_parity[a]:
                self.check_parity(ci, queue)
            self.check_support(a, queue)

    def initial(self) -> None:
        queue: list[int] = []
        for ri in range(len(self.rules)):
            self.check_rule(ri, queue)
        for a in range(len(self.names)):
            self.check_support(a, queue)
        for ci in range(len(self.parity)):
            self.check_parity(ci, queue)
        self.propagate(queue)

    # verification ---------------------------------------------------------
    def is_stable(self, model: set[int]) -> bool:
        if not _is_model_idx(self.rules, self.parity, model):
            return False
        if not self.disjunctive:
            return _least_model(self.rules, model) == model
        return _is_minimal(self.rules, model)

    # enumeration ----------------------------------------------------------
    def models(self) -> Iterator[frozenset]:
        try:
            self.initial()
        except _Conflict:
            return
        order, val = self.order, self.val
        # (trail mark, decision atom, false branch already taken)
        stack: list[tuple[int, int, bool]] = []
        while True:
            a = next((b for b in order if val[b] == _UNK), None)
            if a is None:
                model = {b for b in range(len(val)) if val[b] == _T}
                if self.is_stable(model):
                    yield frozenset(self.names[b] for b in model)
                descend = False
            else:
                stack.append((len(self.trail), a, False))
                descend = self._try(a, _T)
            while not descend:
                if not stack:
                    return
                mark, a, tried_false = stack.pop()
                self.undo(mark)
                if not tried_false:
                    stack.append((mark, a, True))
                    descend = self._try(a, _F)

    def _try(self, a: int, v: int) -> bool:
        queue: list[int] = []
        try:
            self.assign(a, v, queue)
            self.propagate(queue)
            return True
        except _Conflict:
            return False


def _is_model_idx(rules, parity, model: set[int]) -> bool:
    for head, pos, neg, choice, lower, upper in rules:
        if not all(a in model for a in pos) or any(a in model for a in neg):
            continue
        if choice:
            t = sum(1 for a in head if a in model)
            if (lower is not None and t < lower) or (upper is not None and t > upper):
                return False
        elif not any(a in model for a in head):
            return False
    for atoms, odd in parity:
        if (sum(1 for a in atoms if a in model) % 2 == 1) != odd:
            return False
    return True


def _reduct(rules, model: set[int]) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Positive reduct as (head atoms within model, positive body)."""
    out = []
    for head, pos, neg, choice, _lo, _hi in rules:
        if any(a in model for a in neg) or not head:
            continue
        if choice:
            out.extend(((a,), pos) for a in head if a in model)
        else:
            out.append((tuple(a for a in head if a in model), pos))
    return out


def _least_model(rules, model: set[int]) -> set[int]:
    reduct = _reduct(rules, model)
    waiting: dict[int, list[int]] = {}
    missing = []
    derived: set[int] = set()
    queue = []
    for ri, (head, pos) in enumerate(reduct):
        need = set(pos)
        missing.append(len(need))
        for a in need:
            waiting.setdefault(a, []).append(ri)
        if not need and head:
            queue.append(head[0])
    while queue:
        a = queue.pop()
        if a in derived:
            continue
        derived.add(a)
        for ri in waiting.get(a, ()):
            missing[ri] -= 1
            if missing[ri] == 0 and reduct[ri][0]:
                queue.append(reduct[ri][0][0])
    return derived


def _is_minimal(rules, model: set[int]) -> bool:
    """True iff no proper subset of ``model`` satisfies the reduct."""
    clauses = []
    for head, pos in _reduct(rules, model):
        if all(a in model for a in pos):
            clauses.append(([a for a in pos], list(head)))  # pos -> head
    atoms = sorted(model)
    if not atoms:
        return True
    # SAT over atoms of the model: satisfy all clauses with some atom false
    return not _sat_smaller(clauses, atoms)


def _sat_smaller(clauses, atoms) -> bool:
    num = {a: i + 1 for i, a in enumerate(atoms)}
    lits = [[-num[a] for a in pos] + [num[a] for a in head] for pos, head in clauses]
    lits.append([-num[a] for a in atoms])
    return _dpll(lits, {})


def _dpll(clauses, assign: dict[int, bool]) -> bool:
    assign = dict(assign)
    while True:
        unit = None
        remaining = []
        for cl in clauses:
            sat = False
            free = []
            for lit in cl:
                v = assign.get(abs(lit))
                if v is None:
                    free.append(lit)
                elif v == (lit > 0):
                    sat = True
                    break
            if sat:
                continue
            if not free:
                return False
            if len(free) == 1 and unit is None:
                unit = free[0]
            remaining.append(free)
        if not remaining:
            return True
        if unit is None:
            break
        assign[abs(unit)] = unit > 0
    var = abs(remaining[0][0])
    for v in (False, True):
        assign[var] = v
        if _dpll(remaining, assign):
            return True
    return False


# --------------------------------------------------------------------------
# Public API
# --------------------------------------------------------------------------

def _sort_key(model: frozenset) -> tuple:
    return tuple(sorted(model))


def iter_answer_sets(program: GroundProgram, *,
                     max_atoms: int = DEFAULT_MAX_ATOMS) -> Iterator[frozenset]:
    """Yield answer sets in search order (not sorted)."""
    yield from _Solver(program, max_atoms).models()


def enumerate_answer_sets(program: GroundProgram, *,
                          max_atoms: int = DEFAULT_MAX_ATOMS,
                          max_models: int = DEFAULT_MAX_MODELS) -> list[frozenset]:
    """All answer sets of ``program`` in lexicographic order.

    Raises:
        ResourceLimitError: more than ``max_atoms`` atoms or more than
            ``max_models`` answer sets.
    """
    models = []
    for m in iter_answer_sets(program, max_atoms=max_atoms):
        models.append(m)
        if len(models) > max_models:
            raise ResourceLimitError(f"more than {max_models} answer sets")
    models.sort(key=_sort_key)
    return models


def _internal_rules(program: GroundProgram):
    atoms = set(program.atoms)
    rules = [(r.head, r.pos, r.neg, r.choice, r.lower, r.upper) for r in program.rules]
    for a in atoms:
        if a.startswith("-") and a[1:] in atoms:
            rules.append(((), (a[1:], a), (), False, None, None))
    parity = [(c.atoms, c.odd) for c in program.parity]
    return rules, parity


def is_model(program: GroundProgram, model: Iterable[str]) -> bool:
    rules, parity = _internal_rules(program)
    return _is_model_idx(rules, parity, set(model))


def check_answer_set(program: GroundProgram, model: Iterable[str]) -> bool:
    """Gelfond-Lifschitz check: ``model`` is a minimal model of the reduct."""
    m = set(model)
    rules, parity = _internal_rules(program)
    if not m <= set(program.atoms):
        return False
    if not _is_model_idx(rules, parity, m):
        return False
    if any(len(r[0]) > 1 and not r[3] for r in rules):
        return _is_minimal(rules, m)
    return _least_model(rules, m) == m


def holds(model, formula) -> bool:
    """Classical truth of a ground, quantifier-free formula in a world."""
    from prasp.syntax import (And, Atom, Cardinality, Compare, Exists, Forall,
                              Implies, Not, Or, Parity, Rule)
    from prasp.grounding import eval_compare

    f = formula
    if isinstance(f, Atom):
        return str(f) in model
    if isinstance(f, Not):
        return not holds(model, f.arg)
    if isinstance(f, And):
        return all(holds(model, a) for a in f.args)
    if isinstance(f, Or):
        return any(holds(model, a) for a in f.args)
    if isinstance(f, Implies):
        return not holds(model, f.antecedent) or holds(model, f.consequent)
    if isinstance(f, Compare):
        return eval_compare(f)
    if isinstance(f, Rule):
        body = True if f.body is None else holds(model, f.body)
        if not body:
            return True
        return False if f.head is None else holds(model, f.head)
    if isinstance(f, Cardinality):
        n = sum(1 for e in f.elements
                if all(holds(model, c) for c in e.conditions)
                and holds(model, e.literal))
        lo = 0 if f.lower is None else f.lower
        hi = n if f.upper is None else f.upper
        return lo <= n <= hi
    if isinstance(f, Parity):
        return sum(holds(model, a) for a in f.atoms) % 2 == 0
    if isinstance(f, (Forall, Exists)):
        raise ValueError("expand quantifiers before evaluating a formula")
    raise TypeError(f"not a formula: {f!r}")


# --------------------------------------------------------------------------
# External solver adapter
# --------------------------------------------------------------------------

def write_ground_program(program: GroundProgram) -> str:
    """Line-oriented text form: one rule or parity constraint per line."""
    lines = [str(r) for r in program.rules]
    lines += [str(c) for c in program.parity]
    if program.hidden:
        lines.append("% hidden: " + " ".join(sorted(program.hidden)))
    return "\n".join(lines) + "\n"


def read_models(text: str) -> list[frozenset]:
    """Parse one model per line, literals separated by whitespace."""
    models = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("%"):
            continue
        if line == "{}":
            models.append(frozenset())
            continue
        models.append(frozenset(line.split()))
    return models

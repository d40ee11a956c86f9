"""Variable elimination over finite domains.

Three kinds of variables are removed here:

* ``#domain p(X)`` variables range over the extension of ``p`` (collected
  from unweighted ground facts and range facts such as ``p(1..3)``);
* rule-local variables are bound by matching positive body atoms against
  the atoms that may possibly become true (a standard fixpoint grounder);
* quantified variables (``![X]:`` / ``?[X]:``) expand into finite
  conjunctions / disjunctions over their declared domain.

A non-ground ``[w] f`` is one weighted formula, the conjunction of all
instances of ``f``; ``[[w]] f`` stands for one ``[w]`` formula per instance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from prasp.syntax import (And, Atom, CardElement, Cardinality, Compare, DomainDecl,
                          Exists, Forall, Formula, Implies, Not, Or, Parity, Program,
                          Range, Rule, Var, WeightedFormula, print_formula, term_key)

__all__ = [
    "GroundingError", "DomainMap", "GroundWeightedProgram",
    "build_domains", "expand_sugar", "expand_quantifiers", "ground",
    "ground_query_formula", "free_vars", "substitute", "eval_compare",
    "atoms_of", "is_ground",
]


class GroundingError(ValueError):
    pass


@dataclass(frozen=True)
class DomainMap:
    variables: tuple = ()   # ((var, (term, ...)), ...)
    extensions: tuple = ()  # ((pred, ((term, ...), ...)), ...)

    def var_domain(self, var: str) -> tuple | None:
        for v, terms in self.variables:
            if v == var:
                return terms
        return None

    def extension(self, pred: str) -> tuple:
        for p, tuples in self.extensions:
            if p == pred:
                return tuples
        return ()

    def with_decls(self, decls: Iterable[DomainDecl]) -> "DomainMap":
        variables = dict(self.variables)
        for d in decls:
            variables[d.var] = _unary_extension(self, d.pred, d.var)
        return DomainMap(tuple(sorted(variables.items())), self.extensions)


def _unary_extension(dm: DomainMap, pred: str, var: str) -> tuple:
    ext = [t[0] for t in dm.extension(pred) if len(t) == 1]
    if not ext:
        raise GroundingError(f"empty domain for variable {var}: no facts {pred}/1")
    return tuple(sorted(set(ext), key=term_key))


@dataclass(frozen=True)
class GroundWeightedProgram:
    formulas: tuple[WeightedFormula, ...]
    atoms: tuple[str, ...]
    domains: DomainMap = field(default=DomainMap(), compare=False)
    # index of the source statement each ground formula came from
    sources: tuple[int, ...] = field(default=(), compare=False)

    def __str__(self) -> str:
        return "\n".join(str(f) for f in self.formulas)


# --------------------------------------------------------------------------
# AST utilities
# --------------------------------------------------------------------------

def substitute(f, binding: dict):
    """Replace variables bound in ``binding``; quantifiers shadow."""
    if not binding:
        return f
    if isinstance(f, Atom):
        if not any(isinstance(a, Var) for a in f.args):
            return f
        return Atom(f.pred, tuple(binding.get(a.name, a) if isinstance(a, Var) else a
                                  for a in f.args), f.strong)
    if isinstance(f, Compare):
        sub = lambda t: binding.get(t.name, t) if isinstance(t, Var) else t
        return Compare(f.op, sub(f.left), sub(f.right))
    if isinstance(f, Not):
        return Not(substitute(f.arg, binding))
    if isinstance(f, And):
        return And(tuple(substitute(a, binding) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(substitute(a, binding) for a in f.args))
    if isinstance(f, Implies):
        return Implies(substitute(f.antecedent, binding), substitute(f.consequent, binding))
    if isinstance(f, (Forall, Exists)):
        inner = {k: v for k, v in binding.items() if k != f.var}
        return type(f)(f.var, substitute(f.body, inner))
    if isinstance(f, Cardinality):
        return Cardinality(f.lower, f.upper, tuple(
            CardElement(substitute(e.literal, binding),
                        tuple(substitute(c, binding) for c in e.conditions))
            for e in f.elements))
    if isinstance(f, Parity):
        return Parity(tuple(substitute(a, binding) for a in f.atoms))
    if isinstance(f, Rule):
        return Rule(None if f.head is None else substitute(f.head, binding),
                    None if f.body is None else substitute(f.body, binding))
    raise TypeError(f"not a formula: {f!r}")


def _term_vars(terms) -> list[str]:
    return [t.name for t in terms if isinstance(t, Var)]


def free_vars(f) -> list[str]:
    """Free variables in first-occurrence order."""
    out: dict[str, None] = {}

    def visit(g, bound: frozenset):
        if isinstance(g, Atom):
            for v in _term_vars(g.args):
                if v not in bound:
                    out.setdefault(v)
        elif isinstance(g, Compare):
            for v in _term_vars((g.left, g.right)):
                if v not in bound:
                    out.setdefault(v)
        elif isinstance(g, (Forall, Exists)):
            visit(g.body, bound | {g.var})
        else:
            for sub in _subformulas(g):
                visit(sub, bound)

    visit(f, frozenset())
    return list(out)


def _subformulas(f) -> tuple:
    if isinstance(f, Not):
        return (f.arg,)
    if isinstance(f, (And, Or)):
        return f.args
    if isinstance(f, Implies):
        return (f.antecedent, f.consequent)
    if isinstance(f, (Forall, Exists)):
        return (f.body,)
    if isinstance(f, Rule):
        return tuple(x for x in (f.head, f.body) if x is not None)
    if isinstance(f, Parity):
        return f.atoms
    if isinstance(f, Cardinality):
        out = []
        for e in f.elements:
            out.append(e.literal)
            out.extend(e.conditions)
        return tuple(out)
    return ()


def atoms_of(f) -> Iterator[Atom]:
    if isinstance(f, Atom):
        yield f
        return
    for sub in _subformulas(f):
        yield from atoms_of(sub)


def is_ground(f) -> bool:
    return not free_vars(f) and not _has_quantifier(f)


def _has_quantifier(f) -> bool:
    if isinstance(f, (Forall, Exists)):
        return True
    return any(_has_quantifier(s) for s in _subformulas(f))


def eval_compare(c: Compare) -> bool:
    left, right = c.left, c.right
    if isinstance(left, Var) or isinstance(right, Var):
        raise GroundingError(f"comparison {print_formula(c)} is not ground")
    if c.op == "=":
        return left == right
    if c.op == "!=":
        return left != right
    lk, rk = term_key(left), term_key(right)
    return {"<": lk < rk, "<=": lk <= rk, ">": lk > rk, ">=": lk >= rk}[c.op]


# --------------------------------------------------------------------------
# Domains
# --------------------------------------------------------------------------

def _expand_range_atom(a: Atom) -> list[Atom]:
    choices = []
    for t in a.args:
        if isinstance(t, Range):
            choices.append(range(t.lo, t.hi + 1))
        else:
            choices.append((t,))
    return [Atom(a.pred, tuple(args), a.strong) for args in itertools.product(*choices)]


def _is_fact(st: WeightedFormula) -> bool:
    return st.weight is None and isinstance(st.formula, Atom) and not st.formula.strong


def _facts(program: Program) -> list[Atom]:
    out = []
    for st in program.statements:
        if _is_fact(st):
            f = st.formula
            if any(isinstance(a, Range) for a in f.args):
                out.extend(_expand_range_atom(f))
            elif not free_vars(f):
                out.append(f)
    return out


def build_domains(program: Program, extra: Iterable[DomainDecl] = ()) -> DomainMap:
    """Predicate extensions from facts, plus ``#domain`` variable domains."""
    ext: dict[str, set] = {}
    for a in _facts(program):
        ext.setdefault(a.pred, set()).add(a.args)
    extensions = tuple(
        (p, tuple(sorted(ts, key=lambda t: tuple(term_key(x) for x in t))))
        for p, ts in sorted(ext.items()))
    dm = DomainMap((), extensions)
    return dm.with_decls(list(program.domains) + list(extra))


# --------------------------------------------------------------------------
# Quantifiers
# --------------------------------------------------------------------------

def expand_quantifiers(f, domains: DomainMap):
    """Rewrite ``![X]: g`` / ``?[X]: g`` into finite conjunctions / disjunctions."""
    if isinstance(f, (Forall, Exists)):
        dom = domains.var_domain(f.var)
        if not dom:
            raise GroundingError(f"quantified variable {f.var} has no declared domain")
        parts = [expand_quantifiers(substitute(f.body, {f.var: c}), domains) for c in dom]
        if len(parts) == 1:
            return parts[0]
        return And(tuple(parts)) if isinstance(f, Forall) else Or(tuple(parts))
    if isinstance(f, Not):
        return Not(expand_quantifiers(f.arg, domains))
    if isinstance(f, And):
        return And(tuple(expand_quantifiers(a, domains) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(expand_quantifiers(a, domains) for a in f.args))
    if isinstance(f, Implies):
        return Implies(expand_quantifiers(f.antecedent, domains),
                       expand_quantifiers(f.consequent, domains))
    if isinstance(f, Rule):
        return Rule(None if f.head is None else expand_quantifiers(f.head, domains),
                    None if f.body is None else expand_quantifiers(f.body, domains))
    return f


# --------------------------------------------------------------------------
# Instantiation
# --------------------------------------------------------------------------

class _AtomIndex:
    def __init__(self, atoms: Iterable[Atom] = ()):
        self.by_sig: dict[tuple, dict[tuple, None]] = {}
        for a in atoms:
            self.add(a)

    def add(self, a: Atom) -> bool:
        bucket = self.by_sig.setdefault((a.pred, len(a.args), a.strong), {})
        if a.args in bucket:
            return False
        bucket[a.args] = None
        return True

    def candidates(self, a: Atom) -> Iterable[tuple]:
        return self.by_sig.get((a.pred, len(a.args), a.strong), {})

    def __len__(self) -> int:
        return sum(len(b) for b in self.by_sig.values())


def _match(pattern: Atom, args: tuple, binding: dict) -> dict | None:
    out = binding
    for p, t in zip(pattern.args, args):
        if isinstance(p, Var):
            cur = out.get(p.name)
            if cur is None:
                if out is binding:
                    out = dict(binding)
                out[p.name] = t
            elif cur != t:
                return None
        elif p != t:
            return None
    return out


def _join(atoms: list[Atom], index: _AtomIndex, binding: dict) -> Iterator[dict]:
    if not atoms:
        yield binding
        return
    first, rest = atoms[0], atoms[1:]
    bound = substitute(first, binding)
    for args in list(index.candidates(bound)):
        b = _match(bound, args, binding)
        if b is not None:
            yield from _join(rest, index, b)


def _body_parts(f: Rule) -> tuple:
    if f.body is None:
        return ()
    return f.body.args if isinstance(f.body, And) else (f.body,)


def _positive_body_atoms(f) -> list[Atom]:
    if isinstance(f, Rule):
        return [p for p in _body_parts(f) if isinstance(p, Atom)]
    return []


def _top_comparisons(f) -> list[Compare]:
    if isinstance(f, Rule):
        return [p for p in _body_parts(f) if isinstance(p, Compare)]
    if isinstance(f, Compare):
        return [f]
    return []


def _global_vars(f) -> list[str]:
    """Free variables excluding those local to cardinality elements."""
    out: dict[str, None] = {}

    def visit(g):
        if isinstance(g, Cardinality):
            # element variables not bound by the element's own conditions are global
            for e in g.elements:
                local = {v for c in e.conditions if isinstance(c, Atom)
                         for v in _term_vars(c.args)}
                for v in free_vars(e.literal) + [v for c in e.conditions
                                                  for v in free_vars(c)]:
                    if v not in local:
                        out.setdefault(v)
            return
        if isinstance(g, Atom):
            for v in _term_vars(g.args):
                out.setdefault(v)
            return
        if isinstance(g, Compare):
            for v in _term_vars((g.left, g.right)):
                out.setdefault(v)
            return
        if isinstance(g, (Forall, Exists)):
            for v in free_vars(g):
                out.setdefault(v)
            return
        for s in _subformulas(g):
            visit(s)

    visit(f)
    return list(out)


def instances(f, domains: DomainMap, index: _AtomIndex) -> list[dict]:
    """All bindings of ``f``'s global free variables, in sorted order."""
    variables = _global_vars(f)
    if not variables:
        return [{}] if all(eval_compare(c) for c in _top_comparisons(f)
                           if not free_vars(c)) else []
    dom_vars = [v for v in variables if domains.var_domain(v) is not None]
    pos_atoms = _positive_body_atoms(f)
    covered = set(dom_vars)
    for a in pos_atoms:
        covered.update(_term_vars(a.args))
    unsafe = [v for v in variables if v not in covered]
    if unsafe:
        raise GroundingError(
            f"unsafe variable(s) {', '.join(unsafe)} in {print_formula(f)}: "
            "bind them by a positive body atom or a #domain declaration")
    results = []
    seen = set()
    for combo in itertools.product(*(domains.var_domain(v) for v in dom_vars)):
        start = dict(zip(dom_vars, combo))
        for b in _join(pos_atoms, index, start):
            key = tuple(b[v] for v in variables)
            if key in seen:
                continue
            seen.add(key)
            if all(eval_compare(substitute(c, b)) for c in _top_comparisons(f)):
                results.append(b)
    results.sort(key=lambda b: tuple(term_key(b[v]) for v in variables))
    return results


def _expand_cardinality(f, domains: DomainMap, facts: _AtomIndex):
    """Expand conditional literals ``a(X):p(X)`` against facts."""
    if isinstance(f, Cardinality):
        elems = []
        for e in f.elements:
            local = [v for v in free_vars(e.literal) + [v for c in e.conditions
                                                         for v in free_vars(c)]]
            local = list(dict.fromkeys(local))
            if not local:
                if all(_condition_true(c, facts) for c in e.conditions):
                    elems.append(CardElement(e.literal, ()))
                continue
            cond_atoms = [c for c in e.conditions if isinstance(c, Atom)]
            dom_vars = [v for v in local if domains.var_domain(v) is not None]
            covered = set(dom_vars)
            for c in cond_atoms:
                covered.update(_term_vars(c.args))
            missing = [v for v in local if v not in covered]
            if missing:
                raise GroundingError(
                    f"unsafe variable(s) {', '.join(missing)} in cardinality element "
                    f"{print_formula(e.literal)}")
            bindings = []
            for combo in itertools.product(*(domains.var_domain(v) for v in dom_vars)):
                for b in _join(cond_atoms, facts, dict(zip(dom_vars, combo))):
                    conds = [substitute(c, b) for c in e.conditions]
                    if all(_condition_true(c, facts) for c in conds):
                        bindings.append(b)
            bindings.sort(key=lambda b: tuple(term_key(b[v]) for v in local))
            for b in bindings:
                elems.append(CardElement(substitute(e.literal, b), ()))
        return Cardinality(f.lower, f.upper, tuple(dict.fromkeys(elems)))
    if isinstance(f, Rule):
        return Rule(None if f.head is None else _expand_cardinality(f.head, domains, facts),
                    f.body)
    return f


def _condition_true(c, facts: _AtomIndex) -> bool:
    if isinstance(c, Compare):
        return eval_compare(c)
    if isinstance(c, Atom):
        return c.args in facts.candidates(c)
    if isinstance(c, Not) and isinstance(c.arg, Atom):
        return c.arg.args not in facts.candidates(c.arg)
    raise GroundingError(f"unsupported condition {print_formula(c)}")


def _head_atoms(f) -> Iterator[Atom]:
    """Atoms that a statement may make true (over-approximation)."""
    if isinstance(f, Rule):
        if f.head is not None:
            yield from atoms_of(f.head)
        return
    yield from atoms_of(f)


def _instantiate(f, b: dict, domains: DomainMap, facts: _AtomIndex):
    g = substitute(f, b)
    g = expand_quantifiers(g, domains)
    return _expand_cardinality(g, domains, facts)


def _program_statements(program: Program) -> list[tuple[int, WeightedFormula]]:
    out = []
    for i, st in enumerate(program.statements):
        f = st.formula
        if isinstance(f, Atom) and any(isinstance(a, Range) for a in f.args):
            out.extend((i, WeightedFormula(a)) for a in _expand_range_atom(f))
        else:
            out.append((i, st))
    return out


def _possible_atoms(stmts, domains: DomainMap, facts: _AtomIndex) -> _AtomIndex:
    index = _AtomIndex()
    for bucket_sig, bucket in facts.by_sig.items():
        for args in bucket:
            index.add(Atom(bucket_sig[0], args, bucket_sig[2]))
    changed = True
    while changed:
        changed = False
        for _i, st in stmts:
            for b in instances(st.formula, domains, index):
                g = _instantiate(st.formula, b, domains, facts)
                for a in _head_atoms(g):
                    if not free_vars(a) and index.add(a):
                        changed = True
    return index


def _ground_statements(program: Program, domains: DomainMap,
                       index_from_possible: bool) -> list[tuple[int, WeightedFormula]]:
    facts = _AtomIndex(_facts(program))
    stmts = _program_statements(program)
    index = _possible_atoms(stmts, domains, facts) if index_from_possible else facts
    out: list[tuple[int, WeightedFormula]] = []
    for i, st in stmts:
        f = st.formula
        bindings = instances(f, domains, index)
        insts = [_instantiate(f, b, domains, facts) for b in bindings]
        if not free_vars(f):
            out.extend((i, WeightedFormula(g, st.weight, "single")) for g in insts)
        elif st.weight is None or st.kind == "per_instance":
            out.extend((i, WeightedFormula(g, st.weight, "single")) for g in insts)
        else:
            if not insts:
                raise GroundingError(
                    f"weighted formula {print_formula(f)} has no ground instances")
            g = insts[0] if len(insts) == 1 else And(tuple(insts))
            out.append((i, WeightedFormula(g, st.weight, "single")))
    return out


def expand_sugar(program: Program, domains: DomainMap | None = None) -> Program:
    """Replace every ``[[w]] f`` by one ``[w]`` formula per instance of ``f``.

    Variables are bound by ``#domain`` declarations or by positive body atoms
    over fact predicates; instances whose ground guards fail are dropped.
    """
    if domains is None:
        domains = build_domains(program)
    facts = _AtomIndex(_facts(program))
    out = []
    for st in program.statements:
        if st.kind != "per_instance":
            out.append(st)
            continue
        for b in instances(st.formula, domains, facts):
            out.append(WeightedFormula(substitute(st.formula, b), st.weight, "single"))
    return Program(out, list(program.domains))


def ground(program: Program, domains: DomainMap | None = None) -> GroundWeightedProgram:
    """Fully instantiate ``program``; output order follows source order."""
    if domains is None:
        domains = build_domains(program)
    stmts = _ground_statements(program, domains, index_from_possible=True)
    formulas = tuple(st for _i, st in stmts)
    for st in formulas:
        if free_vars(st.formula):
            raise GroundingError(f"variables remain in {print_formula(st.formula)}")
    universe = sorted({str(a) for st in formulas for a in atoms_of(st.formula)})
    return GroundWeightedProgram(formulas, tuple(universe), domains,
                                 tuple(i for i, _st in stmts))


def ground_query_formula(f: Formula, domains: DomainMap) -> Formula:
    """Ground a query formula: free ``#domain`` variables are universally closed."""
    variables = free_vars(f)
    missing = [v for v in variables if domains.var_domain(v) is None]
    if missing:
        raise GroundingError(
            f"variable(s) {', '.join(missing)} in query {print_formula(f)} have no domain")
    if not variables:
        return expand_quantifiers(f, domains)
    parts = []
    for combo in itertools.product(*(domains.var_domain(v) for v in variables)):
        parts.append(expand_quantifiers(substitute(f, dict(zip(variables, combo))), domains))
    return parts[0] if len(parts) == 1 else And(tuple(parts))

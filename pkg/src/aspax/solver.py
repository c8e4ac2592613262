"""Grounding over declared sorts and answer-set enumeration under FLP semantics.

Grounding instantiates rules by joining positive body atoms against the
atoms that can possibly be derived (a fixpoint that ignores negation), so
instances with an underivable positive atom are dropped and negative
literals over underivable atoms are removed.  Choice heads are translated
into normal rules plus bound-enforcing constraints over ``aux_`` atoms.

:func:`enumerate_answer_sets` is a backtracking search over atoms that
occur negatively, pruned by lower/upper least-model bounds.
:func:`is_answer_set` is the independent FLP check used as the oracle.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .core import (TIME_SORT, Arith, Atom, Choice, Const, Program, Rule, Var, is_dom_literal, dom_sort)
from .errors import ResourceError, SortError
from .mapping import compare

HIDDEN_PREFIXES = ("aux_", "type_")


@dataclass(frozen=True)
class Limits:
    max_instances: int = 10 ** 6
    max_nodes: int = 10 ** 7
    max_answer_sets: Optional[int] = None
    exhaustive_atoms: int = 26

    @classmethod
    def from_env(cls, **overrides) -> "Limits":
        """Defaults, then ``ASPAX_LIMITS="instances=..,nodes=..,answers=.."``, then overrides."""
        values = {}
        spec = os.environ.get("ASPAX_LIMITS", "")
        names = {"instances": "max_instances", "nodes": "max_nodes", "answers": "max_answer_sets"}
        for part in filter(None, (p.strip() for p in spec.split(","))):
            key, _, val = part.partition("=")
            if key in names:
                values[names[key]] = int(val)
        values.update({k: v for k, v in overrides.items() if v is not None})
        lim = cls(**values)
        if lim.max_instances <= 0 or lim.max_nodes <= 0 or (lim.max_answer_sets is not None and lim.max_answer_sets <= 0):
            raise ValueError("limits must be positive")
        return lim


DEFAULT_LIMITS = Limits()


@dataclass(frozen=True)
class GroundRule:
    head: Optional[Atom]
    pos: tuple = ()
    neg: tuple = ()

    def __str__(self):
        body = ", ".join([str(a) for a in self.pos] + [f"not {a}" for a in self.neg])
        if self.head is None:
            return f":- {body}."
        return f"{self.head} :- {body}." if body else f"{self.head}."


@dataclass(frozen=True)
class GroundChoice:
    """One ground instance of a choice head; kept for cardinality checks."""

    lower: int
    upper: Optional[int]
    elements: tuple  # ((atom, cond_atoms), ...)
    pos: tuple = ()
    neg: tuple = ()


@dataclass(frozen=True)
class GroundProgram:
    rules: tuple
    universe: tuple
    choices: tuple = ()
    hidden: frozenset = frozenset()

    def visible(self, interp) -> frozenset:
        return frozenset(a for a in interp if a not in self.hidden)


def is_hidden_pred(pred: str) -> bool:
    return pred.startswith(HIDDEN_PREFIXES)


# ---------------------------------------------------------------------------
# grounding


def _join_order(atoms):
    """Greedy order: next the atom sharing most variables with those already placed."""
    rest = list(atoms)
    out, bound = [], set()
    while rest:
        best = max(rest, key=lambda a: (sum(1 for v in set(a.vars()) if v in bound)
                                        - 0.01 * len(set(a.vars()) - bound), -rest.index(a)))
        rest.remove(best)
        out.append(best)
        bound.update(best.vars())
    return out


class _RuleGrounder:
    def __init__(self, rule: Rule, var_sorts: dict, sorts: dict, indexes: dict):
        self.rule = rule
        self.var_sorts = var_sorts
        self.sorts = sorts
        self.indexes = indexes
        self.atoms = _join_order([a for a in rule.pos if not is_dom_literal(a)])
        self.doms = [a for a in rule.pos if is_dom_literal(a)]
        self.rels = list(rule.gamma)

    def _domain(self, var):
        srt = self.var_sorts.get(var)
        if srt is None:
            raise SortError(f"variable {var} has no sort")
        return self.sorts[srt]

    def value(self, t, env):
        if isinstance(t, Const):
            return t.value
        if isinstance(t, Var):
            return env[t.name]
        return env[t.var.name] + t.offset

    def rel_holds(self, g, env):
        srt = None
        for v in g.vars():
            srt = self.var_sorts.get(v)
            break
        ok = compare(g.op, self.value(g.lhs, env), self.value(g.rhs, env), self.indexes.get(srt))
        return ok != g.negated

    def dom_holds(self, d, env):
        v = self.value(d.args[0], env)
        srt = dom_sort(d) or self.var_sorts.get(next(d.vars(), None))
        return srt is not None and v in self.sorts.get(srt, ())

    def instantiate_term(self, t, env):
        if isinstance(t, Const):
            return t
        return Const(self.value(t, env))

    def instantiate(self, a: Atom, env) -> Optional[Atom]:
        args = []
        for i, t in enumerate(a.args):
            if isinstance(t, Arith):
                v = env[t.var.name] + t.offset
                if v not in self.sorts.get(TIME_SORT, ()):
                    return None
                args.append(Const(v))
            else:
                args.append(self.instantiate_term(t, env))
        return Atom(a.pred, tuple(args))

    @staticmethod
    def match(pattern: Atom, ground: Atom, env: dict) -> Optional[dict]:
        new = None
        for t, g in zip(pattern.args, ground.args):
            gv = g.value
            if isinstance(t, Const):
                if t.value != gv:
                    return None
            elif isinstance(t, Var):
                cur = (new or env).get(t.name, _MISSING)
                if cur is _MISSING:
                    new = dict(new or env)
                    new[t.name] = gv
                elif cur != gv:
                    return None
            else:
                if not isinstance(gv, int):
                    return None
                cur = (new or env).get(t.var.name, _MISSING)
                if cur is _MISSING:
                    new = dict(new or env)
                    new[t.var.name] = gv - t.offset
                elif cur + t.offset != gv:
                    return None
        return new or env

    def bindings(self, possible: dict, env=None, atoms=None, doms=None, rels=None):
        """Yield environments satisfying positive atoms (against ``possible``), domains and relations."""
        atoms = self.atoms if atoms is None else atoms
        doms = self.doms if doms is None else doms
        rels = self.rels if rels is None else rels
        env = {} if env is None else env
        yield from self._join(0, atoms, doms, rels, possible, env)

    def _join(self, i, atoms, doms, rels, possible, env):
        if i == len(atoms):
            yield from self._bind_rest(doms, rels, env)
            return
        pattern = atoms[i]
        for g in possible.lookup(pattern, env):
            e = self.match(pattern, g, env)
            if e is None:
                continue
            if not self._early_rels(rels, e):
                continue
            yield from self._join(i + 1, atoms, doms, rels, possible, e)

    def _early_rels(self, rels, env):
        for g in rels:
            if all(v in env for v in g.vars()) and not self.rel_holds(g, env):
                return False
        return True

    def _bind_rest(self, doms, rels, env):
        unbound = []
        for d in doms:
            for v in d.vars():
                if v not in env and v not in unbound:
                    unbound.append(v)
        for r in rels:
            for v in r.vars():
                if v not in env and v not in unbound:
                    raise SortError(f"variable {v} in {r} is not bound")
        doms_of = [self._domain(v) for v in unbound]
        for combo in itertools.product(*doms_of):
            e = dict(env)
            e.update(zip(unbound, combo))
            if all(self.dom_holds(d, e) for d in doms) and all(self.rel_holds(g, e) for g in rels):
                yield e

    def element_bindings(self, element, possible, env):
        conds = [c for c in element.condition if not is_dom_literal(c)]
        cdoms = [c for c in element.condition if is_dom_literal(c)]
        yield from self._join(0, conds, cdoms, [], possible, env)


_MISSING = object()


class _AtomIndex(dict):
    """Atoms by predicate, with lazily built indexes on bound argument positions."""

    def __init__(self, atoms):
        super().__init__()
        for a in atoms:
            self.setdefault(a.key, []).append(a)
        self._sub = {}

    def lookup(self, pattern: Atom, env: dict):
        positions, values = [], []
        for i, t in enumerate(pattern.args):
            if isinstance(t, Const):
                positions.append(i)
                values.append(t.value)
            elif isinstance(t, Var) and t.name in env:
                positions.append(i)
                values.append(env[t.name])
            elif isinstance(t, Arith) and t.var.name in env:
                positions.append(i)
                values.append(env[t.var.name] + t.offset)
        if not positions:
            return self.get(pattern.key, ())
        key = (pattern.key, tuple(positions))
        sub = self._sub.get(key)
        if sub is None:
            sub = {}
            for a in self.get(pattern.key, ()):
                sub.setdefault(tuple(a.args[i].value for i in positions), []).append(a)
            self._sub[key] = sub
        return sub.get(tuple(values), ())


def _index_possible(atoms):
    return _AtomIndex(atoms)


def _strata(grounders):
    """Group rule indexes by strongly connected components of the head/body dependency graph."""
    heads = {}
    for i, g in enumerate(grounders):
        for a in g.rule.head_atoms():
            heads.setdefault(a.key, set()).add(i)
    deps = []
    for g in grounders:
        body = set(a.key for a in g.atoms)
        if isinstance(g.rule.head, Choice):
            for e in g.rule.head.elements:
                body.update(c.key for c in e.condition if not is_dom_literal(c))
        deps.append(sorted({j for k in body for j in heads.get(k, ())}))
    # Tarjan, iterative
    index, low, on, stack, out = {}, {}, set(), [], []
    counter = itertools.count()
    for root in range(len(grounders)):
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work.pop()
            if pi == 0:
                index[v] = low[v] = next(counter)
                stack.append(v)
                on.add(v)
            recurse = False
            for j in range(pi, len(deps[v])):
                w = deps[v][j]
                if w not in index:
                    work.append((v, j + 1))
                    work.append((w, 0))
                    recurse = True
                    break
                if w in on:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(sorted(comp))
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
    return out, deps


def _possible_atoms(program: Program, grounders, limits: Limits, facts=frozenset()) -> set:
    """Atoms derivable when negative bodies are ignored, one component at a time."""
    possible = set(facts)
    idx = _AtomIndex(possible)
    count = 0
    comps, deps = _strata(grounders)
    for comp in comps:
        recursive = len(comp) > 1 or comp[0] in deps[comp[0]]
        while True:
            new = set()
            for i in comp:
                g = grounders[i]
                r = g.rule
                for env in g.bindings(idx):
                    count += 1
                    if count > limits.max_instances:
                        raise ResourceError(f"grounding exceeded {limits.max_instances} rule instances")
                    if isinstance(r.head, Atom):
                        h = g.instantiate(r.head, env)
                        if h is not None and h not in possible:
                            new.add(h)
                    elif isinstance(r.head, Choice):
                        for e in r.head.elements:
                            for env2 in g.element_bindings(e, idx, env):
                                h = g.instantiate(e.atom, env2)
                                if h is not None and h not in possible:
                                    new.add(h)
            if not new:
                break
            possible |= new
            idx = _AtomIndex(possible)
            if not recursive:
                break
    return possible


def _aux(ri: int, a: Atom, tag: str = "") -> Atom:
    return Atom(f"aux_choice_{ri}{tag}_{a.pred}", a.args)


def ground(p: Program, limits: Limits = DEFAULT_LIMITS) -> GroundProgram:
    """Instantiate ``p`` over its sorts and translate choice heads into normal rules."""
    for key in p.predicates():
        if key[0].startswith("aux_"):
            raise SortError(f"predicate {key[0]} collides with reserved auxiliary names")
    indexes = {s: {v: i for i, v in enumerate(vals)} for s, vals in p.sorts.items()}
    facts = [r.head for r in p.rules if r.is_fact and r.head.is_ground()]
    fact_set = set(facts)
    rules = [r for r in p.rules if not (r.is_fact and r.head in fact_set)]
    grounders = [_RuleGrounder(r, p.var_sorts(r), p.sorts, indexes) for r in rules]
    possible = _possible_atoms(p, grounders, limits, fact_set)
    idx = _index_possible(sorted(possible, key=Atom.sort_key))
    out = []
    choices = []
    seen = set()
    sel_counter = itertools.count()
    count = 0

    def emit(rule):
        if rule not in seen:
            seen.add(rule)
            out.append(rule)

    for f in sorted(fact_set, key=Atom.sort_key):
        emit(GroundRule(f))
    for ri, g in enumerate(grounders):
        r = g.rule
        for env in g.bindings(idx):
            count += 1
            if count > limits.max_instances:
                raise ResourceError(f"grounding exceeded {limits.max_instances} rule instances")
            pos = tuple(g.instantiate(a, env) for a in g.atoms)
            neg = []
            for a in r.neg:
                n = g.instantiate(a, env)
                if n is not None and n in possible:
                    neg.append(n)
            neg = tuple(neg)
            if r.head is None:
                emit(GroundRule(None, pos, neg))
            elif isinstance(r.head, Atom):
                h = g.instantiate(r.head, env)
                if h is not None:
                    emit(GroundRule(h, pos, neg))
            else:
                elements = []
                for e in r.head.elements:
                    for env2 in g.element_bindings(e, idx, env):
                        h = g.instantiate(e.atom, env2)
                        if h is None:
                            continue
                        cond = tuple(g.instantiate(c, env2) for c in e.condition if not is_dom_literal(c))
                        elements.append((h, cond))
                elements = list(dict.fromkeys(elements))
                choices.append(GroundChoice(r.head.lower, r.head.upper, tuple(elements), pos, neg))
                for h, cond in elements:
                    emit(GroundRule(h, pos + cond, neg + (_aux(ri, h),)))
                    emit(GroundRule(_aux(ri, h), pos + cond, neg + (h,)))
                if r.head.upper == 1:
                    for (h1, c1), (h2, c2) in itertools.combinations(elements, 2):
                        emit(GroundRule(None, pos + (h1,) + c1 + (h2,) + c2, neg))
                if r.head.lower == 1:
                    if all(not c for _, c in elements):
                        emit(GroundRule(None, pos, neg + tuple(h for h, _ in elements)))
                    else:
                        sels = []
                        for h, c in elements:
                            s = Atom(f"aux_choice_{ri}_sel", (Const(next(sel_counter)),))
                            emit(GroundRule(s, (h,) + c, ()))
                            sels.append(s)
                        emit(GroundRule(None, pos, neg + tuple(sels)))
    universe = set()
    for r in out:
        if r.head is not None:
            universe.add(r.head)
        universe.update(r.pos)
        universe.update(r.neg)
    ordered = tuple(sorted(universe, key=Atom.sort_key))
    hidden = frozenset(a for a in ordered if is_hidden_pred(a.pred))
    return GroundProgram(tuple(out), ordered, tuple(choices), hidden)


# ---------------------------------------------------------------------------
# checking


def _least_model(rules) -> set:
    model = set()
    changed = True
    while changed:
        changed = False
        for r in rules:
            if r.head is not None and r.head not in model and all(a in model for a in r.pos):
                model.add(r.head)
                changed = True
    return model


def complete_hidden(g: GroundProgram, interp) -> frozenset:
    """Add the auxiliary atoms determined by a visible interpretation."""
    base = set(interp)
    hidden_rules = [r for r in g.rules if r.head is not None and r.head in g.hidden]
    changed = True
    while changed:
        changed = False
        for r in hidden_rules:
            if r.head not in base and all(a in base for a in r.pos) and not any(a in base for a in r.neg):
                base.add(r.head)
                changed = True
    return frozenset(base)


def is_answer_set(g: GroundProgram, interp, complete: bool = True) -> bool:
    """FLP check: ``interp`` is a model of ``g`` and minimal for the reduct {r | I |= B(r)}.

    Interpretations without auxiliary atoms are completed with the ones their
    visible part determines.
    """
    interp = set(interp)
    if complete and g.hidden and not (interp & g.hidden):
        interp = set(complete_hidden(g, interp))
    universe = set(g.universe)
    if not interp <= universe:
        return False
    reduct = []
    for r in g.rules:
        if all(a in interp for a in r.pos) and not any(a in interp for a in r.neg):
            if r.head is None or r.head not in interp:
                return False
            reduct.append(r)
    # a subset J of I satisfies every negative literal of the reduct, so
    # minimality reduces to the least model of the positive parts
    return _least_model(reduct) == interp


def check_cardinality(g: GroundProgram, interp) -> bool:
    """True iff every choice instance whose body holds respects its bounds."""
    interp = set(interp)
    for c in g.choices:
        if not all(a in interp for a in c.pos) or any(a in interp for a in c.neg):
            continue
        n = sum(1 for h, cond in c.elements if h in interp and all(x in interp for x in cond))
        if n < c.lower or (c.upper is not None and n > c.upper):
            return False
    return True


# ---------------------------------------------------------------------------
# search


@dataclass
class Enumeration:
    answer_sets: list
    truncated: bool = False
    nodes: int = 0

    def __iter__(self):
        return iter(self.answer_sets)

    def __len__(self):
        return len(self.answer_sets)


class _Search:
    def __init__(self, g: GroundProgram, limits: Limits):
        self.g = g
        self.limits = limits
        self.atoms = list(g.universe)
        self.idx = {a: i for i, a in enumerate(self.atoms)}
        self.rules = [(None if r.head is None else self.idx[r.head],
                       tuple(self.idx[a] for a in r.pos),
                       tuple(self.idx[a] for a in r.neg)) for r in g.rules]
        self.normal = [r for r in self.rules if r[0] is not None]
        self.constraints = [r for r in self.rules if r[0] is None]
        self.negatable = sorted({a for r in self.rules for a in r[2]})
        self.nodes = 0
        # watch lists for the counter-based least model
        self.by_pos = {}
        for k, (_, pos, _) in enumerate(self.normal):
            for a in set(pos):
                self.by_pos.setdefault(a, []).append(k)

    def least(self, active) -> set:
        need = [len(set(pos)) for (_, pos, _) in self.normal]
        model = set()
        queue = []
        for k, (h, pos, _) in enumerate(self.normal):
            if active[k] and need[k] == 0 and h not in model:
                model.add(h)
                queue.append(h)
        while queue:
            a = queue.pop()
            for k in self.by_pos.get(a, ()):
                need[k] -= 1
                if need[k] == 0 and active[k]:
                    h = self.normal[k][0]
                    if h not in model:
                        model.add(h)
                        queue.append(h)
        return model

    def propagate(self, assign: dict):
        while True:
            lower = self.least([all(assign.get(a) is False for a in neg) for (_, _, neg) in self.normal])
            upper = self.least([not any(assign.get(a) is True for a in neg) for (_, _, neg) in self.normal])
            changed = False
            for a in self.negatable:
                v = assign.get(a)
                if v is True and a not in upper:
                    return None
                if v is False and a in lower:
                    return None
                if v is None:
                    if a in lower:
                        assign[a] = True
                        changed = True
                    elif a not in upper:
                        assign[a] = False
                        changed = True
            for (_, pos, neg) in self.constraints:
                if not all(a in lower for a in pos):
                    continue
                if any(assign.get(a) is True for a in neg):
                    continue
                open_ = [a for a in neg if assign.get(a) is None]
                if not open_:
                    return None
                if len(open_) == 1:
                    assign[open_[0]] = True
                    changed = True
            if not changed:
                return assign, lower

    def run(self, limit: Optional[int]):
        found = []
        truncated = False
        stack = [{}]
        while stack:
            assign = stack.pop()
            self.nodes += 1
            if self.nodes > self.limits.max_nodes:
                raise ResourceError(f"search exceeded {self.limits.max_nodes} nodes")
            res = self.propagate(dict(assign))
            if res is None:
                continue
            assign, lower = res
            branch = next((a for a in self.negatable if a not in assign), None)
            if branch is None:
                found.append(frozenset(self.atoms[i] for i in lower))
                continue
            stack.append({**assign, branch: False})
            stack.append({**assign, branch: True})
        key = lambda s: tuple(1 if a in s else 0 for a in self.atoms)
        found.sort(key=key)
        if limit is not None and len(found) > limit:
            found = found[:limit]
            truncated = True
        return found, truncated


def enumerate_answer_sets(g: GroundProgram, limit: Optional[int] = None,
                          limits: Limits = DEFAULT_LIMITS, project: bool = True) -> Enumeration:
    """All answer sets of ``g`` in bitvector order over ``g.universe``.

    Auxiliary atoms are projected out unless ``project`` is false.
    """
    limit = limit if limit is not None else limits.max_answer_sets
    search = _Search(g, limits)
    found, truncated = search.run(limit)
    if project:
        found = [g.visible(s) for s in found]
    return Enumeration(found, truncated, search.nodes)


def brute_force_answer_sets(g: GroundProgram, limits: Limits = DEFAULT_LIMITS) -> list:
    """Filter all 2^n interpretations through :func:`is_answer_set` (oracle)."""
    if len(g.universe) > limits.exhaustive_atoms:
        raise ResourceError(f"{len(g.universe)} atoms exceed the exhaustive bound {limits.exhaustive_atoms}")
    atoms = list(g.universe)
    out = []
    for bits in itertools.product((0, 1), repeat=len(atoms)):
        interp = {a for a, b in zip(atoms, bits) if b}
        if is_answer_set(g, interp, complete=False):
            out.append(g.visible(interp))
    return out


def solve(p: Program, limit: Optional[int] = None, limits: Limits = DEFAULT_LIMITS) -> list:
    """Ground and enumerate in one call; returns the projected answer sets."""
    return enumerate_answer_sets(ground(p, limits), limit, limits).answer_sets


__all__ = ["DEFAULT_LIMITS", "Enumeration", "GroundChoice", "GroundProgram", "GroundRule", "Limits",
           "brute_force_answer_sets", "check_cardinality", "complete_hidden", "enumerate_answer_sets",
           "ground", "is_answer_set", "solve"]

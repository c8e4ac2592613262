"""Domain abstraction: rewrite a program over abstract classes of constants.

Each rule is first standardized apart on the positions whose sort is
abstracted, so every shared variable or constant becomes an explicit
equality in the comparison part.  The comparisons are then analysed as one
composite relation per abstract assignment and the rule is replaced by

* a structural rule for assignments where the comparison is certain to be
  satisfiable for every concretization of the positively bound variables,
* a guessed head for the remaining possible assignments, and
* a guessed head with negative literals dropped, for negative literals
  whose abstract atom may stand for several concrete atoms.

The third group drops the negative literals instead of moving them to the
positive body.  ``shift=True`` moves them, which is the more compact textbook
variant; it loses answer sets when a shifted atom depends on the head.  By
default every non-empty subset of uncertain negative literals is relaxed;
``subsets=False`` relaxes one literal at a time, which misses answer sets
where two such literals are blocked at once.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional

from .core import (NEGATED_OP, OP_NAMES, TIME_SORT, Arith, Atom, Choice, ChoiceElement, Const, Program,
                   Relation, Rule, Var, is_dom_literal)
from .errors import MappingError, TransformError
from .mapping import CompositeRelation, CompositeTyping, DomainMapping
from .omission import dom_literal, omit_literals

STEP_FACT = "fact"
STEP_TOP = "0a"
STEP_STRUCT = "1a"
STEP_STRUCT_FREE = "2a'"
STEP_GUESS = {"III": "1b", "IV": "1c"}
STEP_RELAX = {"I": "2i'", "III": "2b'", "IV": "2c'"}


@dataclass(frozen=True)
class StandardizedRule:
    rule: Rule
    fresh: tuple  # names of variables introduced by standardization
    exact_gamma: tuple  # comparisons over exact sorts only, kept verbatim
    abstract_gamma: tuple  # comparisons over abstracted sorts
    var_sorts: dict


@dataclass(frozen=True)
class EmittedRule:
    rule: Rule
    source: int
    step: str
    assignment: tuple = ()  # ((var, class), ...) or () for unguarded rules


@dataclass(frozen=True)
class DomainResult:
    program: Program
    emitted: tuple
    mapping: DomainMapping
    omission: Optional[object] = None

    def steps(self) -> dict:
        out = {}
        for e in self.emitted:
            out.setdefault(e.source, []).append(e.step)
        return out


def _fresh_names(used: set, base: str):
    k = 1
    while True:
        name = f"{base}_{k}"
        k += 1
        if name not in used:
            used.add(name)
            yield name


def standardize_apart(r: Rule, var_sorts: dict, signature: dict, m: DomainMapping) -> StandardizedRule:
    """Give every abstracted argument position of the body its own variable."""
    used = set(r.vars())
    seen = set()
    fresh, extra_gamma, extra_dom = [], [], []
    namegen = {}

    def new_var(base):
        gen = namegen.setdefault(base, _fresh_names(used, base))
        return next(gen)

    def rewrite(a: Atom, negative: bool) -> Atom:
        sorts = signature.get(a.key)
        args = []
        for i, t in enumerate(a.args):
            srt = sorts[i] if sorts else None
            if srt is None or m.is_exact(srt):
                args.append(t)
                continue
            if isinstance(t, Arith):
                raise MappingError(f"arithmetic on abstracted sort {srt!r} in {a}")
            if isinstance(t, Var):
                if t.name not in seen:
                    seen.add(t.name)
                    args.append(t)
                    continue
                v = new_var(t.name)
                extra_gamma.append(Relation("=", t, Var(v)))
            else:
                v = new_var("C")
                extra_gamma.append(Relation("=", Var(v), t))
            fresh.append(v)
            var_sorts[v] = srt
            if negative:
                extra_dom.append(dom_literal(v, srt))
            args.append(Var(v))
        return Atom(a.pred, tuple(args))

    var_sorts = dict(var_sorts)
    pos = tuple(a if is_dom_literal(a) else rewrite(a, False) for a in r.pos)
    neg = tuple(rewrite(a, True) for a in r.neg)
    gamma = tuple(g.normalized() for g in r.gamma) + tuple(extra_gamma)
    exact, abstract = [], []
    for g in gamma:
        srts = {var_sorts[v] for v in g.vars()}
        (abstract if any(not m.is_exact(s) for s in srts) else exact).append(g)
    rule = Rule(r.head, pos + tuple(extra_dom), neg, gamma)
    return StandardizedRule(rule, tuple(fresh), tuple(exact), tuple(abstract), var_sorts)


def _bound_vars(pos) -> set:
    out = set()
    for a in pos:
        if not is_dom_literal(a):
            out.update(a.vars())
    return out


def _lift_term(t, srt, m: DomainMapping):
    if isinstance(t, Const):
        return Const(m.map_value(srt, t.value))
    return t


def _lifted_literal(g: Relation, var_sorts: dict, m: DomainMapping, typing: CompositeTyping, nu: dict):
    """The comparison as it must appear in the abstract rule under ``nu``."""
    srt = next(var_sorts[v] for v in g.vars()) if list(g.vars()) else None
    lifted = Relation(g.op, _lift_term(g.lhs, srt, m), _lift_term(g.rhs, srt, m))
    if _holds_lifted(g, nu, srt, m, typing):
        return lifted
    return Relation(NEGATED_OP[g.op], lifted.lhs, lifted.rhs)


def _holds_lifted(g: Relation, nu: dict, srt, m: DomainMapping, typing: CompositeTyping) -> bool:
    comp = CompositeRelation((g,), tuple(v for v in dict.fromkeys(g.vars())),
                             tuple(srt for _ in dict.fromkeys(g.vars())))
    return CompositeTyping(comp, m, typing.sorts).lifted(nu)


def _subst_term(t, env):
    if isinstance(t, Var):
        return env.get(t.name, t)
    if isinstance(t, Arith) and t.var.name in env:
        raise TransformError(f"cannot substitute into {t}")
    return t


def _subst_atom(a: Atom, env) -> Atom:
    return Atom(a.pred, tuple(_subst_term(t, env) for t in a.args))


def _keep(a: Atom) -> bool:
    # a domain literal over an abstract constant is always true
    return not (is_dom_literal(a) and a.is_ground())


def _substitute(r: Rule, env: dict) -> Rule:
    """Partially evaluate ``r`` by fixing variables to abstract constants."""
    head = r.head
    if isinstance(head, Atom):
        head = _subst_atom(head, env)
    elif isinstance(head, Choice):
        elements = tuple(ChoiceElement(_subst_atom(e.atom, env),
                                       tuple(c for c in (_subst_atom(c, env) for c in e.condition) if _keep(c)))
                         for e in head.elements)
        head = Choice(head.lower, head.upper, elements)
    pos = tuple(a for a in (_subst_atom(a, env) for a in r.pos) if _keep(a))
    neg = tuple(_subst_atom(a, env) for a in r.neg)
    gamma = tuple(Relation(g.op, _subst_term(g.lhs, env), _subst_term(g.rhs, env), g.negated) for g in r.gamma)
    return Rule(head, tuple(dict.fromkeys(pos)), tuple(dict.fromkeys(neg)), gamma)


def _neg_uncertain(a: Atom, signature: dict, m: DomainMapping, nu: dict) -> bool:
    """True if the abstract atom may stand for more than one concrete atom under ``nu``."""
    sorts = signature.get(a.key) or ()
    for t, srt in zip(a.args, sorts):
        if m.is_exact(srt):
            continue
        if isinstance(t, Var) and t.name in nu:
            if len(m.members(srt, nu[t.name])) == 1:
                continue
        return True
    return False


def _lift_fact(a: Atom, signature: dict, m: DomainMapping) -> Atom:
    return m.apply_atom(a, signature)


def _lift_consts(a: Atom, signature: dict, m: DomainMapping) -> Atom:
    sorts = signature.get(a.key)
    if not sorts:
        return a
    return Atom(a.pred, tuple(_lift_term(t, s, m) for t, s in zip(a.args, sorts)))


def _lift_head(head, signature: dict, m: DomainMapping):
    if isinstance(head, Atom):
        return _lift_consts(head, signature, m)
    if isinstance(head, Choice):
        return Choice(head.lower, head.upper, tuple(
            ChoiceElement(_lift_consts(e.atom, signature, m),
                          tuple(c if is_dom_literal(c) else _lift_consts(c, signature, m) for c in e.condition))
            for e in head.elements))
    return head


def _all_exact(r: Rule, var_sorts: dict, signature: dict, m: DomainMapping) -> bool:
    if any(not m.is_exact(s) for s in var_sorts.values()):
        return False
    for a in r.atoms():
        for t, srt in zip(a.args, signature.get(a.key) or ()):
            if isinstance(t, Const) and not m.is_exact(srt):
                return False
    return True


def _guess_head(head):
    if isinstance(head, Atom):
        return Choice(0, 1, (ChoiceElement(head),))
    single = len(head.elements) == 1 and not head.elements[0].condition
    return Choice(0, 1 if single else None, head.elements)


def _structural_head(head, injective: bool):
    if isinstance(head, Choice) and not injective:
        single = len(head.elements) == 1 and not head.elements[0].condition
        return Choice(head.lower, 1 if single else None, head.elements)
    return head


def _guard_name(comp: CompositeRelation, source: int, label: str) -> str:
    rels = comp.relations
    if len(rels) == 1 and isinstance(rels[0].lhs, Var) and isinstance(rels[0].rhs, Var) \
            and rels[0].lhs != rels[0].rhs:
        return f"type_{OP_NAMES[rels[0].op]}_{label}"
    return f"type_r{source}_{label}"


class _Emitter:
    def __init__(self, symbolic: bool):
        self.symbolic = symbolic
        self.rules = []
        self.seen = set()
        self.guard_facts = {}
        self.guard_sorts = {}

    def add(self, rule: Rule, source: int, step: str, nu=()):
        if rule in self.seen:
            return
        self.seen.add(rule)
        self.rules.append(EmittedRule(rule, source, step, tuple(nu)))


def abstract_rule(p: Program, index: int, m: DomainMapping, shift: bool = False, subsets: bool = True):
    """Abstract rules for ``p.rules[index]`` under the domain part of ``m`` (partial evaluation)."""
    em = _Emitter(False)
    _abstract_rule(p, index, m, em, shift, subsets, symbolic=False)
    return [e.rule for e in em.rules]


def _abstract_rule(p: Program, index: int, m: DomainMapping, em: _Emitter, shift: bool, subsets: bool,
                   symbolic: bool):
    r = p.rules[index]
    if r.is_fact:
        em.add(Rule(_lift_fact(r.head, p.signature, m)), index, STEP_FACT)
        return
    var_sorts = p.var_sorts(r)
    if _all_exact(r, var_sorts, p.signature, m):
        em.add(r, index, STEP_TOP)
        return
    st = standardize_apart(r, var_sorts, p.signature, m)
    sr = st.rule
    comp = CompositeRelation.of(st.abstract_gamma, st.var_sorts)
    typing = CompositeTyping(comp, m, p.sorts, _bound_vars(sr.pos))
    injective = _all_exact(r, var_sorts, p.signature, m)
    head = _lift_head(sr.head, p.signature, m)
    uncertain_negs = [a for a in sr.neg
                      if any(not m.is_exact(s) for s in (p.signature.get(a.key) or ()))]

    groups = {}  # (step, head kind, dropped negs, case) -> list of nu

    def body(nu: dict, dropped=()):
        keep_neg = tuple(a for a in sr.neg if a not in dropped)
        pos = sr.pos + (tuple(dropped) if shift else ())
        gamma = list(st.exact_gamma)
        if comp.relations:
            gamma.extend(_lifted_literal(g, st.var_sorts, m, typing, nu) for g in comp.relations)
        return pos, keep_neg, gamma

    for nu in typing.assignments():
        case, certain = typing.analyse(nu)
        if case == "II":
            continue
        if certain:
            step = STEP_STRUCT if case == "I" else STEP_STRUCT_FREE
            if not comp.relations:
                step = STEP_TOP
            groups.setdefault((step, "struct", (), case), []).append(nu)
        elif head is not None:
            groups.setdefault((STEP_GUESS[case], "guess", (), case), []).append(nu)
        if head is None or not uncertain_negs:
            continue
        relevant = [a for a in uncertain_negs if _neg_uncertain(a, p.signature, m, nu)]
        if subsets:
            combos = [c for k in range(1, len(relevant) + 1) for c in itertools.combinations(relevant, k)]
        else:
            combos = [(a,) for a in relevant]
        for dropped in combos:
            groups.setdefault((STEP_RELAX[case], "guess", dropped, case), []).append(nu)

    for (step, kind, dropped, case), nus in groups.items():
        new_head = _structural_head(head, injective) if kind == "struct" else _guess_head(head)
        if symbolic and comp.relations:
            if dropped:
                label = f"{case}_n" + "_".join(str(sr.neg.index(a)) for a in dropped)
            elif kind == "struct" and case != "I":
                label = f"{case}c"
            else:
                label = case
            name = _guard_name(comp, index, label)
            full = [nu for nu in typing.assignments() if typing.analyse(nu)[0] == case]
            if not name.startswith("type_r") and (label != case or len(full) != len(nus)):
                name = f"type_r{index}_{label}"
            em.guard_sorts[name] = comp.var_sorts
            facts = em.guard_facts.setdefault(name, set())
            for nu in nus:
                facts.add(Atom(name, tuple(Const(nu[v]) for v in comp.variables)))
            guard = Atom(name, tuple(Var(v) for v in comp.variables))
            pos = sr.pos + (tuple(dropped) if shift else ()) + (guard,)
            keep_neg = tuple(a for a in sr.neg if a not in dropped)
            em.add(Rule(new_head, pos, keep_neg, tuple(st.exact_gamma)), index, step)
            continue
        for nu in nus:
            pos, keep_neg, _ = body(nu, dropped)
            # the lifted comparisons hold under nu by construction, so they vanish once nu is substituted
            rule = _substitute(Rule(new_head, pos, keep_neg, tuple(st.exact_gamma)),
                               {v: Const(nu[v]) for v in comp.variables})
            em.add(rule, index, step, tuple((v, nu[v]) for v in comp.variables))


def abstract_domain(p: Program, m: DomainMapping, symbolic: bool = False, shift: bool = False,
                    subsets: bool = True) -> DomainResult:
    """Domain abstraction only; omitted predicates in ``m`` are ignored here."""
    dm = m.domain_part()
    dm.check_program(p)
    em = _Emitter(symbolic)
    for i in range(len(p.rules)):
        _abstract_rule(p, i, dm, em, shift, subsets, symbolic)
    rules = [e.rule for e in em.rules]
    for name in sorted(em.guard_facts):
        rules.extend(Rule(a) for a in sorted(em.guard_facts[name], key=Atom.sort_key))
    sorts = dm.abstract_sorts(p.sorts)
    declared = dict(p.signature)
    for name, srts in em.guard_sorts.items():
        declared[(name, len(srts))] = tuple(srts)
    prog = p.with_rules(rules, sorts=sorts, signature=declared)
    return DomainResult(prog, tuple(em.rules), m)


def abstract_program(p: Program, m: DomainMapping, symbolic: bool = False, shift: bool = False,
                     subsets: bool = True) -> DomainResult:
    """Full abstraction: literal omission for ``m.omitted`` followed by domain abstraction."""
    om = None
    src = p
    if m.omitted:
        m.check_program(p)
        om = omit_literals(p, m.omitted)
        src = om.program
    res = abstract_domain(src, m, symbolic=symbolic, shift=shift, subsets=subsets)
    return DomainResult(res.program, res.emitted, m, om)


def check_domain_theorem(p: Program, m: DomainMapping, sample_facts: Iterable = (None,), limits=None, **kw):
    """Check that every concrete answer set maps to an abstract answer set, per fact sample."""
    from .checker import check_coverage

    reports = []
    for facts in sample_facts:
        concrete = p if not facts else p.add_facts(facts)
        abstract = abstract_program(concrete, m, **kw).program
        reports.append(check_coverage(concrete, abstract, m, limits=limits, with_spurious=False))
    return reports

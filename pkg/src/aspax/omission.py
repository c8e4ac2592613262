"""Literal omission: remove a set of predicates and guess the heads they supported."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .core import Atom, Choice, ChoiceElement, Program, Rule, Var, is_dom_literal
from .mapping import DomainMapping

KEPT = "kept"
HEAD_CHOICED = "head-choiced"
CONSTRAINT_DROPPED = "constraint-dropped"
CONSTRAINT_SHRUNK = "constraint-shrunk"
RULE_DROPPED = "rule-dropped"
CONDITION_DROPPED = "condition-dropped"


@dataclass(frozen=True)
class OmissionResult:
    program: Program
    report: tuple  # (rule index, disposition) for every source rule
    dom_sorts: frozenset = frozenset()
    notes: tuple = ()


def dom_literal(var: str, sort: str) -> Atom:
    return Atom(f"dom_{sort}", (Var(var),))


def _bound_by(atoms) -> set:
    out = set()
    for a in atoms:
        out.update(a.vars())
    return out


def omit_literals(p: Program, omitted: Iterable, shrink_constraints: bool = False) -> OmissionResult:
    """Build the omission abstraction of ``p`` for the predicate set ``omitted``.

    ``shrink_constraints`` keeps constraints with their omitted literals
    removed instead of dropping them.  That variant does not over-approximate
    and exists so the coverage checker can be exercised against it.
    """
    L = frozenset(omitted)
    if not L:
        return OmissionResult(p, tuple((i, KEPT) for i in range(len(p.rules))))
    out, report, notes, dom_sorts = [], [], [], set()
    seen = set()

    def emit(rule):
        if rule not in seen:
            seen.add(rule)
            out.append(rule)

    for i, r in enumerate(p.rules):
        gone_pos = [a for a in r.pos if not is_dom_literal(a) and a.key in L]
        gone_neg = [a for a in r.neg if a.key in L]
        body_shrunk = bool(gone_pos or gone_neg)
        if isinstance(r.head, Atom) and r.head.key in L:
            report.append((i, RULE_DROPPED))
            continue
        head = r.head
        cond_dropped = elements_dropped = False
        if isinstance(head, Choice):
            elements = []
            for e in head.elements:
                if e.atom.key in L:
                    elements_dropped = True
                    continue
                cond = tuple(c for c in e.condition if is_dom_literal(c) or c.key not in L)
                cond_dropped |= len(cond) != len(e.condition)
                elements.append((e, cond))
            if not elements:
                report.append((i, RULE_DROPPED))
                continue
        if not body_shrunk and not cond_dropped and not elements_dropped:
            emit(r)
            report.append((i, KEPT))
            continue
        if head is None:
            if shrink_constraints:
                emit(Rule(None, tuple(a for a in r.pos if a not in gone_pos),
                          tuple(a for a in r.neg if a not in gone_neg), r.gamma))
                report.append((i, CONSTRAINT_SHRUNK))
            else:
                report.append((i, CONSTRAINT_DROPPED))
            continue
        sorts = p.var_sorts(r)
        pos = tuple(a for a in r.pos if a not in gone_pos)
        neg = tuple(a for a in r.neg if a not in gone_neg)
        bound = _bound_by(pos)
        body_needed = []
        for a in neg:
            body_needed.extend(a.vars())
        for g in r.gamma:
            body_needed.extend(g.vars())
        extra = []
        for v in dict.fromkeys(body_needed):
            if v not in bound:
                extra.append(dom_literal(v, sorts[v]))
                dom_sorts.add(sorts[v])
                bound.add(v)
        pos = pos + tuple(extra)
        if isinstance(head, Atom):
            cond = []
            for v in dict.fromkeys(head.vars()):
                if v not in bound:
                    cond.append(dom_literal(v, sorts[v]))
                    dom_sorts.add(sorts[v])
            upper = 1 if not cond else None
            new_head = Choice(0, upper, (ChoiceElement(head, tuple(cond)),))
        else:
            new_elements = []
            for e, cond in elements:
                local = bound | _bound_by(cond)
                extra_cond = []
                for v in dict.fromkeys(e.atom.vars()):
                    if v not in local:
                        extra_cond.append(dom_literal(v, sorts[v]))
                        dom_sorts.add(sorts[v])
                        local.add(v)
                new_elements.append(ChoiceElement(e.atom, tuple(cond) + tuple(extra_cond)))
            if cond_dropped:
                notes.append(f"rule {i}: omitted atoms removed from choice conditions")
            lower = 0 if (body_shrunk or elements_dropped) else head.lower
            relaxed = body_shrunk or cond_dropped
            single = len(new_elements) == 1 and not new_elements[0].condition
            upper = 1 if single else (None if relaxed else head.upper)
            new_head = Choice(lower, upper, tuple(new_elements))
        emit(Rule(new_head, pos, neg, r.gamma))
        report.append((i, CONDITION_DROPPED if cond_dropped and not body_shrunk else HEAD_CHOICED))
    declared = {k: v for k, v in p.signature.items() if k not in L}
    prog = p.with_rules(out, signature=declared)
    return OmissionResult(prog, tuple(report), frozenset(dom_sorts), tuple(notes))


def check_omission_theorem(p: Program, omitted: Iterable, sample_facts: Iterable = (None,), limits=None):
    """For every instance and every concrete answer set I, check I minus L is an abstract answer set."""
    from .checker import check_coverage

    m = DomainMapping.identity(omitted)
    abstract = omit_literals(p, m.omitted).program
    reports = []
    for facts in sample_facts:
        concrete = p if not facts else p.add_facts(facts)
        lifted = abstract if not facts else abstract.add_facts(
            [a for a in facts if a.key not in m.omitted])
        reports.append(check_coverage(concrete, lifted, m, limits=limits, with_spurious=False))
    return reports

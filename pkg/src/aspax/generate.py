"""Random small programs and mappings for property tests and the acceptance suite."""
from __future__ import annotations

import random
from dataclasses import dataclass

from .core import Atom, Choice, ChoiceElement, Const, Program, Relation, Rule, Var, make_program
from .mapping import DomainMapping
from .solver import GroundProgram, GroundRule

PREDICATES = (("p", 1), ("q", 1), ("r", 2), ("s", 2), ("t", 0))
RELATIONS = ("=", "!=", "<", "<=")
VARS = ("X", "Y")


@dataclass
class GeneratorConfig:
    max_rules: int = 6
    max_vars: int = 2
    max_neg: int = 1
    max_domain: int = 4
    max_facts: int = 4
    choice_rate: float = 0.15
    constraint_rate: float = 0.15


def _term(rng, names, n, allow_const=True):
    if allow_const and rng.random() < 0.2:
        return Const(rng.randint(1, n))
    return Var(rng.choice(names))


def _atom(rng, pred, arity, names, n):
    return Atom(pred, tuple(_term(rng, names, n) for _ in range(arity)))


def random_rule(rng: random.Random, n: int, cfg: GeneratorConfig) -> Rule:
    names = VARS[:rng.randint(1, cfg.max_vars)]
    pos = [_atom(rng, *rng.choice(PREDICATES), names, n) for _ in range(rng.randint(1, 2))]
    neg = [_atom(rng, *rng.choice(PREDICATES), names, n) for _ in range(rng.randint(0, cfg.max_neg))]
    gamma = []
    if rng.random() < 0.6:
        op = rng.choice(RELATIONS)
        lhs = Var(rng.choice(names))
        rhs = _term(rng, names, n)
        if rhs != lhs:
            gamma.append(Relation(op, lhs, rhs))
    roll = rng.random()
    if roll < cfg.constraint_rate:
        head = None
    elif roll < cfg.constraint_rate + cfg.choice_rate:
        elements = tuple(ChoiceElement(_atom(rng, *rng.choice(PREDICATES), names, n))
                         for _ in range(rng.randint(1, 2)))
        head = Choice(rng.randint(0, 1), rng.choice((None, 1)), elements)
    else:
        head = _atom(rng, *rng.choice(PREDICATES), names, n)
    # make the rule safe by binding loose variables through domain literals
    bound = set()
    for a in pos:
        bound.update(a.vars())
    loose = set()
    for a in neg:
        loose.update(a.vars())
    for g in gamma:
        loose.update(g.vars())
    if isinstance(head, Atom):
        loose.update(head.vars())
    elif isinstance(head, Choice):
        for e in head.elements:
            loose.update(e.atom.vars())
    doms = [Atom("dom", (Var(v),)) for v in sorted(loose - bound)]
    return Rule(head, tuple(pos) + tuple(doms), tuple(neg), tuple(gamma))


def random_facts(rng: random.Random, n: int, cfg: GeneratorConfig) -> list:
    out = set()
    for _ in range(rng.randint(0, cfg.max_facts)):
        pred, arity = rng.choice(PREDICATES)
        out.add(Atom(pred, tuple(Const(rng.randint(1, n)) for _ in range(arity))))
    return sorted(out, key=Atom.sort_key)


def random_program(rng: random.Random, cfg: GeneratorConfig = None) -> Program:
    cfg = cfg or GeneratorConfig()
    n = rng.randint(2, cfg.max_domain)
    rules = [random_rule(rng, n, cfg) for _ in range(rng.randint(1, cfg.max_rules))]
    rules += [Rule(f) for f in random_facts(rng, n, cfg)]
    declared = {k: ("d",) * k[1] for k in PREDICATES}
    return make_program(rules, {"d": tuple(range(1, n + 1))}, declared)


def random_mapping(rng: random.Random, p: Program, omit_rate: float = 0.3) -> DomainMapping:
    domain = p.sorts["d"]
    cuts = sorted(rng.sample(range(1, len(domain)), rng.randint(0, len(domain) - 1)))
    m = DomainMapping.intervals("d", domain, cuts, names=[f"k{i}" for i in range(len(cuts) + 1)])
    used = sorted(p.predicates())
    omitted = [k for k in used if rng.random() < omit_rate]
    return m.with_omitted(omitted)


def random_ground_program(rng: random.Random, n_atoms: int = 14, n_rules: int = 18) -> GroundProgram:
    atoms = [Atom(f"a{i}") for i in range(n_atoms)]
    rules = []
    for _ in range(n_rules):
        head = rng.choice(atoms) if rng.random() > 0.12 else None
        pos = tuple(sorted(set(rng.sample(atoms, rng.randint(0, min(2, len(atoms))))), key=Atom.sort_key))
        neg = tuple(sorted(set(rng.sample(atoms, rng.randint(0, min(2, len(atoms))))), key=Atom.sort_key))
        rules.append(GroundRule(head, pos, neg))
    return GroundProgram(tuple(rules), tuple(atoms))

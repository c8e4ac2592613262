"""Domain mappings, omission sets, and relation typing over abstract classes.

A :class:`DomainMapping` partitions the domain of some sorts into ordered
abstract classes and names a set of omitted predicates.  Sorts it does not
mention (always including ``time``) map every constant to itself.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .core import (NEGATED_OP, OP_NAMES, OPS, TIME_SORT, Atom, Const, Program, Relation, Rule, const_key,
                   make_program)
from .errors import MappingError

log = logging.getLogger(__name__)

CASES = ("I", "II", "III", "IV")


def compare(op: str, a, b, index: Optional[dict] = None) -> bool:
    """Evaluate ``a op b``; ``index`` gives positions in a sort's declared order."""
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if index is not None and a in index and b in index:
        x, y = index[a], index[b]
    elif isinstance(a, int) and isinstance(b, int):
        x, y = a, b
    else:
        x, y = const_key(a), const_key(b)
    if op == "<":
        return x < y
    if op == "<=":
        return x <= y
    if op == ">":
        return x > y
    if op == ">=":
        return x >= y
    raise ValueError(f"unknown relation {op!r}")


@dataclass(frozen=True)
class SortMapping:
    """Ordered partition of one sort's domain into named classes."""

    domain: tuple
    classes: tuple  # ((name, frozenset(members)), ...) in class order

    def __post_init__(self):
        seen = {}
        for name, members in self.classes:
            for v in members:
                if v in seen:
                    raise MappingError(f"constant {v} is in classes {seen[v]!r} and {name!r}")
                if v not in self.domain:
                    raise MappingError(f"class {name!r} contains {v}, which is not in the sort")
                seen[v] = name
            if not members:
                raise MappingError(f"class {name!r} is empty")
        missing = [v for v in self.domain if v not in seen]
        if missing:
            raise MappingError(f"constant {missing[0]} is in no class")
        names = [n for n, _ in self.classes]
        if len(set(names)) != len(names):
            raise MappingError("duplicate abstract name")
        object.__setattr__(self, "_of", seen)
        object.__setattr__(self, "_members", dict(self.classes))
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})
        if not self.is_convex():
            log.warning("classes %s are not order-convex; abstraction stays sound but loses precision", names)

    @property
    def names(self) -> tuple:
        return tuple(n for n, _ in self.classes)

    @property
    def index(self) -> dict:
        return self._index

    def of(self, value):
        try:
            return self._of[value]
        except KeyError:
            raise MappingError(f"constant {value} is not in the mapped domain") from None

    def members(self, name) -> tuple:
        """Members of class ``name`` in domain order."""
        ms = self._members[name]
        return tuple(v for v in self.domain if v in ms)

    def is_identity(self) -> bool:
        """Singleton classes named after their member, in domain order."""
        return self.is_bijective() and tuple(n for n, _ in self.classes) == tuple(self.domain)

    def is_bijective(self) -> bool:
        return all(len(m) == 1 for _, m in self.classes)

    def is_convex(self) -> bool:
        pos = {v: i for i, v in enumerate(self.domain)}
        last = -1
        for _, members in self.classes:
            idx = sorted(pos[v] for v in members)
            if idx[0] <= last or idx[-1] - idx[0] + 1 != len(idx):
                return False
            last = idx[-1]
        return True


@dataclass(frozen=True)
class DomainMapping:
    per_sort: dict = field(default_factory=dict)
    omitted: frozenset = frozenset()

    # construction helpers -------------------------------------------------

    @classmethod
    def identity(cls, omitted: Iterable = ()) -> "DomainMapping":
        return cls({}, frozenset(omitted))

    @classmethod
    def from_classes(cls, sort: str, domain, classes, omitted: Iterable = ()) -> "DomainMapping":
        """``classes`` is an ordered list of (name, members) pairs for one sort."""
        sm = SortMapping(tuple(domain), tuple((n, frozenset(m)) for n, m in classes))
        return cls({sort: sm}, frozenset(omitted))

    @classmethod
    def intervals(cls, sort: str, domain, cuts, names=None, omitted: Iterable = ()) -> "DomainMapping":
        """Split an ordered domain at the given positions into consecutive classes."""
        domain = tuple(domain)
        bounds = [0] + sorted(cuts) + [len(domain)]
        parts = [domain[a:b] for a, b in zip(bounds, bounds[1:]) if b > a]
        names = names or [f"c{i + 1}" for i in range(len(parts))]
        return cls.from_classes(sort, domain, list(zip(names, parts)), omitted)

    def with_omitted(self, omitted: Iterable) -> "DomainMapping":
        return DomainMapping(self.per_sort, frozenset(omitted))

    def domain_part(self) -> "DomainMapping":
        return DomainMapping(self.per_sort, frozenset())

    # queries --------------------------------------------------------------

    def sort_mapping(self, sort: str) -> Optional[SortMapping]:
        return self.per_sort.get(sort)

    def is_exact(self, sort: str) -> bool:
        """True when constants of ``sort`` keep their identity (singleton classes only)."""
        sm = self.per_sort.get(sort)
        return sm is None or sm.is_identity()

    def has_domain_abstraction(self) -> bool:
        return any(not sm.is_identity() or tuple(sm.names) != tuple(sm.domain) for sm in self.per_sort.values())

    def map_value(self, sort: str, value):
        sm = self.per_sort.get(sort)
        return value if sm is None else sm.of(value)

    def members(self, sort: str, name) -> tuple:
        sm = self.per_sort.get(sort)
        return (name,) if sm is None else sm.members(name)

    def abstract_sorts(self, sorts: dict) -> dict:
        out = {}
        for name, values in sorts.items():
            sm = self.per_sort.get(name)
            out[name] = tuple(values) if sm is None else sm.names
        return out

    def check_program(self, p: Program) -> None:
        for srt, sm in self.per_sort.items():
            if srt == TIME_SORT:
                raise MappingError("the time sort is never abstracted")
            if srt not in p.sorts:
                raise MappingError(f"mapping abstracts sort {srt!r}, which the program does not declare")
            if set(sm.domain) != set(p.sorts[srt]):
                raise MappingError(f"mapping domain of sort {srt!r} differs from the program's declaration")
        preds = p.predicates() | set(p.signature)
        for key in self.omitted:
            if key not in preds:
                raise MappingError(f"omitted predicate {key[0]}/{key[1]} does not occur in the program")

    # application ------------------------------------------------------------

    def apply_atom(self, a: Atom, signature: Optional[dict] = None) -> Optional[Atom]:
        """Abstract a ground atom; ``None`` when its predicate is omitted."""
        if a.key in self.omitted:
            return None
        sorts = signature.get(a.key) if signature else None
        args = []
        for i, t in enumerate(a.args):
            if not isinstance(t, Const):
                raise MappingError(f"atom {a} is not ground")
            if sorts is not None:
                args.append(Const(self.map_value(sorts[i], t.value)))
                continue
            owners = [s for s, sm in self.per_sort.items() if t.value in sm.domain]
            if len(owners) > 1:
                raise MappingError(f"constant {t.value} of {a} is ambiguous between sorts {owners}")
            args.append(Const(self.per_sort[owners[0]].of(t.value)) if owners else t)
        return Atom(a.pred, tuple(args))

    def apply(self, interp: Iterable[Atom], signature: Optional[dict] = None) -> frozenset:
        out = set()
        for a in interp:
            m = self.apply_atom(a, signature)
            if m is not None:
                out.add(m)
        return frozenset(out)

    def refines(self, other: "DomainMapping") -> bool:
        """True if ``self`` is at least as fine as ``other``."""
        if not self.omitted <= other.omitted:
            return False
        for srt, sm in self.per_sort.items():
            osm = other.per_sort.get(srt)
            if osm is None:
                if not sm.is_bijective():
                    return False
                continue
            for _, members in sm.classes:
                if len({osm.of(v) for v in members}) != 1:
                    return False
        return True


def apply_atom_mapping(a: Atom, m: DomainMapping, signature: Optional[dict] = None) -> Optional[Atom]:
    return m.apply_atom(a, signature)


def apply_interpretation_mapping(interp, m: DomainMapping, signature: Optional[dict] = None) -> frozenset:
    return m.apply(interp, signature)


# ---------------------------------------------------------------------------
# relation typing


def lifted_relation_holds(op: str, a, b, sm: Optional[SortMapping]) -> bool:
    """Truth of ``a op b`` on abstract classes: identity for =/!=, class order otherwise."""
    if sm is not None:
        for v in (a, b):
            if v not in sm.index:
                raise MappingError(f"{v} is not an abstract constant of this sort")
        return compare(op, a, b, sm.index)
    return compare(op, a, b)


def case_of(lifted: bool, all_true: bool, any_true: bool) -> str:
    if lifted:
        return "I" if all_true else "III"
    return "IV" if any_true else "II"


def classify_relation(op: str, pair, sm: Optional[SortMapping], domain_index: Optional[dict] = None) -> str:
    """Case I-IV of ``op`` on an abstract pair, by brute force over class members."""
    a, b = pair
    lifted = lifted_relation_holds(op, a, b, sm)
    xs = sm.members(a) if sm else (a,)
    ys = sm.members(b) if sm else (b,)
    if domain_index is None and sm is not None:
        domain_index = {v: i for i, v in enumerate(sm.domain)}
    results = [compare(op, x, y, domain_index) for x in xs for y in ys]
    return case_of(lifted, all(results), any(results))


def type_predicate(op: str, case: str) -> str:
    return f"type_{OP_NAMES[op]}_{case}"


def build_type_facts(m: DomainMapping, rels_used: Iterable, sorts: Optional[dict] = None) -> Program:
    """Facts ``type_<rel>_<case>(d1, d2)`` for every abstract pair of each (op, sort) used."""
    rules = []
    for op, srt in sorted(set(rels_used)):
        if op not in OPS:
            raise MappingError(f"unsupported relation {op!r}")
        sm = m.sort_mapping(srt)
        if sm is None:
            if sorts is None or srt not in sorts:
                raise MappingError(f"sort {srt!r} is unknown")
            names = tuple(sorts[srt])
            idx = {v: i for i, v in enumerate(names)}
            pairs = [(a, b, case_of(compare(op, a, b, idx), compare(op, a, b, idx), compare(op, a, b, idx)))
                     for a in names for b in names]
        else:
            pairs = [(a, b, classify_relation(op, (a, b), sm)) for a in sm.names for b in sm.names]
        for a, b, case in pairs:
            rules.append(Rule(Atom(type_predicate(op, case), (Const(a), Const(b)))))
    abstract = m.abstract_sorts(sorts) if sorts else {s: sm.names for s, sm in m.per_sort.items()}
    return make_program(rules, abstract) if rules else make_program([], abstract)


# ---------------------------------------------------------------------------
# composite relations (conjunctions of comparisons over several variables)


@dataclass(frozen=True)
class CompositeRelation:
    """Conjunction of comparisons, viewed as one relation over its distinct variables."""

    relations: tuple  # normalized Relation objects
    variables: tuple  # distinct variable names in first-occurrence order
    var_sorts: tuple  # sort per variable

    @classmethod
    def of(cls, gamma: Iterable[Relation], var_sorts: dict) -> "CompositeRelation":
        rels = tuple(g.normalized() for g in gamma)
        names = []
        for g in rels:
            for v in g.vars():
                if v not in names:
                    names.append(v)
        return cls(rels, tuple(names), tuple(var_sorts[v] for v in names))

    def evaluate(self, env: dict, index_for) -> bool:
        for g in self.relations:
            a = _term_value(g.lhs, env)
            b = _term_value(g.rhs, env)
            srt = _relation_sort(g, self)
            if not compare(g.op, a, b, index_for(srt)):
                return False
        return True


def _term_value(t, env):
    if isinstance(t, Const):
        return t.value
    if hasattr(t, "offset"):
        return env[t.var.name] + t.offset
    return env[t.name]


def _relation_sort(g: Relation, comp: CompositeRelation):
    for v in g.vars():
        return comp.var_sorts[comp.variables.index(v)]
    return None


class CompositeTyping:
    """Case analysis of a composite relation under a mapping.

    For an abstract assignment ``nu`` of classes to the composite's variables
    the lifted truth uses class identity/order, and the concrete quantifiers
    range over every concretization (constants in the relation stay fixed).
    ``certain`` additionally separates variables the rule binds through
    positive atoms (adversarial) from free ones (existentially chosen).
    """

    def __init__(self, comp: CompositeRelation, m: DomainMapping, sorts: dict, bound_vars: Iterable[str] = ()):
        self.comp = comp
        self.m = m
        self.sorts = sorts
        self.bound = tuple(v for v in comp.variables if v in set(bound_vars))
        self._cache = {}

    def abstract_domain(self, var: str) -> tuple:
        srt = self.comp.var_sorts[self.comp.variables.index(var)]
        sm = self.m.sort_mapping(srt)
        return sm.names if sm else tuple(self.sorts[srt])

    def assignments(self):
        doms = [self.abstract_domain(v) for v in self.comp.variables]
        for combo in itertools.product(*doms):
            yield dict(zip(self.comp.variables, combo))

    def _abstract_index(self, srt):
        sm = self.m.sort_mapping(srt)
        if sm is not None:
            return sm.index
        return {v: i for i, v in enumerate(self.sorts.get(srt, ()))}

    def _concrete_index(self, srt):
        return {v: i for i, v in enumerate(self.sorts.get(srt, ()))}

    def _lift_env(self, env):
        return env

    def lifted(self, nu: dict) -> bool:
        comp = self.comp
        for g in comp.relations:
            srt = _relation_sort(g, comp)
            a = _abstract_term(g.lhs, nu, self.m, srt)
            b = _abstract_term(g.rhs, nu, self.m, srt)
            if not compare(g.op, a, b, self._abstract_index(srt)):
                return False
        return True

    def _concretizations(self, nu: dict, names):
        doms = []
        for v in names:
            srt = self.comp.var_sorts[self.comp.variables.index(v)]
            doms.append(self.m.members(srt, nu[v]))
        for combo in itertools.product(*doms):
            yield dict(zip(names, combo))

    def analyse(self, nu: dict) -> tuple:
        """Return (case, certain) for abstract assignment ``nu``."""
        key = tuple(nu[v] for v in self.comp.variables)
        if key in self._cache:
            return self._cache[key]
        comp = self.comp
        evaluate = lambda env: comp.evaluate(env, self._concrete_index)
        results = [evaluate(env) for env in self._concretizations(nu, comp.variables)]
        case = case_of(self.lifted(nu), all(results), any(results))
        free = [v for v in comp.variables if v not in self.bound]
        if case == "I":
            certain = True
        elif case == "II":
            certain = False
        else:
            certain = True
            for fixed in self._concretizations(nu, self.bound):
                if not any(evaluate({**fixed, **env}) for env in self._concretizations(nu, free)):
                    certain = False
                    break
        self._cache[key] = (case, certain)
        return case, certain


def _abstract_term(t, nu, m: DomainMapping, srt):
    if isinstance(t, Const):
        return m.map_value(srt, t.value) if srt is not None else t.value
    if hasattr(t, "offset"):
        return nu[t.var.name] + t.offset
    return nu[t.name]


def classify_composite(gamma, var_sorts: dict, nu: dict, m: DomainMapping, sorts: dict) -> str:
    comp = CompositeRelation.of(gamma, var_sorts)
    return CompositeTyping(comp, m, sorts).analyse(nu)[0]


__all__ = ["CASES", "DomainMapping", "SortMapping", "CompositeRelation", "CompositeTyping", "NEGATED_OP",
           "apply_atom_mapping", "apply_interpretation_mapping", "build_type_facts", "classify_composite",
           "classify_relation", "compare", "lifted_relation_holds", "type_predicate"]

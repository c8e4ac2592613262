"""Syntax and semantic domain types for the supported ASP fragment.

Terms are function-free: variables, constants (symbols or integers) and
successor terms ``T+k`` over the ``time`` sort.  A rule has an atom head,
a 0/1-bounded choice head, or no head (a constraint), a positive body, a
negative body and a list of built-in comparisons (``gamma``).

Domain literals ``dom(X)`` / ``dom_<sort>(X)`` are kept in the positive body
but are built-ins: they hold for every constant of the variable's sort and
never become atoms of an interpretation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

from .errors import SortError

TIME_SORT = "time"
RESERVED_PREFIXES = ("aux_", "type_")

OPS = ("=", "!=", "<", "<=", ">", ">=")
OP_NAMES = {"=": "eq", "!=": "neq", "<": "lt", "<=": "leq", ">": "gt", ">=": "geq"}
NEGATED_OP = {"=": "!=", "!=": "=", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, eq=False)
class Const:
    value: Union[int, str]

    def __eq__(self, other):
        return self is other or (type(other) is Const and self.value == other.value
                                 and type(self.value) is type(other.value))

    def __hash__(self):
        return hash(("c", self.value))

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Arith:
    """Successor-style term ``var + offset``; only allowed on the time sort."""

    var: Var
    offset: int

    def __str__(self):
        if self.offset >= 0:
            return f"{self.var}+{self.offset}"
        return f"{self.var}-{-self.offset}"


Term = Union[Var, Const, Arith]


def term_vars(t: Term) -> Iterator[str]:
    if isinstance(t, Var):
        yield t.name
    elif isinstance(t, Arith):
        yield t.var.name


def const_key(value):
    """Total order on constant values: integers first, then symbols."""
    return (0, value, "") if isinstance(value, int) else (1, 0, value)


@dataclass(frozen=True, eq=False)
class Atom:
    pred: str
    args: tuple = ()

    def __eq__(self, other):
        if self is other:
            return True
        return type(other) is Atom and self.pred == other.pred and self.args == other.args

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.pred, self.args))
            object.__setattr__(self, "_hash", h)
        return h

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def key(self) -> tuple:
        return (self.pred, len(self.args))

    def is_ground(self) -> bool:
        return all(isinstance(a, Const) for a in self.args)

    def vars(self) -> Iterator[str]:
        for a in self.args:
            yield from term_vars(a)

    def values(self) -> tuple:
        return tuple(a.value for a in self.args)

    def sort_key(self):
        k = self.__dict__.get("_skey")
        if k is None:
            k = (self.pred, len(self.args), tuple(const_key(a.value) if isinstance(a, Const) else (2, 0, str(a))
                                                  for a in self.args))
            object.__setattr__(self, "_skey", k)
        return k

    def __str__(self):
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(str(a) for a in self.args)})"


def atom(pred: str, *values) -> Atom:
    """Convenience constructor for ground atoms: ``atom("a", 1, 2)``."""
    return Atom(pred, tuple(v if isinstance(v, (Var, Const, Arith)) else Const(v) for v in values))


def is_dom_literal(a: Atom) -> bool:
    return a.arity == 1 and (a.pred == "dom" or a.pred.startswith("dom_"))


def dom_sort(a: Atom) -> Optional[str]:
    return a.pred[4:] if a.pred.startswith("dom_") else None


@dataclass(frozen=True)
class Relation:
    """Built-in comparison ``lhs op rhs``; ``negated`` flips its truth value."""

    op: str
    lhs: Term
    rhs: Term
    negated: bool = False

    def vars(self) -> Iterator[str]:
        yield from term_vars(self.lhs)
        yield from term_vars(self.rhs)

    def normalized(self) -> "Relation":
        if self.negated:
            return Relation(NEGATED_OP[self.op], self.lhs, self.rhs)
        return self

    def __str__(self):
        text = f"{self.lhs} {self.op} {self.rhs}"
        return f"not {text}" if self.negated else text


@dataclass(frozen=True)
class ChoiceElement:
    atom: Atom
    condition: tuple = ()

    def __str__(self):
        if not self.condition:
            return str(self.atom)
        return f"{self.atom} : {', '.join(str(c) for c in self.condition)}"


@dataclass(frozen=True)
class Choice:
    """Cardinality head ``lower { elements } upper``; ``upper`` None means unbounded."""

    lower: int
    upper: Optional[int]
    elements: tuple

    def __post_init__(self):
        if self.lower not in (0, 1) or self.upper not in (None, 1):
            raise ValueError("choice bounds are restricted to 0/1 lower and 1/unbounded upper")

    def __str__(self):
        inner = "; ".join(str(e) for e in self.elements)
        up = "" if self.upper is None else f" {self.upper}"
        return f"{self.lower} {{ {inner} }}{up}"


Head = Union[Atom, Choice, None]


@dataclass(frozen=True)
class Rule:
    head: Head = None
    pos: tuple = ()
    neg: tuple = ()
    gamma: tuple = ()

    @property
    def is_constraint(self) -> bool:
        return self.head is None

    @property
    def is_fact(self) -> bool:
        return isinstance(self.head, Atom) and not self.pos and not self.neg and not self.gamma

    @property
    def is_choice(self) -> bool:
        return isinstance(self.head, Choice)

    def head_atoms(self) -> list:
        if isinstance(self.head, Atom):
            return [self.head]
        if isinstance(self.head, Choice):
            return [e.atom for e in self.head.elements]
        return []

    def atoms(self) -> Iterator[Atom]:
        """Every atom occurrence except domain literals."""
        yield from self.head_atoms()
        if isinstance(self.head, Choice):
            for e in self.head.elements:
                yield from (c for c in e.condition if not is_dom_literal(c))
        yield from (a for a in self.pos if not is_dom_literal(a))
        yield from self.neg

    def vars(self) -> set:
        out = set()
        for a in self.head_atoms():
            out.update(a.vars())
        if isinstance(self.head, Choice):
            for e in self.head.elements:
                for c in e.condition:
                    out.update(c.vars())
        for a in self.pos + self.neg:
            out.update(a.vars())
        for g in self.gamma:
            out.update(g.vars())
        return out

    def body_text(self) -> str:
        parts = [str(a) for a in self.pos] + [f"not {a}" for a in self.neg] + [str(g) for g in self.gamma]
        return ", ".join(parts)

    def __str__(self):
        body = self.body_text()
        if self.head is None:
            return f":- {body}."
        if not body:
            return f"{self.head}."
        return f"{self.head} :- {body}."


Interpretation = frozenset


@dataclass(frozen=True)
class Program:
    """Rules plus sort declarations (ordered constant lists) and predicate signatures.

    Use :func:`make_program` to build one; it infers missing signatures.
    """

    rules: tuple
    sorts: dict = field(default_factory=dict)
    signature: dict = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, Program):
            return NotImplemented
        return self.rules == other.rules and self.sorts == other.sorts and self.signature == other.signature

    def __hash__(self):
        return hash(self.rules)

    def predicates(self) -> set:
        return {a.key for r in self.rules for a in r.atoms()}

    def with_rules(self, rules: Iterable[Rule], sorts=None, signature=None) -> "Program":
        return make_program(rules, self.sorts if sorts is None else sorts,
                            self.signature if signature is None else signature)

    def add_facts(self, facts: Iterable[Atom]) -> "Program":
        facts = list(facts)
        if self._facts_fit(facts):
            return Program(self.rules + tuple(Rule(f) for f in facts), self.sorts, self.signature)
        return self.with_rules(list(self.rules) + [Rule(f) for f in facts])

    def _facts_fit(self, facts) -> bool:
        """True if the facts need no signature inference (known predicates, in-sort constants)."""
        members = self.__dict__.get("_members")
        if members is None:
            members = {k: set(v) for k, v in self.sorts.items()}
            object.__setattr__(self, "_members", members)
        for f in facts:
            srts = self.signature.get(f.key)
            if srts is None or not f.is_ground():
                return False
            for t, srt in zip(f.args, srts):
                if t.value not in members.get(srt, ()):
                    return False
        return True

    def var_sorts(self, rule: Rule) -> dict:
        cache = self.__dict__.get("_vs_cache")
        if cache is None:
            cache = {}
            object.__setattr__(self, "_vs_cache", cache)
        hit = cache.get(rule)
        if hit is None:
            hit = cache[rule] = rule_var_sorts(rule, self.signature, self.sorts)
        return dict(hit)

    def __str__(self):
        from .parser import print_program
        return print_program(self)


# ---------------------------------------------------------------------------
# sort inference


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def _sort_candidates(values, sorts):
    return [s for s, dom in sorts.items() if all(v in dom for v in values)]


def _collect(rules, uf, fixed, consts, rule_tag):
    """Feed rule occurrences into the union-find; ``rule_tag`` scopes variables."""

    def assign(node, srt):
        fixed.setdefault(node, set()).add(srt)

    def term(node, t, tag):
        uf.find(node)
        if isinstance(t, Var):
            uf.union(node, ("var", tag, t.name))
        elif isinstance(t, Arith):
            uf.union(node, ("var", tag, t.var.name))
            assign(node, TIME_SORT)
        else:
            consts.setdefault(node, set()).add(t.value)

    for ri, r in enumerate(rules):
        tag = rule_tag(ri)
        body_like = list(r.pos) + list(r.neg) + r.head_atoms()
        if isinstance(r.head, Choice):
            for e in r.head.elements:
                body_like.extend(e.condition)
        for a in body_like:
            if is_dom_literal(a):
                t = a.args[0]
                node = ("dom", tag, id(a), str(t))
                term(node, t, tag)
                s = dom_sort(a)
                if s is not None:
                    assign(node, s)
                continue
            for i, t in enumerate(a.args):
                term(("arg", a.key, i), t, tag)
        for gi, g in enumerate(r.gamma):
            node = ("rel", tag, gi)
            term(node, g.lhs, tag)
            term(node, g.rhs, tag)


def _resolve(uf, fixed, consts, sorts):
    groups = {}
    for node in list(uf.parent):
        groups.setdefault(uf.find(node), []).append(node)
    result = {}
    for root, nodes in groups.items():
        assigned = set()
        values = set()
        for n in nodes:
            assigned |= fixed.get(n, set())
            values |= consts.get(n, set())
        if len(assigned) > 1:
            raise SortError(f"conflicting sorts {sorted(assigned)} for {_describe(nodes)}")
        if assigned:
            srt = assigned.pop()
            if srt not in sorts:
                raise SortError(f"undeclared sort {srt!r}")
            bad = [v for v in values if v not in sorts[srt]]
            if bad:
                raise SortError(f"constant {bad[0]} is not in sort {srt!r}")
        else:
            cands = _sort_candidates(values, sorts)
            if len(cands) > 1 and values:
                non_time = [c for c in cands if c != TIME_SORT]
                cands = non_time if len(non_time) == 1 else cands
            if not values:
                non_time = [s for s in sorts if s != TIME_SORT]
                cands = non_time if len(non_time) == 1 else cands if len(sorts) == 1 else []
            if len(cands) != 1:
                if values and not cands:
                    raise SortError(f"constant {sorted(values, key=const_key)[0]} belongs to no declared sort")
                raise SortError(f"cannot determine sort of {_describe(nodes)}; add a 'pred' declaration")
            srt = cands[0]
        for n in nodes:
            result[n] = srt
    return result


def _describe(nodes):
    for n in nodes:
        if n[0] == "arg":
            (pred, arity), i = n[1], n[2]
            return f"argument {i + 1} of {pred}/{arity}"
    for n in nodes:
        if n[0] == "var":
            return f"variable {n[2]}"
    return "a term"


def infer_signature(rules, sorts: dict, declared: Optional[dict] = None) -> dict:
    """Assign a sort to every argument position of every predicate."""
    uf, fixed, consts = _UnionFind(), {}, {}
    declared = declared or {}
    for key, srts in declared.items():
        for i, s in enumerate(srts):
            node = ("arg", key, i)
            uf.find(node)
            fixed.setdefault(node, set()).add(s)
    _collect(rules, uf, fixed, consts, lambda ri: ri)
    if not uf.parent:
        return dict(declared)
    resolved = _resolve(uf, fixed, consts, sorts)
    sig = {}
    keys = set(declared) | {a.key for r in rules for a in r.atoms()}
    for key in keys:
        sig[key] = tuple(resolved[("arg", key, i)] for i in range(key[1]))
    return sig


def _direct_var_sorts(rule: Rule, signature: dict) -> Optional[dict]:
    """Fast path: every variable occurs in a signed atom or a typed domain literal."""
    out = {}
    atoms = list(rule.head_atoms()) + list(rule.pos) + list(rule.neg)
    if isinstance(rule.head, Choice):
        for e in rule.head.elements:
            atoms.extend(e.condition)
    for a in atoms:
        srt = dom_sort(a) if is_dom_literal(a) else None
        srts = signature.get(a.key)
        for i, t in enumerate(a.args):
            for v in term_vars(t):
                s = srt if srt is not None else (srts[i] if srts else None)
                if s is None:
                    continue
                if out.setdefault(v, s) != s:
                    return None
    if all(v in out for v in rule.vars()):
        return out
    return None


def rule_var_sorts(rule: Rule, signature: dict, sorts: dict) -> dict:
    """Sorts of the variables of ``rule`` given a program signature."""
    if not rule.vars():
        return {}
    fast = _direct_var_sorts(rule, signature)
    if fast is not None:
        return fast
    uf, fixed, consts = _UnionFind(), {}, {}
    for key, srts in signature.items():
        for i, s in enumerate(srts):
            node = ("arg", key, i)
            uf.find(node)
            fixed.setdefault(node, set()).add(s)
    _collect([rule], uf, fixed, consts, lambda ri: 0)
    resolved = _resolve(uf, fixed, consts, sorts)
    return {n[2]: s for n, s in resolved.items() if n[0] == "var"}


def make_program(rules: Iterable[Rule], sorts: Optional[dict] = None, declared: Optional[dict] = None) -> Program:
    """Build a program, inferring signatures and an implicit sort when none is declared."""
    rules = tuple(rules)
    sorts = {k: tuple(v) for k, v in (sorts or {}).items()}
    for r in rules:
        for a in r.atoms():
            if a.pred.startswith(RESERVED_PREFIXES) and not _allowed_reserved(a.pred):
                raise SortError(f"predicate name {a.pred!r} uses a reserved prefix")
    if not sorts:
        values = set()
        for r in rules:
            for a in list(r.atoms()) + [x for x in r.pos if is_dom_literal(x)]:
                values.update(t.value for t in a.args if isinstance(t, Const))
            for g in r.gamma:
                values.update(t.value for t in (g.lhs, g.rhs) if isinstance(t, Const))
        if values or any(r.vars() for r in rules):
            sorts = {"u": tuple(sorted(values, key=const_key))}
    signature = infer_signature(rules, sorts, declared)
    return Program(rules, sorts, signature)


_RESERVED_OK = set()


def _allowed_reserved(pred):
    return pred in _RESERVED_OK or pred.startswith("type_")


def format_interpretation(interp: Iterable[Atom]) -> str:
    return "{" + ", ".join(str(a) for a in sorted(interp, key=Atom.sort_key)) + "}"

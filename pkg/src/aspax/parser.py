"""Parsers for ``.lp`` programs and ``.map`` abstraction files, plus the canonical printer.

Program grammar (clingo-like)::

    sort coord {1..4}.            pred rAt(coord, coord, time).
    a(X1,X2) :- c(X1), b(X2).     d(X1,X2) :- a(X1,X2), X1 <= X2.
    0 { a(X1,X2) : dom(X1) } 1 :- b(X2).
    :- goTo(X,Y,T), obsAt(X,Y,T).

Mapping grammar (statements end with ``;`` or ``.``)::

    sort s {1..3};  class d1 = {1};  class dk = {2,3};  order d1 < dk;
    omit c/1;
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .core import (OPS, TIME_SORT, Arith, Atom, Choice, ChoiceElement, Const, Program, Relation, Rule,
                   Var, const_key, is_dom_literal, make_program, term_vars)
from .errors import MappingError, ParseError, SafetyError, SortError


@dataclass(frozen=True)
class SourceProgram:
    text: str
    origin: str = "<memory>"

    @classmethod
    def from_file(cls, path) -> "SourceProgram":
        with open(path, encoding="utf-8") as fh:
            return cls(fh.read(), str(path))


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+|%[^\n]*)
  | (?P<nl>\n)
  | (?P<op>:-|\.\.|!=|<=|>=|[=<>{}();:,.+\-/])
  | (?P<int>\d+)
  | (?P<var>[A-Z_][A-Za-z0-9_']*)
  | (?P<name>[a-z][A-Za-z0-9_']*)
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text, origin):
    toks = []
    line, start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", origin, line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind != "ws":
            toks.append(_Tok(kind, m.group(), line, m.start() - start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - start + 1))
    return toks


class _Stream:
    def __init__(self, src: SourceProgram):
        self.origin = src.origin
        self.toks = _tokenize(src.text, src.origin)
        self.i = 0

    def peek(self, k=0) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text, k=0) -> bool:
        t = self.peek(k)
        return t.kind in ("op", "name") and t.text == text

    def expect(self, text) -> _Tok:
        t = self.next()
        if t.text != text or t.kind not in ("op", "name"):
            self.fail(f"expected {text!r} but found {t.text or 'end of input'!r}", t)
        return t

    def expect_kind(self, kind, what) -> _Tok:
        t = self.next()
        if t.kind != kind:
            self.fail(f"expected {what} but found {t.text or 'end of input'!r}", t)
        return t

    def fail(self, msg, tok=None, cls=ParseError):
        tok = tok or self.peek()
        raise cls(msg, self.origin, tok.line, tok.col)


# ---------------------------------------------------------------------------
# programs


def _parse_int(s: _Stream) -> int:
    neg = False
    if s.at("-"):
        s.next()
        neg = True
    v = int(s.expect_kind("int", "an integer").text)
    return -v if neg else v


def _parse_term(s: _Stream):
    t = s.peek()
    if t.kind == "var":
        s.next()
        v = Var(t.text)
        if s.at("+") or s.at("-"):
            sign = 1 if s.next().text == "+" else -1
            return Arith(v, sign * int(s.expect_kind("int", "an integer offset").text))
        return v
    if t.kind == "int" or (t.kind == "op" and t.text == "-"):
        return Const(_parse_int(s))
    if t.kind == "name":
        s.next()
        return Const(t.text)
    s.fail(f"expected a term but found {t.text!r}")


def _parse_atom(s: _Stream) -> Atom:
    name = s.expect_kind("name", "a predicate name").text
    if name == "not":
        s.fail("'not' cannot be used as a predicate name")
    args = []
    if s.at("("):
        s.next()
        args.append(_parse_term(s))
        while s.at(","):
            s.next()
            args.append(_parse_term(s))
        s.expect(")")
    return Atom(name, tuple(args))


def _is_relation_start(s: _Stream) -> bool:
    t = s.peek()
    if t.kind in ("var", "int") or (t.kind == "op" and t.text == "-"):
        return True
    if t.kind == "name":
        nxt = s.peek(1)
        return nxt.kind == "op" and nxt.text in OPS
    return False


def _parse_relation(s: _Stream, negated=False) -> Relation:
    lhs = _parse_term(s)
    op = s.next()
    if op.text not in OPS:
        s.fail(f"expected a comparison operator but found {op.text!r}", op)
    return Relation(op.text, lhs, _parse_term(s), negated)


def _parse_body(s: _Stream):
    pos, neg, gamma = [], [], []
    while True:
        if s.at("not"):
            s.next()
            if _is_relation_start(s):
                gamma.append(_parse_relation(s, negated=True))
            else:
                neg.append(_parse_atom(s))
        elif _is_relation_start(s):
            gamma.append(_parse_relation(s))
        else:
            pos.append(_parse_atom(s))
        if not s.at(","):
            return tuple(pos), tuple(neg), tuple(gamma)
        s.next()


def _parse_choice(s: _Stream) -> Choice:
    tok = s.peek()
    lower = 0
    if tok.kind == "int":
        lower = int(s.next().text)
    s.expect("{")
    elements = []
    if not s.at("}"):
        while True:
            a = _parse_atom(s)
            cond = []
            if s.at(":"):
                s.next()
                cond.append(_parse_atom(s))
                while s.at(","):
                    s.next()
                    cond.append(_parse_atom(s))
            elements.append(ChoiceElement(a, tuple(cond)))
            if not s.at(";"):
                break
            s.next()
    s.expect("}")
    upper = None
    if s.peek().kind == "int":
        upper = int(s.next().text)
    try:
        return Choice(lower, upper, tuple(elements))
    except ValueError as exc:
        s.fail(str(exc), tok)


def _parse_sort_body(s: _Stream):
    s.expect("{")
    values = []
    if s.peek().kind == "int" or s.at("-"):
        first = _parse_int(s)
        if s.at(".."):
            s.next()
            last = _parse_int(s)
            s.expect("}")
            return list(range(first, last + 1))
        values.append(first)
    elif s.peek().kind == "name":
        values.append(s.next().text)
    while s.at(","):
        s.next()
        t = s.peek()
        values.append(_parse_int(s) if t.kind == "int" or s.at("-") else s.expect_kind("name", "a constant").text)
    s.expect("}")
    return values


def _end_statement(s: _Stream, *terminators):
    if any(s.at(t) for t in terminators):
        s.next()
        return
    if s.peek().kind != "eof":
        s.fail(f"expected {' or '.join(repr(t) for t in terminators)}")


def parse_program(src, facts: Optional[str] = None) -> Program:
    """Parse program text (``SourceProgram`` or ``str``) into a :class:`Program`."""
    if isinstance(src, str):
        src = SourceProgram(src)
    s = _Stream(src)
    rules, rule_toks, sorts, declared = [], [], {}, {}
    while s.peek().kind != "eof":
        start = s.peek()
        if s.at("sort") and s.peek(1).kind == "name" and s.at("{", 2):
            s.next()
            name = s.next().text
            if name in sorts:
                s.fail(f"sort {name!r} declared twice", start)
            values = _parse_sort_body(s)
            if len(set(values)) != len(values):
                s.fail(f"sort {name!r} lists a constant twice", start)
            sorts[name] = tuple(values)
            _end_statement(s, ".", ";")
            continue
        if s.at("pred") and s.peek(1).kind == "name" and s.at("(", 2):
            s.next()
            name = s.next().text
            s.expect("(")
            srts = [s.expect_kind("name", "a sort name").text]
            while s.at(","):
                s.next()
                srts.append(s.expect_kind("name", "a sort name").text)
            s.expect(")")
            declared[(name, len(srts))] = tuple(srts)
            _end_statement(s, ".")
            continue
        rules.append(_parse_rule(s))
        rule_toks.append(start)
    for key, srts in declared.items():
        for srt in srts:
            if srt not in sorts:
                raise SortError(f"{src.origin}: undeclared sort {srt!r} in declaration of {key[0]}/{key[1]}")
    for r, tok in zip(rules, rule_toks):
        _check_safety(r, s, tok)
    if facts:
        extra = parse_program(SourceProgram(facts, "<facts>"))
        rules.extend(extra.rules)
    try:
        return make_program(rules, sorts, declared)
    except SortError as exc:
        raise SortError(f"{src.origin}: {exc}") from None


def _parse_rule(s: _Stream) -> Rule:
    head = None
    if s.at(":-"):
        pass
    elif s.at("{") or (s.peek().kind == "int" and s.at("{", 1)):
        head = _parse_choice(s)
    else:
        head = _parse_atom(s)
    pos = neg = gamma = ()
    if s.at(":-"):
        s.next()
        pos, neg, gamma = _parse_body(s)
    elif head is None:
        s.fail("expected a rule")
    s.expect(".")
    return Rule(head, pos, neg, gamma)


def rule_bound_vars(r: Rule) -> set:
    out = set()
    for a in r.pos:
        out.update(a.vars())
    return out


def unsafe_vars(r: Rule) -> list:
    """Variables of ``r`` not bound by a positive body atom or a domain literal."""
    bound = rule_bound_vars(r)
    needed = []
    for a in r.neg:
        needed.extend(a.vars())
    for g in r.gamma:
        needed.extend(g.vars())
    if isinstance(r.head, Atom):
        needed.extend(r.head.vars())
    elif isinstance(r.head, Choice):
        for e in r.head.elements:
            local = set(bound)
            for c in e.condition:
                local.update(c.vars())
            needed.extend(v for v in e.atom.vars() if v not in local)
    out = []
    for v in needed:
        if v not in bound and v not in out:
            out.append(v)
    return out


def _check_safety(r: Rule, s: _Stream, tok: _Tok):
    bad = unsafe_vars(r)
    if bad:
        s.fail(f"unsafe rule: variable {bad[0]} is not bound by a positive body atom or domain literal",
               tok, SafetyError)


# ---------------------------------------------------------------------------
# printing


def _format_sort(values) -> str:
    if values and all(isinstance(v, int) for v in values) and len(values) > 1 \
            and list(values) == list(range(values[0], values[0] + len(values))):
        return f"{{{values[0]}..{values[-1]}}}"
    return "{" + ", ".join(str(v) for v in values) + "}"


def print_program(p: Program) -> str:
    """Deterministic canonical text; ``parse_program(print_program(p)) == p``."""
    lines = [f"sort {name} {_format_sort(vals)}." for name, vals in p.sorts.items()]
    if len(p.sorts) > 1:
        for key in sorted(p.signature):
            if key[1]:
                lines.append(f"pred {key[0]}({', '.join(p.signature[key])}).")
    lines.extend(str(r) for r in p.rules)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# mapping files


def parse_mapping(src):
    """Parse a ``.map`` file into a :class:`~aspax.mapping.DomainMapping`."""
    from .mapping import DomainMapping, SortMapping

    if isinstance(src, str):
        src = SourceProgram(src)
    s = _Stream(src)
    domains, classes, orders, omitted = {}, {}, {}, set()
    current = None

    def name_or_int(what):
        t = s.peek()
        if t.kind == "int" or s.at("-"):
            return _parse_int(s)
        return s.expect_kind("name", what).text

    while s.peek().kind != "eof":
        tok = s.peek()
        kw = s.next()
        if kw.text == "sort":
            current = s.expect_kind("name", "a sort name").text
            if current == TIME_SORT:
                s.fail("the time sort is never abstracted", tok, MappingError)
            if current in domains:
                s.fail(f"sort {current!r} declared twice", tok, MappingError)
            domains[current] = tuple(_parse_sort_body(s)) if s.at("{") else None
            classes[current] = []
        elif kw.text == "class":
            if current is None:
                s.fail("class declared before any sort", tok, MappingError)
            cname = name_or_int("a class name")
            s.expect("=")
            members = _parse_sort_body(s)
            if any(c == cname for c, _ in classes[current]):
                s.fail(f"duplicate abstract name {cname!r}", tok, MappingError)
            classes[current].append((cname, tuple(members)))
        elif kw.text == "order":
            if current is None:
                s.fail("order declared before any sort", tok, MappingError)
            seq = [name_or_int("a class name")]
            while s.at("<"):
                s.next()
                seq.append(name_or_int("a class name"))
            orders[current] = seq
        elif kw.text == "omit":
            pred = s.expect_kind("name", "a predicate name").text
            s.expect("/")
            omitted.add((pred, int(s.expect_kind("int", "an arity").text)))
        else:
            s.fail(f"unknown mapping statement {kw.text!r}", kw, MappingError)
        _end_statement(s, ";", ".")
    per_sort = {}
    for srt, cls in classes.items():
        if not cls:
            continue
        if srt in orders:
            names = [c for c, _ in cls]
            if sorted(map(str, orders[srt])) != sorted(map(str, names)) or len(orders[srt]) != len(names):
                raise MappingError(f"order for sort {srt!r} must list every class exactly once")
            by_name = dict(cls)
            cls = [(c, by_name[c]) for c in orders[srt]]
        domain = domains[srt]
        if domain is None:
            domain = tuple(sorted({v for _, m in cls for v in m}, key=const_key))
        per_sort[srt] = SortMapping(domain, tuple((c, frozenset(m)) for c, m in cls))
    return DomainMapping(per_sort, frozenset(omitted))


def print_mapping(m) -> str:
    lines = []
    for srt, sm in m.per_sort.items():
        lines.append(f"sort {srt} {_format_sort(sm.domain)};")
        for name, members in sm.classes:
            ordered = [v for v in sm.domain if v in members]
            lines.append(f"class {name} = {{{', '.join(map(str, ordered))}}};")
        lines.append("order " + " < ".join(str(c) for c, _ in sm.classes) + ";")
    for pred, arity in sorted(m.omitted):
        lines.append(f"omit {pred}/{arity};")
    return "\n".join(lines) + "\n"


__all__ = ["SourceProgram", "parse_program", "parse_mapping", "print_program", "print_mapping",
           "unsafe_vars", "term_vars", "is_dom_literal"]

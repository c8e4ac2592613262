import sys

import pytest

from aspax import parse_mapping, parse_program

EX1 = """sort d {1..3}.
a(X1,X2) :- c(X1), b(X2).
d(X1,X2) :- a(X1,X2), X1 <= X2.
"""

# EX1 plus a rule with a negative body literal over the same domain
EX4 = EX1 + "e(X1) :- dom(X1), dom(X2), not a(X1,X2), X1 = X2.\n"

SPLIT_MAP = "sort d {1..3}; class d1 = {1}; class dk = {2,3}; order d1 < dk;"


@pytest.fixture
def ex1():
    return parse_program(EX1)


@pytest.fixture
def ex4():
    return parse_program(EX4)


@pytest.fixture
def split_map():
    return parse_mapping(SPLIT_MAP)


def atoms(text):
    """Parse a brace-free list of ground atoms like "a(1,2), b(2)"."""
    text = text.strip()
    if not text:
        return frozenset()
    p = parse_program(". ".join(part.strip() for part in _split(text)) + ".")
    return frozenset(r.head for r in p.rules)


def _split(text):
    depth, cur, out = 0, "", []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    out.append(cur)
    return out


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in range(1, 9):
            terminalreporter.write_line(results.get(n, f"criterion {n}: NOT RUN"))

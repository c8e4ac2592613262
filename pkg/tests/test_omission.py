import random

from aspax import DomainMapping, atom, check_coverage, parse_program, print_program, solve
from aspax.generate import GeneratorConfig, random_mapping, random_program
from aspax.omission import (CONSTRAINT_DROPPED, HEAD_CHOICED, KEPT, RULE_DROPPED, check_omission_theorem,
                            omit_literals)

from conftest import EX1, atoms

GRID_2X1 = """sort c {1..2}.
sort time {0..1}.
pred goTo(c, c, time).
pred obsAt(c, c, time).
0 { goTo(X,1,0) : dom_c(X) } 1.
obsAt(2,1,0).
:- goTo(X,Y,T), obsAt(X,Y,T).
"""


def test_example_one_rule_becomes_choice(ex1):
    res = omit_literals(ex1, {("c", 1)})
    lines = print_program(res.program).splitlines()
    assert "0 { a(X1,X2) : dom_d(X1) } :- b(X2)." in lines
    assert "d(X1,X2) :- a(X1,X2), X1 <= X2." in lines
    assert res.report == ((0, HEAD_CHOICED), (1, KEPT))
    assert res.dom_sorts == frozenset({"d"})


def test_example_one_abstract_answer_sets():
    res = omit_literals(parse_program(EX1, "b(2)."), {("c", 1)})
    found = set(solve(res.program))
    assert atoms("b(2), a(1,2), d(1,2)") in found
    assert atoms("b(2), a(2,2), d(2,2)") in found


def test_empty_omission_is_identity(ex1):
    res = omit_literals(ex1, set())
    assert res.program.rules == ex1.rules
    assert all(tag == KEPT for _, tag in res.report)


def test_constraint_dropped():
    p = parse_program(GRID_2X1)
    res = omit_literals(p, {("obsAt", 3)})
    assert (2, CONSTRAINT_DROPPED) in res.report
    assert all(r.head is not None for r in res.program.rules)
    m = DomainMapping.identity(omitted=[("obsAt", 3)])
    assert check_coverage(p, res.program, m).ok


def test_rule_with_omitted_head_is_dropped(ex1):
    res = omit_literals(ex1, {("a", 2)})
    assert (0, RULE_DROPPED) in res.report
    assert all("a(" not in str(r.head) for r in res.program.rules)


def test_vocabulary_excludes_omitted(ex1):
    res = omit_literals(ex1, {("c", 1)})
    assert ("c", 1) not in res.program.predicates()


def test_report_covers_every_rule(ex1):
    res = omit_literals(ex1, {("c", 1), ("b", 1)})
    assert [i for i, _ in res.report] == list(range(len(ex1.rules)))


def test_composition_matches_union(ex1):
    once = omit_literals(ex1, {("c", 1), ("b", 1)}).program
    twice = omit_literals(omit_literals(ex1, {("c", 1)}).program, {("b", 1)}).program
    assert set(solve(once)) == set(solve(twice))


def test_example_one_instances_covered(ex1):
    reports = check_omission_theorem(ex1, {("c", 1)}, [[atom("c", 1), atom("b", 2)], [atom("c", 2), atom("b", 2)]])
    assert all(r.ok for r in reports)


def test_shrunk_constraint_is_caught():
    # the constraint forbids a together with q; shrinking it to ":- a." also kills
    # the answer set where q is false
    p = parse_program("0 { a ; q }.\n:- a, q.\n")
    res = omit_literals(p, {("q", 0)}, shrink_constraints=True)
    m = DomainMapping.identity(omitted=[("q", 0)])
    assert not check_coverage(p, res.program, m).ok
    good = omit_literals(p, {("q", 0)})
    assert check_coverage(p, good.program, m).ok


def test_random_programs_are_covered():
    cfg = GeneratorConfig(max_domain=3)
    for seed in range(200):
        rng = random.Random(1000 + seed)
        p = random_program(rng, cfg)
        m = random_mapping(rng, p, omit_rate=0.4)
        om = DomainMapping.identity(omitted=m.omitted)
        res = omit_literals(p, m.omitted)
        assert check_coverage(p, res.program, om, with_spurious=False).ok, seed

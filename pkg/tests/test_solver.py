import random

import pytest

from aspax import Limits, ParseError, ResourceError, atom, enumerate_answer_sets, ground, is_answer_set, parse_program, solve
from aspax.generate import random_ground_program
from aspax.solver import GroundProgram, GroundRule, brute_force_answer_sets, check_cardinality

from conftest import EX1, EX4, atoms


def test_grounding_drops_false_relation_instances():
    p = parse_program("sort d {1..2}. a(1,1). a(1,2). a(2,1). a(2,2). d(X1,X2) :- a(X1,X2), X1 <= X2.")
    rules = [str(r) for r in ground(p).rules if r.pos]
    assert rules == ["d(1,1) :- a(1,1).", "d(1,2) :- a(1,2).", "d(2,2) :- a(2,2)."]


def test_ground_facts_unchanged():
    g = ground(parse_program("p. q(1). r(a,b)."))
    assert [str(r) for r in g.rules] == ["p.", "q(1).", "r(a,b)."]


def test_choice_translation():
    g = ground(parse_program("0 { a } 1 :- b. b."))
    assert [str(r) for r in g.rules] == ["b.", "a :- b, not aux_choice_0_a.", "aux_choice_0_a :- b, not a."]
    assert {str(a) for a in g.hidden} == {"aux_choice_0_a"}


def test_example_one_answer_set():
    g = ground(parse_program(EX1, "c(1). b(2)."))
    assert is_answer_set(g, atoms("c(1), b(2), a(1,2), d(1,2)"))
    assert not is_answer_set(g, atoms("c(1), b(2)"))


def test_even_loop():
    g = ground(parse_program("a :- not b. b :- not a."))
    assert is_answer_set(g, atoms("a"))
    assert sorted(map(sorted, (map(str, s) for s in solve(parse_program("a :- not b. b :- not a."))))) == [["a"], ["b"]]


def test_example_one_enumeration():
    assert solve(parse_program(EX1, "c(2). b(2).")) == [atoms("c(2), b(2), a(2,2), d(2,2)")]


def test_empty_program():
    assert solve(parse_program("")) == [frozenset()]


def test_unsatisfiable():
    assert solve(parse_program("a. :- a.")) == []


def test_negative_body_example():
    res = solve(parse_program(EX4, "c(3). b(2)."))
    assert res == [atoms("c(3), b(2), a(3,2), e(1), e(2), e(3)")]


def test_cardinality():
    g = ground(parse_program("sort d {1..2}. f(1). f(2). 1 { go(X) : f(X) } 1."))
    base = atoms("f(1), f(2)")
    assert check_cardinality(g, base | atoms("go(1)"))
    assert not check_cardinality(g, base)
    assert not check_cardinality(g, base | atoms("go(1), go(2)"))


def test_choice_bounds_enumeration():
    res = solve(parse_program("sort d {1..3}. f(1). f(2). f(3). 1 { go(X) : f(X) }."))
    sizes = sorted(len([a for a in s if a.pred == "go"]) for s in res)
    assert sizes == [1, 1, 1, 2, 2, 2, 3]


def test_other_choice_bounds_rejected():
    with pytest.raises(ParseError):
        parse_program("sort d {1..3}. f(1). 1 { go(X) : f(X) } 2.")


def test_positive_loop_is_unfounded():
    assert solve(parse_program("a :- b. b :- a.")) == [frozenset()]


def test_hidden_atoms_projected():
    for s in solve(parse_program("0 { a ; b } 1.")):
        assert all(not a.pred.startswith("aux_") for a in s)


def test_output_order_is_deterministic():
    p = parse_program(EX4 + "0 { c(X) } 1 :- dom(X). b(2).")
    assert solve(p) == solve(parse_program(EX4 + "0 { c(X) } 1 :- dom(X). b(2)."))


def test_instance_limit():
    with pytest.raises(ResourceError):
        ground(parse_program(EX1, "c(1). b(2)."), Limits(max_instances=1))


def test_answer_cap_truncates():
    g = ground(parse_program("0 { a ; b ; c }."))
    res = enumerate_answer_sets(g, limit=3)
    assert len(res.answer_sets) == 3 and res.truncated


def test_limits_from_env(monkeypatch):
    monkeypatch.setenv("ASPAX_LIMITS", "instances=50,answers=2")
    lim = Limits.from_env()
    assert (lim.max_instances, lim.max_answer_sets) == (50, 2)
    assert Limits.from_env(max_instances=7).max_instances == 7
    with pytest.raises(ValueError):
        Limits.from_env(max_nodes=0)


def test_brute_force_bound():
    g = GroundProgram((), tuple(atom(f"x{i}") for i in range(30)))
    with pytest.raises(ResourceError):
        brute_force_answer_sets(g)


@pytest.mark.parametrize("seed", range(40))
def test_random_ground_programs_match_brute_force(seed):
    rng = random.Random(seed)
    g = random_ground_program(rng, n_atoms=rng.randint(3, 10), n_rules=rng.randint(3, 14))
    fast = sorted(enumerate_answer_sets(g).answer_sets, key=lambda s: sorted(map(str, s)))
    slow = sorted(brute_force_answer_sets(g), key=lambda s: sorted(map(str, s)))
    assert fast == slow


def test_constraint_rule_text():
    assert str(GroundRule(None, (atom("a"),), (atom("b"),))) == ":- a, not b."

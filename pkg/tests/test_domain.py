import itertools
import random

import pytest

from aspax import DomainMapping, abstract_program, atom, check_coverage, parse_mapping, parse_program, print_program, solve
from aspax.domain import STEP_GUESS, STEP_RELAX, abstract_domain, check_domain_theorem, standardize_apart

from conftest import EX4, SPLIT_MAP, atoms

PAIR = "sort coord {1..4}. pred r(coord, coord). pred p(coord, coord).\nc :- r(X,Y), p(X,Y).\n"
QUADRANT = "sort coord {1..4}; class 1 = {1,2}; class 2 = {3,4};"

EX4_ABSTRACT = """sort d {d1, dk}.
a(X1,X2) :- c(X1), b(X2).
d(d1,d1) :- a(d1,d1).
d(d1,dk) :- a(d1,dk).
0 { d(dk,dk) } 1 :- a(dk,dk).
e(d1) :- not a(d1,d1).
e(dk) :- not a(dk,dk).
0 { e(dk) } 1.
"""


def _std(src, m):
    p = parse_program(src)
    r = p.rules[-1]
    return standardize_apart(r, p.var_sorts(r), p.signature, m)


def test_standardize_shared_variables():
    st = _std(PAIR, parse_mapping(QUADRANT))
    assert str(st.rule) == "c :- r(X,Y), p(X_1,Y_1), X = X_1, Y = Y_1."
    assert st.fresh == ("X_1", "Y_1")


def test_standardize_already_apart(split_map):
    st = _std("sort d {1..3}. d(X1,X2) :- a(X1,X2), X1 <= X2.", split_map)
    assert str(st.rule) == "d(X1,X2) :- a(X1,X2), X1 <= X2."
    assert st.fresh == ()
    assert [str(g) for g in st.abstract_gamma] == ["X1 <= X2"]


def test_standardize_ground_rule_exact_sort():
    st = _std("sort d {1..3}. d(1,2) :- a(1,2).", DomainMapping.identity())
    assert str(st.rule) == "d(1,2) :- a(1,2)."
    assert st.fresh == ()


def test_ground_rule_over_abstracted_sort(split_map):
    # a(d1,dk) may come from a(1,3) alone, so d(d1,dk) can only be guessed
    p = parse_program("sort d {1..3}. d(1,2) :- a(1,2).")
    st = _std("sort d {1..3}. d(1,2) :- a(1,2).", split_map)
    assert st.fresh == ("C_1", "C_2")
    text = print_program(abstract_program(p, split_map).program)
    assert "0 { d(d1,dk) } 1 :- a(d1,dk)." in text
    for facts in (["a(1,3)."], ["a(1,2)."], ["a(1,2). a(1,3)."]):
        q = parse_program("sort d {1..3}. d(1,2) :- a(1,2).", facts[0])
        assert check_coverage(q, abstract_program(q, split_map).program, split_map).ok


def test_example_four_program(ex4, split_map):
    assert print_program(abstract_program(ex4, split_map).program) == EX4_ABSTRACT


def test_example_four_steps(ex4, split_map):
    steps = abstract_program(ex4, split_map).steps()
    assert steps[0] == ["0a"]
    assert steps[1] == ["1a", "1a", "1b"]
    assert steps[2] == ["1a", "2a'", "2b'"]


def test_example_four_answer_set(split_map):
    p = parse_program(EX4, "c(3). b(2).")
    found = solve(abstract_program(p, split_map).program)
    assert atoms("a(dk,dk), e(d1), e(dk), c(dk), b(dk)") in found


@pytest.mark.parametrize("facts", [[atom("c", 3), atom("b", 2)], [atom("c", 2), atom("b", 3)]])
def test_example_four_coverage(ex4, split_map, facts):
    (report,) = check_domain_theorem(ex4, split_map, [facts])
    assert report.ok


def test_example_four_image(split_map):
    p = parse_program(EX4, "c(2). b(3).")
    (I,) = solve(p)
    assert I == atoms("c(2), b(3), a(2,3), d(2,3), e(1), e(2), e(3)")
    assert split_map.apply(I, p.signature) in solve(abstract_program(p, split_map).program)


def test_dropping_guesses_breaks_coverage(split_map):
    guess_steps = set(STEP_GUESS.values()) | set(STEP_RELAX.values())
    p = parse_program(EX4, "c(3). b(2).")
    res = abstract_program(p, split_map)
    kept = [e.rule for e in res.emitted if e.step not in guess_steps]
    assert len(kept) < len(res.emitted)
    assert not check_coverage(p, res.program.with_rules(kept), split_map).ok


@pytest.mark.parametrize("facts", ["c(3). b(2).", "c(2). b(3).", "c(1). b(2).", "c(3). c(1). b(3)."])
def test_symbolic_and_evaluated_agree(split_map, facts):
    p = parse_program(EX4, facts)
    evaluated = set(solve(abstract_program(p, split_map).program))
    symbolic = set(solve(abstract_program(p, split_map, symbolic=True).program))
    assert evaluated == symbolic


def test_symbolic_type_facts(ex4, split_map):
    text = print_program(abstract_program(ex4, split_map, symbolic=True).program)
    assert "d(X1,X2) :- a(X1,X2), type_leq_I(X1,X2)." in text
    assert "type_leq_III(dk,dk)." in text


def test_identity_mapping_single_lift():
    m = parse_mapping("sort coord {1..4}; class 1 = {1}; class 2 = {2}; class 3 = {3}; class 4 = {4};")
    res = abstract_program(parse_program(PAIR), m)
    assert [e.step for e in res.emitted] == ["0a"]


def _all_fact_sets(preds, values, k):
    cells = [(pr, v) for pr in preds for v in values]
    rng = random.Random(7)
    for _ in range(k):
        yield [atom(pr, *v) for pr, v in rng.sample(cells, rng.randint(0, 4))]


def test_quadrant_pair_rule_coverage():
    m = parse_mapping(QUADRANT)
    p = parse_program(PAIR)
    cells = list(itertools.product(range(1, 5), repeat=2))
    for facts in _all_fact_sets(["r", "p"], cells, 40):
        (report,) = check_domain_theorem(p, m, [facts])
        assert report.ok, facts


def test_two_negatives_coverage():
    src = "sort d {1..3}.\nh(X) :- q(X), not p(X), not r(X,Y), dom(Y), X < Y.\n"
    m = parse_mapping("sort d {1..3}; class lo = {1}; class hi = {2,3};")
    p = parse_program(src)
    rng = random.Random(3)
    for _ in range(60):
        facts = [atom("q", v) for v in (1, 2, 3) if rng.random() < 0.6]
        facts += [atom("p", v) for v in (1, 2, 3) if rng.random() < 0.3]
        facts += [atom("r", a, b) for a in (1, 2, 3) for b in (1, 2, 3) if rng.random() < 0.3]
        (report,) = check_domain_theorem(p, m, [facts])
        assert report.ok, facts


def test_constraints_only_get_structural_rules(split_map):
    p = parse_program("sort d {1..3}. :- a(X,Y), X < Y.")
    res = abstract_program(p, split_map)
    assert all(e.rule.head is None for e in res.emitted)
    assert all(e.step not in set(STEP_GUESS.values()) for e in res.emitted)


def test_omission_then_domain(split_map):
    m = split_map.with_omitted([("c", 1)])
    p = parse_program(EX4, "c(3). b(2).")
    res = abstract_program(p, m)
    assert res.omission is not None
    assert ("c", 1) not in res.program.predicates()
    assert check_coverage(p, res.program, m).ok


def test_shift_variant_still_available(ex4, split_map):
    text = print_program(abstract_domain(ex4, split_map, shift=True).program)
    assert "0 { e(dk) } 1 :- a(dk,dk)." in text

import json

from aspax import DomainMapping, abstract_program, check_coverage, omit_literals, parse_program, spurious_witness, solve

from conftest import EX1, EX4, atoms


def _ex1_pair():
    p = parse_program(EX1, "c(1). b(2).")
    m = DomainMapping.identity(omitted=[("c", 1)])
    return p, omit_literals(p, m.omitted).program, m


def test_example_one_covered():
    p, a, m = _ex1_pair()
    rep = check_coverage(p, a, m)
    assert rep.ok and rep.concrete_count == 1
    assert rep.covered == [atoms("c(1), b(2), a(1,2), d(1,2)")]
    assert atoms("b(2), a(1,2), d(1,2)") in solve(a)
    assert atoms("b(2), a(2,2), d(2,2)") in solve(a)


def test_spurious_lists_uncovered_abstract_sets():
    p, a, m = _ex1_pair()
    rep = check_coverage(p, a, m)
    assert atoms("b(2), a(2,2), d(2,2)") in rep.spurious
    assert atoms("b(2), a(1,2), d(1,2)") not in rep.spurious
    assert rep.abstract_count == 8
    assert len(rep.spurious) == rep.abstract_count - 1


def test_example_four_covered(split_map):
    for facts in ("c(3). b(2).", "c(2). b(3)."):
        p = parse_program(EX4, facts)
        assert check_coverage(p, abstract_program(p, split_map).program, split_map).ok


def test_text_and_json_reports():
    p, a, m = _ex1_pair()
    rep = check_coverage(p, a, m)
    text = rep.to_text()
    assert "uncovered: 0" in text.splitlines()
    doc = json.loads(rep.to_json())
    assert doc["uncovered"] == [] and doc["concreteCount"] == 1
    assert "timings" not in doc
    assert "timings" in json.loads(rep.to_json(timings=True))


def test_reports_are_deterministic():
    p, a, m = _ex1_pair()
    assert check_coverage(p, a, m).to_json() == check_coverage(p, a, m).to_json()


def test_uncovered_partition():
    p = parse_program("0 { a ; q }.\n:- a, q.\n")
    m = DomainMapping.identity(omitted=[("q", 0)])
    bad = omit_literals(p, m.omitted, shrink_constraints=True).program
    rep = check_coverage(p, bad, m)
    assert len(rep.covered) + len(rep.uncovered) == rep.concrete_count
    assert [img for _, img in rep.uncovered] == [atoms("a")]
    assert "uncovered: 1" in rep.to_text()


def test_witness_for_example_four(split_map):
    p = parse_program(EX4, "c(3). b(2).")
    target = atoms("a(dk,dk), e(d1), e(dk), c(dk), b(dk)")
    assert spurious_witness(target, p, split_map) == atoms("c(3), b(2), a(3,2), e(1), e(2), e(3)")


def test_no_witness_for_missing_d(split_map):
    p = parse_program(EX4, "c(3). b(2).")
    target = atoms("a(dk,dk), d(dk,dk), e(d1), e(dk), c(dk), b(dk)")
    assert spurious_witness(target, p, split_map) is None


def test_identity_witness_is_itself():
    p = parse_program(EX1, "c(1). b(2).")
    (I,) = solve(p)
    assert spurious_witness(I, p, DomainMapping.identity()) == I


def test_witness_iff_not_spurious(split_map):
    p = parse_program(EX4, "c(3). b(2).")
    rep = check_coverage(p, abstract_program(p, split_map).program, split_map)
    for s in solve(abstract_program(p, split_map).program):
        assert (spurious_witness(s, p, split_map) is None) == (s in rep.spurious)

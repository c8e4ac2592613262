"""Acceptance suite: one check per criterion, each reported as a PASS/FAIL line."""
import random
import time
from contextlib import contextmanager

from aspax import (DomainMapping, abstract_program, check_coverage, classify_relation, enumerate_answer_sets,
                   omit_literals, parse_program, solve)
from aspax.generate import GeneratorConfig, random_ground_program, random_mapping, random_program
from aspax.solver import brute_force_answer_sets

from conftest import EX1, EX4, atoms

RESULTS = {}


@contextmanager
def criterion(n, title, limit=None):
    t0 = time.perf_counter()
    try:
        yield
        took = time.perf_counter() - t0
        if limit is not None:
            assert took < limit, f"took {took:.1f}s, limit {limit}s"
    except BaseException as exc:
        RESULTS[n] = f"criterion {n}: FAIL  {title} ({type(exc).__name__}: {exc})"
        print(RESULTS[n])
        raise
    RESULTS[n] = f"criterion {n}: PASS  {title} ({time.perf_counter() - t0:.2f}s)"
    print(RESULTS[n])


def _key(s):
    return sorted(map(str, s))


def test_criterion_1_omission_example():
    with criterion(1, "omission example", limit=1.0):
        assert solve(parse_program(EX1, "c(1). b(2).")) == [atoms("c(1), b(2), a(1,2), d(1,2)")]
        assert solve(parse_program(EX1, "c(2). b(2).")) == [atoms("c(2), b(2), a(2,2), d(2,2)")]
        m = DomainMapping.identity(omitted=[("c", 1)])
        abstract = omit_literals(parse_program(EX1, "b(2)."), m.omitted).program
        found = solve(abstract)
        assert atoms("b(2), a(1,2), d(1,2)") in found
        assert atoms("b(2), a(2,2), d(2,2)") in found
        for facts in ("c(1). b(2).", "c(2). b(2)."):
            p = parse_program(EX1, facts)
            rep = check_coverage(p, omit_literals(p, m.omitted).program, m)
            assert len(rep.uncovered) == 0


def test_criterion_2_relation_typing(split_map):
    with criterion(2, "typing of <= on split classes"):
        sm = split_map.sort_mapping("d")
        assert classify_relation("<=", ("d1", "d1"), sm) == "I"
        assert classify_relation("<=", ("d1", "dk"), sm) == "I"
        assert classify_relation("<=", ("dk", "dk"), sm) == "III"


def test_criterion_3_domain_example(split_map):
    with criterion(3, "domain abstraction example", limit=1.0):
        abstract = abstract_program(parse_program(EX4), split_map).program
        found = solve(abstract.add_facts(sorted(atoms("c(dk), b(dk)"), key=str)))
        assert atoms("a(dk,dk), e(d1), e(dk), c(dk), b(dk)") in found
        for facts in ("c(3). b(2).", "c(2). b(3)."):
            p = parse_program(EX4, facts)
            rep = check_coverage(p, abstract_program(p, split_map).program, split_map)
            assert len(rep.uncovered) == 0


def test_criterion_4_random_coverage():
    with criterion(4, "500+ random programs, omission and interval mappings", limit=300):
        cfg = GeneratorConfig(max_rules=6, max_vars=2, max_neg=1, max_domain=4)
        checked = 0
        for seed in range(600):
            rng = random.Random(seed)
            p = random_program(rng, cfg)
            m = random_mapping(rng, p, omit_rate=0.3)
            omitted_only = DomainMapping.identity(omitted=m.omitted)
            rep = check_coverage(p, omit_literals(p, m.omitted).program, omitted_only, with_spurious=False)
            assert rep.ok, f"seed {seed}: omission left {len(rep.uncovered)} uncovered"
            rep = check_coverage(p, abstract_program(p, m).program, m, with_spurious=False)
            assert rep.ok, f"seed {seed}: abstraction left {len(rep.uncovered)} uncovered"
            checked += 1
        assert checked >= 500


def test_criterion_5_solver_oracle():
    with criterion(5, "solver equals brute force on 200+ ground programs"):
        for seed in range(220):
            rng = random.Random(seed)
            g = random_ground_program(rng, n_atoms=rng.randint(1, 14), n_rules=rng.randint(1, 20))
            fast = sorted(enumerate_answer_sets(g).answer_sets, key=_key)
            assert fast == sorted(brute_force_answer_sets(g), key=_key), f"seed {seed}"


def test_criterion_6_identity_mapping():
    with criterion(6, "identity mapping keeps answer sets"):
        corpus = [parse_program(EX1, "c(1). b(2)."), parse_program(EX4, "c(3). b(2).")]
        corpus += [random_program(random.Random(seed)) for seed in range(200)]
        for p in corpus:
            m = DomainMapping.identity()
            assert sorted(solve(abstract_program(p, m).program), key=_key) == sorted(solve(p), key=_key)


def test_criterion_7_grid_policy():
    from aspax.policy import Goal, GridScenario, check_spurious, find_counterexample, generate_abstract_system

    with criterion(7, "grid: coarse map gives a spurious cex, refined map does not", limit=120):
        g = GridScenario(n=4)
        ps = g.system()
        hist, pol = g.programs()
        goal = Goal("caught")
        coarse = g.mapping("quadrant")
        shape = g.region_pattern(["nw", "nw", "ne", "ne"], ["nw", "ne", "ne"])
        cex = None
        for bound in (3, 4, 5):
            cex = find_counterexample(generate_abstract_system(ps, coarse, "reachable", hist, pol), goal, bound, shape)
            if cex is not None:
                break
        assert cex is not None
        assert not any(goal.holds(s) for s in cex.states)
        verdict = check_spurious(cex, ps, coarse)
        assert verdict.spurious and verdict.failure_kind == "i"
        assert "goTo(2,1)" in map(str, cex.actions[verdict.fail_step])
        assert "goTo(2,1)" not in verdict.detail

        person = [a.args for a in cex.states[0] if a.pred == "pAt"][0]
        where = g.region(person[0].value, person[1].value)
        same = g.region_pattern(["nw", "nw", "ne", "ne"], ["nw", "ne", "ne"], person=where)
        refined = generate_abstract_system(ps, g.mapping("refined"), "reachable", hist, pol)
        assert find_counterexample(refined, goal, 3, same) is None


def test_criterion_8_shrunk_constraint_is_caught():
    with criterion(8, "shrunk-constraint omission is detected"):
        p = parse_program("0 { a ; q }.\n:- a, q.\n")
        assert len(p.rules) == 2
        m = DomainMapping.identity(omitted=[("q", 0)])
        bad = omit_literals(p, m.omitted, shrink_constraints=True).program
        assert len(check_coverage(p, bad, m).uncovered) != 0


if __name__ == "__main__":
    import sys

    import pytest

    code = pytest.main([__file__, "-q", "-p", "no:cacheprovider"])
    print("\n".join(RESULTS[n] for n in sorted(RESULTS)))
    sys.exit(code)

"""Property tests over generated programs."""
import random

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from aspax import DomainMapping, abstract_program, check_coverage, omit_literals, parse_program, print_program, solve
from aspax.core import Atom
from aspax.generate import GeneratorConfig, random_mapping, random_program
from aspax.solver import GroundProgram, GroundRule, brute_force_answer_sets, enumerate_answer_sets

SETTINGS = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
seeds = st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def ground_programs(draw, max_atoms=8):
    n = draw(st.integers(1, max_atoms))
    atoms = [Atom(f"a{i}") for i in range(n)]
    idx = st.lists(st.integers(0, n - 1), max_size=2, unique=True)
    rules = []
    for _ in range(draw(st.integers(0, 10))):
        head = draw(st.one_of(st.none(), st.integers(0, n - 1)))
        pos = tuple(atoms[i] for i in sorted(draw(idx)))
        neg = tuple(atoms[i] for i in sorted(draw(idx)))
        rules.append(GroundRule(None if head is None else atoms[head], pos, neg))
    return GroundProgram(tuple(rules), tuple(atoms))


def _key(s):
    return sorted(map(str, s))


@SETTINGS
@given(ground_programs())
def test_solver_agrees_with_brute_force(g):
    assert sorted(enumerate_answer_sets(g).answer_sets, key=_key) == sorted(brute_force_answer_sets(g), key=_key)


@SETTINGS
@given(seeds)
def test_print_parse_round_trip(seed):
    p = random_program(random.Random(seed))
    text = print_program(p)
    again = parse_program(text)
    assert print_program(again) == text
    assert solve(again) == solve(p)


@SETTINGS
@given(seeds)
def test_identity_mapping_preserves_answer_sets(seed):
    p = random_program(random.Random(seed))
    m = DomainMapping.identity()
    assert sorted(solve(abstract_program(p, m).program), key=_key) == sorted(solve(p), key=_key)


@SETTINGS
@given(seeds)
def test_omission_covers(seed):
    rng = random.Random(seed)
    p = random_program(rng, GeneratorConfig(max_rules=4))
    m = random_mapping(rng, p, omit_rate=0.4)
    m = DomainMapping.identity(omitted=m.omitted)
    assert check_coverage(p, omit_literals(p, m.omitted).program, m, with_spurious=False).ok


@SETTINGS
@given(seeds)
def test_abstraction_covers(seed):
    rng = random.Random(seed)
    p = random_program(rng, GeneratorConfig(max_rules=4))
    m = random_mapping(rng, p)
    assert check_coverage(p, abstract_program(p, m).program, m, with_spurious=False).ok


@SETTINGS
@given(seeds, st.data())
def test_mapping_is_monotone_and_distributes(seed, data):
    rng = random.Random(seed)
    p = random_program(rng)
    m = random_mapping(rng, p)
    universe = sorted({a for s in solve(p) for a in s}, key=Atom.sort_key)
    i = set(data.draw(st.lists(st.sampled_from(universe), unique=True))) if universe else set()
    j = set(data.draw(st.lists(st.sampled_from(universe), unique=True))) if universe else set()
    assert m.apply(i) <= m.apply(i | j)
    assert m.apply(i | j) == m.apply(i) | m.apply(j)

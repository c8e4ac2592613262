"""Policy checking over one-step history programs.

A state is a set of time-free fluent atoms.  Two programs drive the system:
the history program (effects, inertia, indirect effects, constraints) and
the policy program (rules that select actions).  For a state ``s``

* the *view* of ``s`` and the policy's plans come from solving
  history + policy with the time sort set to ``{0}`` and ``s`` given at 0,
* successors under a plan come from solving the history program alone with
  time ``{0, 1}``, ``s`` and the plan given at 0, and reading fluents at 1.

The abstract system is either generated from concrete transitions (exact
mode) or computed by running the abstracted programs on abstract states
(over-approximating mode).  Both use the same two-phase step.
"""
from __future__ import annotations

import logging
import re
from collections import deque
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Callable, Iterable, Optional

from .core import TIME_SORT, Atom, Const, Program, Rule, format_interpretation
from .domain import abstract_program
from .errors import AspaxError, MappingError, ResourceError
from .mapping import DomainMapping, SortMapping
from .parser import SourceProgram, parse_mapping, parse_program
from .solver import DEFAULT_LIMITS, GroundRule, Limits, enumerate_answer_sets, ground, solve

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# goals


class Goal:
    """Propositional formula over time-free atoms: ``caught``, ``a & !b | c`` ..."""

    _TOKEN = re.compile(r"\s*(?:(\()|(\))|(&|\|)|(!|~|not\b)|([A-Za-z_][A-Za-z0-9_]*(?:\([^()]*\))?))")

    def __init__(self, text: str):
        self.text = text.strip()
        self._tokens = self._lex(self.text)
        self._pos = 0
        self._tree = self._expr()
        if self._pos != len(self._tokens):
            raise AspaxError(f"trailing input in goal {text!r}")

    @classmethod
    def atom(cls, name: str) -> "Goal":
        return cls(name)

    def _lex(self, text):
        out, i = [], 0
        while i < len(text):
            m = self._TOKEN.match(text, i)
            if not m or m.end() == i:
                raise AspaxError(f"cannot parse goal {text!r} at column {i + 1}")
            out.append(next(g for g in m.groups() if g is not None).replace(" ", ""))
            i = m.end()
            while i < len(text) and text[i].isspace():
                i += 1
        return out

    def _peek(self):
        return self._tokens[self._pos] if self._pos < len(self._tokens) else None

    def _expr(self):
        left = self._conj()
        while self._peek() == "|":
            self._pos += 1
            left = ("or", left, self._conj())
        return left

    def _conj(self):
        left = self._unary()
        while self._peek() == "&":
            self._pos += 1
            left = ("and", left, self._unary())
        return left

    def _unary(self):
        tok = self._peek()
        if tok in ("!", "~", "not"):
            self._pos += 1
            return ("not", self._unary())
        if tok == "(":
            self._pos += 1
            inner = self._expr()
            if self._peek() != ")":
                raise AspaxError(f"unbalanced parentheses in goal {self.text!r}")
            self._pos += 1
            return inner
        if tok is None or tok in (")", "&", "|"):
            raise AspaxError(f"unexpected end of goal {self.text!r}")
        self._pos += 1
        return ("atom", tok)

    def holds(self, state: Iterable[Atom]) -> bool:
        names = {str(a) for a in state}
        return self._eval(self._tree, names)

    def _eval(self, node, names):
        kind = node[0]
        if kind == "atom":
            return node[1] in names
        if kind == "not":
            return not self._eval(node[1], names)
        if kind == "and":
            return self._eval(node[1], names) and self._eval(node[2], names)
        return self._eval(node[1], names) or self._eval(node[2], names)

    def __str__(self):
        return self.text


# ---------------------------------------------------------------------------
# time handling


class _Timeline:
    """Adds and strips the time argument using a program signature."""

    def __init__(self, signature: dict):
        self.full = {}  # (pred, time-free arity) -> (full arity, time positions)
        for (pred, arity), sorts in signature.items():
            tpos = tuple(i for i, s in enumerate(sorts) if s == TIME_SORT)
            if tpos:
                self.full[(pred, arity - len(tpos))] = (arity, tpos)

    def at(self, a: Atom, t: int) -> Atom:
        info = self.full.get(a.key)
        if info is None:
            return a
        arity, tpos = info
        args, it = [], iter(a.args)
        for i in range(arity):
            args.append(Const(t) if i in tpos else next(it))
        return Atom(a.pred, tuple(args))

    def split(self, a: Atom):
        """(time or None, time-free atom)."""
        for key, (arity, tpos) in self.full.items():
            if key[0] == a.pred and arity == a.arity:
                t = a.args[tpos[0]].value
                return t, Atom(a.pred, tuple(x for i, x in enumerate(a.args) if i not in tpos))
        return None, a


def _with_time(p: Program, horizon: int) -> Program:
    sorts = dict(p.sorts)
    sorts[TIME_SORT] = tuple(range(horizon + 1))
    return p.with_rules(p.rules, sorts=sorts)


# ---------------------------------------------------------------------------
# concrete system


@dataclass(frozen=True)
class StepResult:
    view: frozenset  # time-free atoms at time 0, actions excluded
    plans: frozenset  # frozensets of time-free action atoms


class _Stepper:
    """Two-phase one-step evaluation for a pair of (possibly abstract) programs."""

    def __init__(self, history: Program, policy_rules: Program, fluents, actions, limits: Limits):
        self.fluents = set(fluents)
        self.actions = set(actions)
        self.limits = limits
        combined = history.with_rules(list(history.rules) + list(policy_rules.rules),
                                      sorts={**history.sorts, **policy_rules.sorts},
                                      signature={**history.signature, **policy_rules.signature})
        self.select = _with_time(combined, 0)
        self.effect = _with_time(history, 1)
        self.tl = _Timeline(combined.signature)
        self._select_cache = {}
        self._effect_cache = {}
        self._pinned_cache = {}
        self.solver_calls = 0

    def _facts(self, state, t=0):
        return [self.tl.at(a, t) for a in sorted(state, key=Atom.sort_key)]

    def _timed(self, interp, t):
        out = set()
        for a in interp:
            tt, free = self.tl.split(a)
            if tt == t:
                out.add(free)
        return out

    def views(self, fluent_state: frozenset) -> list:
        """Every (view, plan) pair the policy program admits for the given fluents."""
        hit = self._select_cache.get(fluent_state)
        if hit is not None:
            return hit
        self.solver_calls += 1
        out = []
        for I in solve(self.select.add_facts(self._facts(fluent_state)), limits=self.limits):
            timed = self._timed(I, 0)
            plan = frozenset(a for a in timed if a.pred in self.actions)
            view = frozenset(a for a in timed if a.pred not in self.actions)
            out.append((view, plan))
        out = sorted(set(out), key=lambda vp: (_skey(vp[0]), _skey(vp[1])))
        self._select_cache[fluent_state] = out
        return out

    def views_among(self, fluent_state: frozenset, candidates) -> list:
        """Like :meth:`views` but only for the given candidate views.

        Each candidate is pinned by constraints, which keeps the search small
        when the program guesses many view atoms.
        """
        if fluent_state in self._select_cache:
            wanted = set(candidates)
            return [vp for vp in self._select_cache[fluent_state] if vp[0] in wanted]
        key = (fluent_state, frozenset(candidates))
        hit = self._pinned_cache.get(key)
        if hit is not None:
            return hit
        self.solver_calls += 1
        g = ground(self.select.add_facts(self._facts(fluent_state)), self.limits)
        timed = [a for a in g.universe if a not in g.hidden]
        out = []
        for view in sorted(set(candidates), key=_skey):
            inside = {self.tl.at(a, 0) for a in view}
            pins = []
            for a in timed:
                tt, free = self.tl.split(a)
                if tt != 0 or free.pred in self.actions:
                    continue
                pins.append(GroundRule(None, (), (a,)) if a in inside else GroundRule(None, (a,), ()))
            if not inside <= set(timed):
                continue
            pinned = replace(g, rules=g.rules + tuple(pins))
            for I in enumerate_answer_sets(pinned, limits=self.limits).answer_sets:
                plan = frozenset(a for a in self._timed(I, 0) if a.pred in self.actions)
                out.append((view, plan))
        out = sorted(set(out), key=lambda vp: (_skey(vp[0]), _skey(vp[1])))
        self._pinned_cache[key] = out
        return out

    def successors(self, fluent_state: frozenset, plan: frozenset) -> list:
        key = (fluent_state, plan)
        hit = self._effect_cache.get(key)
        if hit is not None:
            return hit
        self.solver_calls += 1
        facts = self._facts(fluent_state) + self._facts(plan)
        out = set()
        for I in solve(self.effect.add_facts(facts), limits=self.limits):
            out.add(frozenset(a for a in self._timed(I, 1) if a.pred in self.fluents))
        out = sorted(out, key=_skey)
        self._effect_cache[key] = out
        return out


def _skey(s):
    return tuple(sorted(str(a) for a in s))


@dataclass
class TransitionSystem:
    """States are fluent sets; transitions are computed on demand and cached."""

    stepper: _Stepper
    initial_states: tuple
    max_states: int = 200000

    def executable(self, s: frozenset) -> list:
        """Single-action plans with at least one successor (the plans of Σ(s))."""
        out = []
        for a in self.candidate_actions():
            plan = frozenset([a])
            if self.stepper.successors(s, plan):
                out.append(plan)
        return out

    def candidate_actions(self) -> list:
        if not hasattr(self, "_candidates"):
            g = ground(self.stepper.effect.add_facts([]), self.stepper.limits)
            acts = set()
            for srt_pred, sorts in self.stepper.effect.signature.items():
                if srt_pred[0] in self.stepper.actions:
                    acts |= _all_ground(srt_pred, sorts, self.stepper.effect.sorts, self.stepper.tl)
            self._candidates = sorted(acts, key=Atom.sort_key)
        return self._candidates

    def transition(self, s: frozenset, plan: frozenset) -> list:
        return self.stepper.successors(s, plan)

    def view(self, s: frozenset) -> frozenset:
        vs = self.stepper.views(s)
        return vs[0][0] if vs else frozenset(s)

    def states(self) -> list:
        """States reachable from the initial states under every executable action."""
        return _reachable(self.initial_states, lambda s: [
            t for p in self.executable(s) for t in self.transition(s, p)], self.max_states)


def _all_ground(key, sorts, sort_values, tl):
    import itertools
    free = [sort_values[s] for s in sorts if s != TIME_SORT]
    return {Atom(key[0], tuple(Const(v) for v in combo)) for combo in itertools.product(*free)}


def _reachable(initial, succ, limit):
    seen = list(dict.fromkeys(initial))
    seen_set = set(seen)
    queue = deque(seen)
    while queue:
        s = queue.popleft()
        for t in succ(s):
            if t not in seen_set:
                seen_set.add(t)
                seen.append(t)
                if len(seen) > limit:
                    raise ResourceError(f"state space exceeds {limit} states")
                queue.append(t)
    return seen


@dataclass
class PolicySystem:
    """A transition system restricted to the plans a policy selects."""

    ts: TransitionSystem

    def plans(self, s: frozenset) -> list:
        return sorted({plan for _, plan in self.ts.stepper.views(s) if plan}, key=_skey)

    def transition(self, s, plan):
        return self.ts.transition(s, plan)

    def view(self, s):
        return self.ts.view(s)

    @property
    def initial_states(self):
        return self.ts.initial_states

    def states(self) -> list:
        return _reachable(self.initial_states, lambda s: [
            t for p in self.plans(s) for t in self.transition(s, p)], self.ts.max_states)

    def stuck(self, s) -> bool:
        return not self.plans(s)


def build_transition_system(history: Program, initial_states: Iterable, fluents: Iterable, actions: Iterable,
                            static_facts: Iterable = (), limits: Limits = DEFAULT_LIMITS) -> TransitionSystem:
    """Transition system of a history program; the policy is added with :func:`apply_policy`."""
    h = history.add_facts(static_facts) if static_facts else history
    stepper = _Stepper(h, h.with_rules([]), fluents, actions, limits)
    return TransitionSystem(stepper, tuple(frozenset(s) for s in initial_states))


def apply_policy(ts: TransitionSystem, policy_rules: Program) -> PolicySystem:
    st = ts.stepper
    stepper = _Stepper(st.effect, policy_rules, st.fluents, st.actions, st.limits)
    return PolicySystem(TransitionSystem(stepper, ts.initial_states, ts.max_states))


# ---------------------------------------------------------------------------
# abstract system


@dataclass
class AbstractSystem:
    initial: tuple
    transitions: dict  # state -> list of (action, state)
    stuck: frozenset = frozenset()
    mode: str = "exact"
    witnesses: dict = field(default_factory=dict)  # (s, a, t) -> concrete (s, plan, s')

    @property
    def states(self) -> list:
        seen = dict.fromkeys(self.initial)
        for s, outs in self.transitions.items():
            seen.setdefault(s)
            for _, t in outs:
                seen.setdefault(t)
        return list(seen)

    def edges(self) -> set:
        return {(s, a, t) for s, outs in self.transitions.items() for a, t in outs}


class StateAbstraction:
    """h_st and h_act derived from a mapping: map atoms and drop omitted predicates."""

    def __init__(self, m: DomainMapping, signature: dict, tl: _Timeline):
        self.m = m
        self.signature = signature
        self.tl = tl

    def atom(self, a: Atom) -> Optional[Atom]:
        timed = self.tl.at(a, 0)
        mapped = self.m.apply_atom(timed, self.signature)
        if mapped is None:
            return None
        return self.tl.split(mapped)[1]

    def state(self, view) -> frozenset:
        return frozenset(x for x in (self.atom(a) for a in view) if x is not None)

    action = state


def generate_abstract_system(ps: PolicySystem, m: DomainMapping, mode: str = "exact",
                             history: Program = None, policy_rules: Program = None) -> AbstractSystem:
    """Abstract system for ``ps`` under ``m``.

    ``exact`` lifts the reachable concrete policy transitions.  ``overapprox``
    runs the abstracted history and policy programs on abstract states and
    needs the original programs.  ``reachable`` does the same but keeps only
    abstract states that are images of reachable concrete states.
    """
    st = ps.ts.stepper
    h = StateAbstraction(m, st.select.signature, st.tl)
    initial = tuple(dict.fromkeys(h.state(ps.view(s)) for s in ps.initial_states))
    if mode == "exact":
        transitions, stuck, witnesses = {}, set(), {}
        for s in ps.states():
            hs = h.state(ps.view(s))
            outs = transitions.setdefault(hs, [])
            if ps.stuck(s):
                stuck.add(hs)
            for plan in ps.plans(s):
                ha = h.action(plan)
                for t in ps.transition(s, plan):
                    edge = (ha, h.state(ps.view(t)))
                    if edge not in outs:
                        outs.append(edge)
                        witnesses[(hs,) + edge] = (s, plan, t)
        for outs in transitions.values():
            outs.sort(key=lambda e: (_skey(e[0]), _skey(e[1])))
        return AbstractSystem(initial, transitions, frozenset(stuck), "exact", witnesses)
    if mode not in ("overapprox", "reachable"):
        raise AspaxError(f"unknown abstract system mode {mode!r}")
    if history is None or policy_rules is None:
        raise AspaxError("over-approximating mode needs the history and policy programs")
    space = None
    if mode == "reachable":
        space = frozenset(h.state(ps.view(s)) for s in ps.states())
    return _overapprox_system(ps, m, history, policy_rules, initial, h, space, mode)


def _abstract_stepper(ps: PolicySystem, m: DomainMapping, history: Program, policy_rules: Program):
    st = ps.ts.stepper
    hist = _with_time(st.effect, 1)
    both = st.select
    a_hist = abstract_program(hist, _restrict(m, hist)).program
    a_both = abstract_program(both, _restrict(m, both)).program
    a_policy = a_both.with_rules([r for r in a_both.rules if r not in set(a_hist.rules)])
    fluents = {f for f in st.fluents if all(k[0] != f for k in m.omitted)}
    stepper = _Stepper(a_hist, a_policy, fluents, st.actions, st.limits)
    # the combined abstract program is used as is for selection
    stepper.select = _with_time(a_both, 0)
    stepper.tl = _Timeline(a_both.signature)
    return stepper


def _restrict(m: DomainMapping, p: Program) -> DomainMapping:
    preds = p.predicates() | set(p.signature)
    return m.with_omitted(k for k in m.omitted if k in preds)


def _overapprox_system(ps, m, history, policy_rules, initial, h, space=None, mode="overapprox"):
    stepper = _abstract_stepper(ps, m, history, policy_rules)
    fl = stepper.fluents

    def fluent_part(state):
        return frozenset(a for a in state if a.pred in fl)

    by_fluents = {}
    for v in space or ():
        by_fluents.setdefault(fluent_part(v), []).append(v)

    def views(fluents):
        if space is None:
            return stepper.views(fluents)
        return stepper.views_among(fluents, by_fluents.get(fluents, ()))

    transitions, stuck = {}, set()
    queue = deque(initial)
    seen = set(initial)
    while queue:
        s = queue.popleft()
        outs = transitions.setdefault(s, [])
        matching = [(v, plan) for v, plan in views(fluent_part(s)) if v == s]
        if any(not plan for _, plan in matching) or not matching:
            stuck.add(s)
        for _, plan in matching:
            if not plan:
                continue
            for nxt in stepper.successors(fluent_part(s), plan):
                for view, _ in views(nxt):
                    edge = (plan, view)
                    if edge not in outs:
                        outs.append(edge)
                    if view not in seen:
                        seen.add(view)
                        if len(seen) > ps.ts.max_states:
                            raise ResourceError("abstract state space exceeds the state limit")
                        queue.append(view)
        outs.sort(key=lambda e: (_skey(e[0]), _skey(e[1])))
    return AbstractSystem(initial, transitions, frozenset(stuck), mode)


# ---------------------------------------------------------------------------
# counterexamples


@dataclass(frozen=True)
class Trajectory:
    states: tuple
    actions: tuple
    stuck_end: bool = False  # ends in a state without policy selection

    def __len__(self):
        return len(self.actions)

    def to_text(self, show=None) -> str:
        fmt = show or format_interpretation
        parts = [fmt(self.states[0])]
        for a, s in zip(self.actions, self.states[1:]):
            parts.append(f"--{fmt(a)}--> {fmt(s)}")
        text = " ".join(parts)
        return text + (" [stuck]" if self.stuck_end else "")

    def to_json(self) -> dict:
        return {
            "states": [sorted(str(a) for a in s) for s in self.states],
            "actions": [sorted(str(a) for a in s) for s in self.actions],
            "stuckEnd": self.stuck_end,
        }


@dataclass(frozen=True)
class TrajectoryPattern:
    """Constrain a trajectory: per-step exact atom sets for the given predicates.

    ``None`` entries leave a step unconstrained.
    """

    states: tuple = ()
    actions: tuple = ()
    predicates: frozenset = frozenset()

    def _proj(self, s):
        return frozenset(str(a) for a in s if not self.predicates or a.pred in self.predicates)

    def state_ok(self, i, s) -> bool:
        if i >= len(self.states) or self.states[i] is None:
            return True
        return self._proj(s) == frozenset(self.states[i])

    def action_ok(self, i, a) -> bool:
        if i >= len(self.actions) or self.actions[i] is None:
            return True
        return frozenset(str(x) for x in a) == frozenset(self.actions[i])


def find_counterexample(system: AbstractSystem, goal: Goal, bound: int,
                        pattern: Optional[TrajectoryPattern] = None) -> Optional[Trajectory]:
    """A trajectory of exactly ``bound`` steps (or ending stuck earlier) with the goal false throughout."""
    if bound < 0:
        raise AspaxError("bound must be non-negative")
    want_len = bound if pattern is None or not pattern.states else min(bound, len(pattern.states) - 1)

    def dfs(states, actions):
        s = states[-1]
        i = len(actions)
        if goal.holds(s) or (pattern and not pattern.state_ok(i, s)):
            return None
        if i == want_len:
            return Trajectory(tuple(states), tuple(actions))
        if s in system.stuck and (pattern is None or i >= len(pattern.states) - 1):
            return Trajectory(tuple(states), tuple(actions), True)
        for a, t in system.transitions.get(s, ()):
            if pattern and not pattern.action_ok(i, a):
                continue
            found = dfs(states + [t], actions + [a])
            if found is not None:
                return found
        return None

    for s0 in sorted(system.initial, key=_skey):
        found = dfs([s0], [])
        if found is not None:
            return found
    return None


@dataclass(frozen=True)
class Verdict:
    spurious: bool
    witness: Optional[tuple] = None  # concrete (states, plans)
    fail_step: Optional[int] = None
    failure_kind: Optional[str] = None  # "i" or "ii"
    detail: str = ""

    def to_text(self) -> str:
        if not self.spurious:
            return "concrete: a matching concrete trajectory exists"
        return f"spurious: fails at step {self.fail_step} (kind {self.failure_kind}) {self.detail}".rstrip()


def check_spurious(traj: Trajectory, ps: PolicySystem, m: DomainMapping) -> Verdict:
    """Forward search for a concrete policy trajectory that abstracts to ``traj``."""
    st = ps.ts.stepper
    h = StateAbstraction(m, st.select.signature, st.tl)
    frontier = {s: None for s in ps.initial_states if h.state(ps.view(s)) == traj.states[0]}
    if not frontier:
        return Verdict(True, None, 0, "ii", "no concrete initial state abstracts to the first state")
    parents = [frontier]
    for i, (a_hat, nxt_hat) in enumerate(zip(traj.actions, traj.states[1:])):
        nxt = {}
        any_plan = False
        for s in parents[-1]:
            for plan in ps.plans(s):
                if h.action(plan) != a_hat:
                    continue
                any_plan = True
                for t in ps.transition(s, plan):
                    if t not in nxt and h.state(ps.view(t)) == nxt_hat:
                        nxt[t] = (s, plan)
        if not nxt:
            if not any_plan:
                chosen = sorted({format_interpretation(h.action(p)) for s in parents[-1] for p in ps.plans(s)})
                return Verdict(True, None, i, "i", "policy selects only " + ", ".join(chosen) if chosen
                               else "policy selects nothing")
            return Verdict(True, None, i, "ii", "no selected plan reaches the next abstract state")
        parents.append(nxt)
    ends = list(parents[-1])
    if traj.stuck_end:
        ends = [s for s in ends if ps.stuck(s)]
        if not ends:
            return Verdict(True, None, len(traj.actions), "i", "every matching state has a policy selection")
    # rebuild one witness
    s = sorted(ends, key=_skey)[0]
    states, plans = [s], []
    for layer in reversed(parents[1:]):
        prev, plan = layer[s]
        states.append(prev)
        plans.append(plan)
        s = prev
    return Verdict(False, (tuple(reversed(states)), tuple(reversed(plans))))


def lift_trajectory(states, plans, ps: PolicySystem, m: DomainMapping) -> Trajectory:
    st = ps.ts.stepper
    h = StateAbstraction(m, st.select.signature, st.tl)
    return Trajectory(tuple(h.state(ps.view(s)) for s in states), tuple(h.action(p) for p in plans))


def refine_mapping(m: DomainMapping, add_back: Iterable = (), finer: Optional[dict] = None) -> DomainMapping:
    """Return a strictly finer mapping: fewer omitted predicates and/or finer classes.

    ``finer`` maps a sort name to a SortMapping (or None to make the sort exact).
    """
    add_back = set(add_back)
    missing = add_back - set(m.omitted)
    if missing:
        raise MappingError(f"cannot add back predicates that are not omitted: {sorted(missing)}")
    per_sort = dict(m.per_sort)
    for srt, sm in (finer or {}).items():
        if sm is None:
            per_sort.pop(srt, None)
        else:
            per_sort[srt] = sm
    new = DomainMapping(per_sort, frozenset(set(m.omitted) - add_back))
    if not new.refines(m):
        raise MappingError("the new classes do not refine the old ones")
    if m.refines(new):
        raise MappingError("refinement must change the mapping")
    return new


# ---------------------------------------------------------------------------
# bundled grid scenario


def _data(name: str) -> str:
    return resources.files("aspax").joinpath("data").joinpath(name).read_text()


@dataclass
class GridScenario:
    """The bundled grid search: history program, policy and mappings for an n x n grid."""

    n: int = 4
    start: tuple = (1, 1)
    sensing: int = 1
    obstacles: tuple = ()
    limits: Limits = DEFAULT_LIMITS
    domain_text: Optional[str] = None  # replaces the bundled history program
    policy_text: Optional[str] = None  # replaces the bundled policy rules

    FLUENTS = ("rAt", "pAt", "visited", "obsAt")
    ACTIONS = ("goTo",)

    def _sorted_program(self, text, origin):
        return parse_program(SourceProgram(text, origin))

    def _resize(self, p: Program) -> Program:
        sorts = dict(p.sorts)
        sorts["coord"] = tuple(range(1, self.n + 1))
        sorts["dist"] = tuple(range(0, 2 * (self.n - 1) + 1))
        return p.with_rules(p.rules, sorts=sorts)

    def _domain(self) -> str:
        return self.domain_text if self.domain_text is not None else _data("grid_domain.lp")

    def history(self) -> Program:
        return self._resize(self._sorted_program(self._domain(), "grid_domain.lp"))

    def policy(self) -> Program:
        """History program plus the policy rules (the policy may use the history's declarations)."""
        rules = self.policy_text if self.policy_text is not None else _data("grid_policy.lp")
        return self._resize(self._sorted_program(self._domain() + "\n" + rules, "grid_policy.lp"))

    def static_facts(self) -> list:
        cells = [(x, y) for x in range(1, self.n + 1) for y in range(1, self.n + 1)]
        facts = []
        for (x, y) in cells:
            for (x1, y1) in cells:
                facts.append(Atom("dist", tuple(Const(v) for v in (x, y, x1, y1, abs(x - x1) + abs(y - y1)))))
                if max(abs(x - x1), abs(y - y1)) <= self.sensing:
                    facts.append(Atom("near", tuple(Const(v) for v in (x, y, x1, y1))))
        return facts

    def initial_states(self) -> list:
        sx, sy = self.start
        out = []
        for x in range(1, self.n + 1):
            for y in range(1, self.n + 1):
                if (x, y) == (sx, sy) or (x, y) in self.obstacles:
                    continue
                s = {Atom("rAt", (Const(sx), Const(sy))), Atom("visited", (Const(sx), Const(sy))),
                     Atom("pAt", (Const(x), Const(y)))}
                s |= {Atom("obsAt", (Const(ox), Const(oy))) for ox, oy in self.obstacles}
                out.append(frozenset(s))
        return out

    def programs(self):
        hist = self.history().add_facts(self.static_facts())
        pol = self.policy()
        policy_only = pol.with_rules([r for r in pol.rules if r not in set(self.history().rules)])
        return hist, policy_only

    def system(self) -> PolicySystem:
        hist, pol = self.programs()
        ts = build_transition_system(hist, self.initial_states(), self.FLUENTS, self.ACTIONS, limits=self.limits)
        return apply_policy(ts, pol)

    @staticmethod
    def mapping(name: str = "quadrant") -> DomainMapping:
        return parse_mapping(SourceProgram(_data(f"{name}.map"), f"{name}.map"))

    @staticmethod
    def region(rx, ry) -> str:
        return {(1, 1): "nw", (2, 1): "ne", (1, 2): "sw", (2, 2): "se"}.get((rx, ry), f"{rx}_{ry}")

    @classmethod
    def show(cls, s) -> str:
        parts = []
        for a in sorted(s, key=Atom.sort_key):
            if a.pred in ("rAt", "pAt", "goTo") and a.arity == 2:
                parts.append(f"{a.pred}({cls.region(a.args[0].value, a.args[1].value)})")
            else:
                parts.append(str(a))
        return "{" + ", ".join(parts) + "}"

    @classmethod
    def region_pattern(cls, regions, actions, person=None) -> TrajectoryPattern:
        """Robot regions per state and goTo regions per step.

        With ``person`` set, every state must also place the person in that region
        and have neither seen nor caught.
        """
        names = {cls.region(x, y): (x, y) for x in (1, 2) for y in (1, 2)}

        def at(pred, r):
            return f"{pred}({names[r][0]},{names[r][1]})"

        st = []
        for r in regions:
            if r is None:
                st.append(None)
            else:
                st.append((at("rAt", r),) + ((at("pAt", person),) if person else ()))
        ac = tuple(None if r is None else (at("goTo", r),) for r in actions)
        preds = {"rAt", "pAt", "seen", "caught"} if person else {"rAt"}
        return TrajectoryPattern(tuple(st), ac, frozenset(preds))


__all__ = ["AbstractSystem", "GridScenario", "Goal", "PolicySystem", "StateAbstraction", "Trajectory",
           "TrajectoryPattern", "TransitionSystem", "Verdict", "apply_policy", "build_transition_system",
           "check_spurious", "find_counterexample", "generate_abstract_system", "lift_trajectory",
           "refine_mapping"]

"""Coverage checking between a concrete program and its abstraction."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Optional

from .core import Atom, Program, format_interpretation
from .mapping import DomainMapping
from .solver import DEFAULT_LIMITS, Limits, enumerate_answer_sets, ground, is_answer_set


def _order(sets):
    return sorted(sets, key=lambda s: (len(s), sorted(a.sort_key() for a in s)))


@dataclass
class CoverageReport:
    concrete_count: int
    abstract_count: Optional[int]
    covered: list
    uncovered: list  # (concrete answer set, its image)
    spurious: list
    timings: dict = field(default_factory=dict)
    truncated: bool = False

    @property
    def ok(self) -> bool:
        return not self.uncovered

    def to_text(self) -> str:
        lines = [f"concrete answer sets: {self.concrete_count}",
                 f"abstract answer sets: {'-' if self.abstract_count is None else self.abstract_count}",
                 f"uncovered: {len(self.uncovered)}",
                 f"spurious: {len(self.spurious)}"]
        for concrete, image in self.uncovered:
            lines.append(f"uncovered {format_interpretation(concrete)} -> {format_interpretation(image)}")
        for s in self.spurious:
            lines.append(f"spurious {format_interpretation(s)}")
        if self.truncated:
            lines.append("warning: enumeration truncated by the answer-set cap")
        for k, v in self.timings.items():
            lines.append(f"time {k}: {v:.3f}s")
        return "\n".join(lines) + "\n"

    def to_json(self, timings: bool = False) -> str:
        def enc(s):
            return sorted(str(a) for a in s)

        doc = {
            "concreteCount": self.concrete_count,
            "abstractCount": self.abstract_count,
            "uncovered": [{"concrete": enc(c), "image": enc(i)} for c, i in self.uncovered],
            "spurious": [enc(s) for s in self.spurious],
            "truncated": self.truncated,
        }
        if timings:
            doc["timings"] = self.timings
        return json.dumps(doc, indent=2, sort_keys=True)


def check_coverage(concrete: Program, abstract: Program, m: DomainMapping, limits: Limits = None,
                   with_spurious: bool = True) -> CoverageReport:
    """Map every concrete answer set through ``m`` and test it against the abstract program."""
    limits = limits or DEFAULT_LIMITS
    t0 = time.perf_counter()
    cres = enumerate_answer_sets(ground(concrete, limits), limits=limits)
    t1 = time.perf_counter()
    ag = ground(abstract, limits)
    images = {}
    covered, uncovered = [], []
    for I in cres.answer_sets:
        image = m.apply(I, concrete.signature)
        images.setdefault(image, I)
        (covered if is_answer_set(ag, image) else uncovered).append((I, image))
    t2 = time.perf_counter()
    spurious, acount, truncated = [], None, cres.truncated
    if with_spurious:
        ares = enumerate_answer_sets(ag, limits=limits)
        acount = len(ares.answer_sets)
        truncated = truncated or ares.truncated
        spurious = [s for s in ares.answer_sets if s not in images]
    t3 = time.perf_counter()
    timings = {"concrete": t1 - t0, "coverage": t2 - t1, "abstract": t3 - t2}
    return CoverageReport(len(cres.answer_sets), acount, [c for c, _ in covered], uncovered,
                          _order(spurious), timings, truncated)


def spurious_witness(abstract_set, concrete: Program, m: DomainMapping, limits: Limits = None):
    """Some concrete answer set whose image is ``abstract_set``, or None."""
    limits = limits or DEFAULT_LIMITS
    target = frozenset(abstract_set)
    for I in enumerate_answer_sets(ground(concrete, limits), limits=limits).answer_sets:
        if m.apply(I, concrete.signature) == target:
            return I
    return None


__all__ = ["CoverageReport", "check_coverage", "spurious_witness"]

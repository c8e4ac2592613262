"""Abstraction of answer set programs by literal omission and domain abstraction."""
from .core import (Arith, Atom, Choice, ChoiceElement, Const, Program, Relation, Rule, Var, atom,
                   format_interpretation, make_program)
from .errors import AspaxError, MappingError, ParseError, ResourceError, SafetyError, SortError, TransformError
from .mapping import DomainMapping, SortMapping, classify_relation
from .parser import SourceProgram, parse_mapping, parse_program, print_mapping, print_program
from .solver import Limits, enumerate_answer_sets, ground, is_answer_set, solve
from .omission import omit_literals
from .domain import abstract_program
from .checker import check_coverage, spurious_witness

__version__ = "0.1.0"

__all__ = ["Arith", "Atom", "Choice", "ChoiceElement", "Const", "Program", "Relation", "Rule", "Var", "atom",
           "format_interpretation", "make_program", "AspaxError", "MappingError", "ParseError", "ResourceError",
           "SafetyError", "SortError", "TransformError", "DomainMapping", "SortMapping", "classify_relation",
           "SourceProgram", "parse_mapping", "parse_program", "print_mapping", "print_program", "Limits",
           "enumerate_answer_sets", "ground", "is_answer_set", "solve", "omit_literals", "abstract_program",
           "check_coverage", "spurious_witness"]

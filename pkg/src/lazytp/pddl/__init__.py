"""PDDL front end: parsing, printing and grounding."""

from .grounding import ground
from .parser import parse_domain, parse_problem
from .printer import domain_to_str, problem_to_str


def load(domain_text: str, problem_text: str, domain_file: str | None = None,
         problem_file: str | None = None):
    """Parse and ground a domain/problem pair in one call."""
    return ground(parse_domain(domain_text, domain_file), parse_problem(problem_text, problem_file))


__all__ = ["ground", "parse_domain", "parse_problem", "domain_to_str", "problem_to_str", "load"]

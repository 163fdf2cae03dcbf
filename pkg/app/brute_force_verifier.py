"""Brute-force solving and equivalence checking.

The solver is deliberately plain: static variable order (declaration order),
values in sorted order, and a constraint is checked by set lookup as soon as
its last scope variable is assigned. No propagation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from constraint_network import ConstraintNetwork

DEFAULT_MAX_SEARCH_SPACE = 10**7
DEFAULT_MAX_ORACLE_ALPHABET = 20

Assignment = dict[str, str]


class SearchSpaceTooLargeError(RuntimeError):
    """Raised when exhaustive enumeration would exceed the configured bound."""


class Verdict(str, Enum):
    EQUIVALENT = "equivalent"
    SAT_MISMATCH = "sat-mismatch"
    PROJECTION_MISMATCH = "projection-mismatch"


@dataclass(frozen=True)
class VerificationLimits:
    max_search_space: int = DEFAULT_MAX_SEARCH_SPACE
    max_oracle_alphabet: int = DEFAULT_MAX_ORACLE_ALPHABET

    def __post_init__(self) -> None:
        if self.max_search_space < 1:
            raise ValueError(f"max_search_space must be positive, got {self.max_search_space}.")
        if self.max_oracle_alphabet < 1:
            raise ValueError(f"max_oracle_alphabet must be positive, got {self.max_oracle_alphabet}.")


def search_space(network: ConstraintNetwork) -> int:
    """Nominal size of the assignment space: the product of every domain size."""
    return math.prod(len(network.domain(variable)) for variable in network.variables)


def _guard_search_space(network: ConstraintNetwork, max_search_space: int) -> None:
    space = search_space(network)
    if space > max_search_space:
        raise SearchSpaceTooLargeError(
            f"Search space of {space} assignments exceeds the bound of {max_search_space}."
        )


def solve_all(
    network: ConstraintNetwork,
    limit: int | None = None,
    max_search_space: int = DEFAULT_MAX_SEARCH_SPACE,
) -> list[Assignment]:
    """Every solution, in lexicographic order of (declaration order, sorted values).

    The bound applies to the widest level of the search tree: the search
    fails once the values tried at any single variable exceed
    ``max_search_space``. With non-empty domains a level is never wider
    than the nominal product of the domains. A fresh variable fixed by
    earlier variables widens its level by its domain size only.

    Args:
        network: Network to solve.
        limit: Stop after this many solutions. The bound is not enforced
            when a limit is given.
        max_search_space: Widest level the search may reach.

    Returns:
        Solutions as variable-to-value maps.

    Raises:
        SearchSpaceTooLargeError: A level of the search tree grew past
            ``max_search_space``.
    """
    if limit is not None and limit < 1:
        return []

    order = network.variables
    level_of = {variable: level for level, variable in enumerate(order)}
    checks: list[list[tuple[tuple[int, ...], frozenset]]] = [[] for _ in order]
    for constraint in network.constraints:
        if not constraint.scope:
            if () not in constraint.relation:
                return []
            continue
        levels = tuple(level_of[variable] for variable in constraint.scope)
        checks[max(levels)].append((levels, constraint.relation))

    domains = [sorted(network.domain(variable)) for variable in order]
    if not order:
        return [{}]

    values: list[str] = [""] * len(order)
    cursor = [0] * len(order)
    tried = [0] * len(order)
    solutions: list[Assignment] = []
    last = len(order) - 1
    level = 0
    # explicit stack: cursor[level] is the next value index to try at that level
    while level >= 0:
        if cursor[level] == len(domains[level]):
            cursor[level] = 0
            level -= 1
            continue
        values[level] = domains[level][cursor[level]]
        cursor[level] += 1
        if limit is None:
            tried[level] += 1
            if tried[level] > max_search_space:
                raise SearchSpaceTooLargeError(
                    f"Search tried more than {max_search_space} values for variable '{order[level]}'; "
                    f"raise the search-space bound or pass a solution limit."
                )
        if not all(tuple(values[index] for index in levels) in relation for levels, relation in checks[level]):
            continue
        if level < last:
            level += 1
            continue
        solutions.append(dict(zip(order, values)))
        if limit is not None and len(solutions) >= limit:
            break
    return solutions


def enumerate_solutions_naive(
    network: ConstraintNetwork,
    max_search_space: int = DEFAULT_MAX_SEARCH_SPACE,
) -> list[Assignment]:
    """Full Cartesian product filtered by every constraint."""
    _guard_search_space(network, max_search_space)
    order = network.variables
    domains = [sorted(network.domain(variable)) for variable in order]
    solutions = []
    for combination in itertools.product(*domains):
        assignment = dict(zip(order, combination))
        if satisfies(network, assignment):
            solutions.append(assignment)
    return solutions


def satisfies(network: ConstraintNetwork, assignment: Mapping[str, str]) -> bool:
    """True when a total assignment lies in every domain and every relation."""
    for variable in network.variables:
        if assignment.get(variable) not in network.domain(variable):
            return False
    return all(
        tuple(assignment[variable] for variable in constraint.scope) in constraint.relation
        for constraint in network.constraints
    )


def fix_variables(network: ConstraintNetwork, assignment: Mapping[str, str]) -> ConstraintNetwork:
    """Copy of ``network`` whose assigned variables have singleton (or empty) domains."""
    domains = {}
    for variable in network.variables:
        domain = network.domain(variable)
        if variable in assignment:
            value = assignment[variable]
            domain = frozenset({value}) if value in domain else frozenset()
        domains[variable] = domain
    return ConstraintNetwork.create(domains, network.constraints)


def _extends(network: ConstraintNetwork, partial: Mapping[str, str]) -> bool:
    return bool(solve_all(fix_variables(network, partial), limit=1))


def check_preservation(
    original: ConstraintNetwork,
    compressed: ConstraintNetwork,
    original_vars: Iterable[str],
    limit: int | None = None,
    max_search_space: int = DEFAULT_MAX_SEARCH_SPACE,
) -> Verdict:
    """Compare solutions of both networks projected onto ``original_vars``.

    When ``limit`` truncates either enumeration, every enumerated solution is
    instead checked to extend to a solution of the other network.

    Args:
        original: Network before compression.
        compressed: Network after compression.
        original_vars: Variables declared in both networks to compare on.
        limit: Optional cap on the solutions enumerated per network.
        max_search_space: Bound passed to ``solve_all``.

    Returns:
        ``EQUIVALENT``, ``SAT_MISMATCH`` when only one side has a solution,
        or ``PROJECTION_MISMATCH``.

    Raises:
        ValueError: A variable of ``original_vars`` is missing from a network.
        SearchSpaceTooLargeError: Either search outgrew ``max_search_space``.
    """
    wanted = set(original_vars)
    for variable in wanted:
        if variable not in original.domains or variable not in compressed.domains:
            raise ValueError(f"Variable '{variable}' is not declared in both networks.")
    ordered = [variable for variable in original.variables if variable in wanted]

    left = solve_all(original, limit, max_search_space)
    right = solve_all(compressed, limit, max_search_space)
    if bool(left) != bool(right):
        return Verdict.SAT_MISMATCH

    def project(solution: Assignment) -> tuple[str, ...]:
        return tuple(solution[variable] for variable in ordered)

    truncated = limit is not None and (len(left) >= limit or len(right) >= limit)
    if not truncated:
        same = {project(solution) for solution in left} == {project(solution) for solution in right}
        return Verdict.EQUIVALENT if same else Verdict.PROJECTION_MISMATCH

    for source, target in ((left, compressed), (right, original)):
        for solution in source:
            if not _extends(target, dict(zip(ordered, project(solution)))):
                return Verdict.PROJECTION_MISMATCH
    return Verdict.EQUIVALENT

"""Constraint networks made of table (extensional) constraints.

A network is an immutable value: variables in declaration order, a finite
domain per variable and a tuple of table constraints kept in id order.
Rewriting rules never mutate a network, they build a new one through
``ConstraintNetwork.with_rewrite``.

Variables, values and constraint ids are plain strings. Names starting with
the reserved prefixes ``_y`` (variables), ``_v`` (values) and ``_c``
(constraints) are fresh symbols introduced by compression.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

import networkx as nx

FRESH_VARIABLE_PREFIX = "_y"
FRESH_VALUE_PREFIX = "_v"
FRESH_CONSTRAINT_PREFIX = "_c"

ValueTuple = tuple[str, ...]

_DIGIT_RUN = re.compile(r"(\d+)")


class VariableNotInScopeError(ValueError):
    """Raised when a projection names a variable outside the constraint scope."""


class Origin(str, Enum):
    ORIGINAL = "original"
    FRESH = "fresh"


def variable_origin(name: str) -> Origin:
    return Origin.FRESH if name.startswith(FRESH_VARIABLE_PREFIX) else Origin.ORIGINAL


def value_origin(value: str) -> Origin:
    return Origin.FRESH if value.startswith(FRESH_VALUE_PREFIX) else Origin.ORIGINAL


def natural_key(text: str) -> tuple:
    """Sort key ordering ``c2`` before ``c10``."""
    parts = tuple(
        (0, int(chunk)) if chunk.isdigit() else (1, chunk)
        for chunk in _DIGIT_RUN.split(text)
        if chunk
    )
    return parts, text


def _next_index(names: Iterable[str], prefix: str) -> int:
    pattern = re.compile(rf"^{re.escape(prefix)}(\d+)$")
    highest = -1
    for name in names:
        match = pattern.match(name)
        if match:
            highest = max(highest, int(match.group(1)))
    return highest + 1


@dataclass(frozen=True)
class TableConstraint:
    """A scope (ordered, no repeats) and its set of allowed tuples."""

    id: str
    scope: tuple[str, ...]
    relation: frozenset[ValueTuple]

    @classmethod
    def create(cls, constraint_id: str, scope: Sequence[str], tuples: Iterable[Sequence[str]]) -> "TableConstraint":
        return cls(str(constraint_id), tuple(scope), frozenset(tuple(row) for row in tuples))

    @property
    def arity(self) -> int:
        return len(self.scope)

    @property
    def size(self) -> int:
        return len(self.relation) * len(self.scope)

    def position(self, variable: str) -> int:
        """0-based position of ``variable`` in the scope."""
        try:
            return self.scope.index(variable)
        except ValueError:
            raise VariableNotInScopeError(
                f"Variable '{variable}' is not in the scope of constraint '{self.id}'."
            ) from None

    def sorted_tuples(self) -> list[ValueTuple]:
        return sorted(self.relation)


@dataclass(frozen=True)
class ConstraintNetwork:
    variables: tuple[str, ...]
    domains: dict[str, frozenset[str]]
    constraints: tuple[TableConstraint, ...]

    @classmethod
    def create(
        cls,
        domains: Mapping[str, Iterable[str]],
        constraints: Iterable[TableConstraint] = (),
    ) -> "ConstraintNetwork":
        """Build a network; variable order follows the mapping's order."""
        frozen_domains = {name: frozenset(values) for name, values in domains.items()}
        ordered = tuple(sorted(constraints, key=lambda item: natural_key(item.id)))
        return cls(tuple(frozen_domains), frozen_domains, ordered)

    @property
    def constraint_ids(self) -> tuple[str, ...]:
        return tuple(constraint.id for constraint in self.constraints)

    def has_constraint(self, constraint_id: str) -> bool:
        return any(constraint.id == constraint_id for constraint in self.constraints)

    def constraint(self, constraint_id: str) -> TableConstraint:
        for constraint in self.constraints:
            if constraint.id == constraint_id:
                return constraint
        raise KeyError(f"Unknown constraint '{constraint_id}'.")

    def domain(self, variable: str) -> frozenset[str]:
        return self.domains[variable]

    @property
    def max_domain_size(self) -> int:
        return max((len(values) for values in self.domains.values()), default=0)

    def all_values(self) -> set[str]:
        values: set[str] = set()
        for domain in self.domains.values():
            values.update(domain)
        for constraint in self.constraints:
            for row in constraint.relation:
                values.update(row)
        return values

    def next_fresh_variable(self) -> str:
        return f"{FRESH_VARIABLE_PREFIX}{_next_index(self.variables, FRESH_VARIABLE_PREFIX)}"

    def next_fresh_values(self, count: int) -> list[str]:
        start = _next_index(self.all_values(), FRESH_VALUE_PREFIX)
        return [f"{FRESH_VALUE_PREFIX}{start + offset}" for offset in range(count)]

    def next_fresh_constraint_id(self) -> str:
        return f"{FRESH_CONSTRAINT_PREFIX}{_next_index(self.constraint_ids, FRESH_CONSTRAINT_PREFIX)}"

    def with_rewrite(
        self,
        *,
        removed_ids: Iterable[str],
        added: Iterable[TableConstraint],
        fresh_variable: str,
        fresh_domain: Iterable[str],
    ) -> "ConstraintNetwork":
        """Return a copy with one fresh variable and the constraint set replaced."""
        removed = set(removed_ids)
        kept = [constraint for constraint in self.constraints if constraint.id not in removed]
        domains = dict(self.domains)
        domains[fresh_variable] = frozenset(fresh_domain)
        return ConstraintNetwork.create(domains, [*kept, *added])


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    message: str


def network_size(network: ConstraintNetwork) -> int:
    """|P|: tuple count times arity, summed over all constraints."""
    return sum(constraint.size for constraint in network.constraints)


def project_tuple(row: ValueTuple, positions: Sequence[int]) -> ValueTuple:
    return tuple(row[index] for index in positions)


def project_relation(constraint: TableConstraint, variables: Sequence[str]) -> frozenset[ValueTuple]:
    """R_c[s]: the set of sub-tuples of R_c on the variables of ``s``, in ``s`` order."""
    positions = [constraint.position(variable) for variable in variables]
    return frozenset(project_tuple(row, positions) for row in constraint.relation)


def concat(left: Sequence[str], right: Sequence[str]) -> ValueTuple:
    """Tuple concatenation ``left . right``; used for scopes and rows alike."""
    return tuple(left) + tuple(right)


def is_pairwise_consistent(network: ConstraintNetwork) -> bool:
    """Every relation non-empty and every pair agrees on its shared variables.

    Shared variables are ordered by their position in the first constraint
    of the pair, on both sides.
    """
    if any(not constraint.relation for constraint in network.constraints):
        return False

    for first, second in itertools.combinations(network.constraints, 2):
        second_scope = set(second.scope)
        shared = [variable for variable in first.scope if variable in second_scope]
        if not shared:
            continue
        if project_relation(first, shared) != project_relation(second, shared):
            return False
    return True


def validate_network(network: ConstraintNetwork) -> list[Violation]:
    """Return every type-invariant violation; an empty list means valid.

    Fresh variables may have an empty domain: that is what a constraint-graph
    rewrite with an empty shared projection produces.
    """
    violations: list[Violation] = []

    seen_variables: set[str] = set()
    for variable in network.variables:
        if variable in seen_variables:
            violations.append(Violation("duplicate-variable", variable, f"Variable '{variable}' is declared twice."))
        seen_variables.add(variable)

        domain = network.domains.get(variable)
        if domain is None:
            violations.append(Violation("missing-domain", variable, f"Variable '{variable}' has no domain."))
        elif not domain and variable_origin(variable) is Origin.ORIGINAL:
            violations.append(Violation("empty-domain", variable, f"Variable '{variable}' has an empty domain."))

    for variable in network.domains:
        if variable not in seen_variables:
            violations.append(
                Violation("undeclared-variable", variable, f"Domain given for undeclared variable '{variable}'.")
            )

    seen_ids: set[str] = set()
    for constraint in network.constraints:
        if constraint.id in seen_ids:
            violations.append(
                Violation("duplicate-constraint-id", constraint.id, f"Constraint id '{constraint.id}' is used twice.")
            )
        seen_ids.add(constraint.id)

        repeated = sorted({variable for variable in constraint.scope if constraint.scope.count(variable) > 1})
        if repeated:
            violations.append(
                Violation(
                    "scope-violation",
                    constraint.id,
                    f"Constraint '{constraint.id}' repeats {', '.join(repeated)} in its scope.",
                )
            )

        for variable in constraint.scope:
            if variable not in seen_variables:
                violations.append(
                    Violation(
                        "undeclared-variable",
                        constraint.id,
                        f"Constraint '{constraint.id}' uses undeclared variable '{variable}'.",
                    )
                )

        for row in constraint.sorted_tuples():
            if len(row) != constraint.arity:
                violations.append(
                    Violation(
                        "arity-mismatch",
                        constraint.id,
                        f"Tuple {row} of '{constraint.id}' has {len(row)} values, scope has {constraint.arity}.",
                    )
                )
                continue
            for variable, value in zip(constraint.scope, row):
                domain = network.domains.get(variable)
                if domain is not None and value not in domain:
                    violations.append(
                        Violation(
                            "domain-violation",
                            constraint.id,
                            f"Tuple {row} of '{constraint.id}' gives '{value}' to '{variable}', "
                            f"outside its domain.",
                        )
                    )

    return violations


def primal_graph(network: ConstraintNetwork) -> nx.Graph:
    """Variables as nodes, an edge for every pair sharing a constraint scope."""
    graph = nx.Graph()
    graph.add_nodes_from(network.variables)
    for constraint in network.constraints:
        for left, right in itertools.combinations(constraint.scope, 2):
            if left == right:
                continue
            if graph.has_edge(left, right):
                graph[left][right]["constraints"].append(constraint.id)
            else:
                graph.add_edge(left, right, constraints=[constraint.id])
    return graph

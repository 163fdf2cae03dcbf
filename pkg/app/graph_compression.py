"""Constraint-graph rewriting (CGR).

The constraint graph becomes a transaction database with one transaction per
constraint and its scope variables as items. A frequent variable set ``s``
shared by ``k`` constraints is factored out through a fresh variable ``y``
whose values name the sub-tuples in the intersection of the projections on
``s``. Tuples whose projection lies outside that intersection are dropped.

Convention: ``n`` is the number of shared variables and ``k`` the number of
constraints rewritten.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from constraint_network import (
    ConstraintNetwork,
    TableConstraint,
    ValueTuple,
    concat,
    natural_key,
    network_size,
    project_relation,
    project_tuple,
)
from itemset_mining import MinedPattern, Transaction, TransactionDB


class CandidateError(ValueError):
    """Raised when a rewrite candidate does not fit the network it targets."""


class RuleKind(str, Enum):
    CGR = "cgr"
    MRR = "mrr"


@dataclass(frozen=True)
class RewriteRecord:
    """One applied rewrite, with enough detail to replay it by hand."""

    kind: RuleKind
    pattern: tuple[str, ...]
    fresh_variable: str
    value_map: tuple[tuple[ValueTuple, str], ...]
    removed_constraint_ids: tuple[str, ...]
    added_constraint_ids: tuple[str, ...]
    size_before: int
    size_after: int
    dropped_tuples: int = 0
    unsat: bool = False

    @property
    def delta(self) -> int:
        """Size reduction; positive when the network shrank."""
        return self.size_before - self.size_after

    @property
    def mapping(self) -> dict[ValueTuple, str]:
        return dict(self.value_map)


@dataclass(frozen=True)
class CgrCandidate:
    shared_vars: tuple[str, ...]
    constraint_ids: tuple[str, ...]

    @property
    def n(self) -> int:
        return len(self.shared_vars)

    @property
    def k(self) -> int:
        return len(self.constraint_ids)

    @property
    def support(self) -> int:
        return self.k


def build_graph_db(network: ConstraintNetwork) -> TransactionDB:
    """TD_P: one transaction per constraint, tid = constraint id, items = scope variables."""
    return TransactionDB(
        Transaction(tid=constraint.id, items=frozenset(constraint.scope)) for constraint in network.constraints
    )


def candidate_from_pattern(network: ConstraintNetwork, pattern: MinedPattern) -> CgrCandidate:
    """Shared variables in declaration order, constraints = the pattern's cover."""
    chosen = set(pattern.items)
    shared = tuple(variable for variable in network.variables if variable in chosen)
    return CgrCandidate(shared_vars=shared, constraint_ids=tuple(sorted(pattern.cover, key=natural_key)))


def validate_cgr_candidate(network: ConstraintNetwork, candidate: CgrCandidate) -> None:
    if candidate.n < 2:
        raise CandidateError(f"CGR needs at least 2 shared variables, got {candidate.n}.")
    if candidate.k < 2:
        raise CandidateError(f"CGR needs at least 2 constraints, got {candidate.k}.")
    if len(set(candidate.shared_vars)) != candidate.n:
        raise CandidateError(f"Shared variables repeat: {candidate.shared_vars}.")
    if len(set(candidate.constraint_ids)) != candidate.k:
        raise CandidateError(f"Constraint ids repeat: {candidate.constraint_ids}.")
    for constraint_id in candidate.constraint_ids:
        if not network.has_constraint(constraint_id):
            raise CandidateError(f"Unknown constraint '{constraint_id}'.")
        scope = set(network.constraint(constraint_id).scope)
        missing = [variable for variable in candidate.shared_vars if variable not in scope]
        if missing:
            raise CandidateError(f"Constraint '{constraint_id}' does not contain {', '.join(missing)}.")


def cgr_apply(network: ConstraintNetwork, candidate: CgrCandidate) -> tuple[ConstraintNetwork, RewriteRecord]:
    """Factor the shared variables of ``candidate`` out of its constraints.

    Args:
        network: Network to rewrite; it is not modified.
        candidate: Shared variables ``s`` (n >= 2) and the ids of the k >= 2
            constraints whose scopes all contain ``s``.

    Returns:
        The rewritten network and the record of the step. The network gains
        the fresh variable ``y`` with one value per sub-tuple of the shared
        projection, the interface constraint ``(y, s...)`` and every rewritten
        constraint under its old id with scope ``(residual..., y)``. The
        record has ``unsat`` set when that projection is empty.

    Raises:
        CandidateError: The candidate does not fit ``network``.
    """
    validate_cgr_candidate(network, candidate)
    shared = candidate.shared_vars
    rewritten = [network.constraint(constraint_id) for constraint_id in candidate.constraint_ids]

    common = frozenset.intersection(*(project_relation(constraint, shared) for constraint in rewritten))
    ordered = sorted(common)
    fresh_variable = network.next_fresh_variable()
    fresh_values = network.next_fresh_values(len(ordered))
    value_of = dict(zip(ordered, fresh_values))

    interface = TableConstraint.create(
        network.next_fresh_constraint_id(),
        concat((fresh_variable,), shared),
        [concat((value_of[sub_tuple],), sub_tuple) for sub_tuple in ordered],
    )

    replacements: list[TableConstraint] = []
    dropped = 0
    shared_set = set(shared)
    for constraint in rewritten:
        residual = tuple(variable for variable in constraint.scope if variable not in shared_set)
        residual_positions = [constraint.position(variable) for variable in residual]
        shared_positions = [constraint.position(variable) for variable in shared]
        rows = []
        for row in constraint.relation:
            key = project_tuple(row, shared_positions)
            if key not in value_of:
                dropped += 1
                continue
            rows.append(concat(project_tuple(row, residual_positions), (value_of[key],)))
        replacements.append(TableConstraint.create(constraint.id, concat(residual, (fresh_variable,)), rows))

    result = network.with_rewrite(
        removed_ids=candidate.constraint_ids,
        added=[interface, *replacements],
        fresh_variable=fresh_variable,
        fresh_domain=fresh_values,
    )
    record = RewriteRecord(
        kind=RuleKind.CGR,
        pattern=shared,
        fresh_variable=fresh_variable,
        value_map=tuple((sub_tuple, value_of[sub_tuple]) for sub_tuple in ordered),
        removed_constraint_ids=candidate.constraint_ids,
        added_constraint_ids=(interface.id, *candidate.constraint_ids),
        size_before=network_size(network),
        size_after=network_size(result),
        dropped_tuples=dropped,
        unsat=not ordered,
    )
    return result, record


def cgr_gain_bound(n: int, p: int, k: int) -> int:
    """Worst-case reduction n*p*k - (p*k + n*p + p) for k constraints of p tuples each."""
    if min(n, p, k) < 1:
        raise ValueError(f"n, p and k must be at least 1, got n={n}, p={p}, k={k}.")
    return n * p * k - (p * k + n * p + p)


def cgr_profitable(n: int, k: int) -> bool:
    """k > (n+1)/(n-1), compared exactly; never profitable below two shared variables."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}.")
    if n < 2:
        return False
    return Fraction(k) > Fraction(n + 1, n - 1)


def describe_candidate(candidate: CgrCandidate) -> str:
    return f"s=({','.join(candidate.shared_vars)}) cover={','.join(candidate.constraint_ids)}"

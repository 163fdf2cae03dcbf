"""Microstructure rewriting (MRR) of a single table constraint.

Each tuple becomes a transaction of position-indexed values (``b^2`` is the
value ``b`` at position 2). A frequent itemset selects a set of positions
``Y``; the rewrite introduces a fresh variable ``z`` whose values name every
distinct sub-tuple on ``Y`` and splits the table into an interface
constraint ``c_0 = (z, Y...)`` and a residual ``c' = (rest..., z)``. No tuple
is lost.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from constraint_network import (
    ConstraintNetwork,
    TableConstraint,
    ValueTuple,
    concat,
    network_size,
    project_tuple,
)
from graph_compression import CandidateError, RewriteRecord, RuleKind
from itemset_mining import MinedPattern, Transaction, TransactionDB


class IndexedItem(NamedTuple):
    value: str
    position: int

    def __str__(self) -> str:
        return f"{self.value}^{self.position}"


@dataclass(frozen=True)
class MrrCandidate:
    constraint_id: str
    items: tuple[IndexedItem, ...]
    support: int

    @property
    def positions(self) -> tuple[int, ...]:
        return tuple(item.position for item in self.items)

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def k(self) -> int:
        return self.support

    def variables(self, network: ConstraintNetwork) -> tuple[str, ...]:
        """Y = vars(index(I)), in position order."""
        scope = network.constraint(self.constraint_id).scope
        return tuple(scope[position - 1] for position in self.positions)


def indexed(row: Sequence[str]) -> tuple[IndexedItem, ...]:
    return tuple(IndexedItem(value, position) for position, value in enumerate(row, start=1))


def tid_width(count: int) -> int:
    return max(3, len(str(count)))


def build_constraint_db(constraint: TableConstraint) -> TransactionDB:
    """TD_c: tuples sorted lexicographically and numbered 001, 002, ..."""
    rows = constraint.sorted_tuples()
    width = tid_width(len(rows))
    return TransactionDB(
        Transaction(tid=str(number).zfill(width), items=frozenset(indexed(row)))
        for number, row in enumerate(rows, start=1)
    )


def candidate_from_pattern(constraint_id: str, pattern: MinedPattern) -> MrrCandidate:
    items = tuple(sorted(pattern.items, key=lambda item: (item.position, item.value)))
    return MrrCandidate(constraint_id=constraint_id, items=items, support=pattern.support)


def validate_mrr_candidate(network: ConstraintNetwork, candidate: MrrCandidate) -> None:
    if not network.has_constraint(candidate.constraint_id):
        raise CandidateError(f"Unknown constraint '{candidate.constraint_id}'.")
    if candidate.n < 1:
        raise CandidateError("MRR needs at least one indexed value.")
    if candidate.k < 1:
        raise CandidateError(f"MRR support must be at least 1, got {candidate.k}.")

    arity = network.constraint(candidate.constraint_id).arity
    positions = candidate.positions
    if len(set(positions)) != len(positions):
        raise CandidateError(f"Itemset puts two values on one position: {[str(item) for item in candidate.items]}.")
    if list(positions) != sorted(positions):
        raise CandidateError(f"Positions must be increasing, got {positions}.")
    outside = [position for position in positions if not 1 <= position <= arity]
    if outside:
        raise CandidateError(f"Positions {outside} fall outside 1..{arity}.")


def mrr_apply(network: ConstraintNetwork, candidate: MrrCandidate) -> tuple[ConstraintNetwork, RewriteRecord]:
    """Split one table on the positions of an indexed itemset.

    Args:
        network: Network holding the table; it is not modified.
        candidate: Target constraint id and the indexed values whose
            positions ``Y`` are factored out.

    Returns:
        The rewritten network and the record of the step. The table is
        replaced by the interface ``(z, Y...)`` over every distinct sub-tuple
        on ``Y`` and the remainder ``(rest..., z)`` under the old id, one row
        per original tuple.

    Raises:
        CandidateError: The candidate does not fit ``network``.
    """
    validate_mrr_candidate(network, candidate)
    constraint = network.constraint(candidate.constraint_id)
    factored_positions = [position - 1 for position in candidate.positions]
    factored = tuple(constraint.scope[position] for position in factored_positions)
    residual_positions = [position for position in range(constraint.arity) if position not in factored_positions]
    residual = tuple(constraint.scope[position] for position in residual_positions)

    ordered = sorted({project_tuple(row, factored_positions) for row in constraint.relation})
    fresh_variable = network.next_fresh_variable()
    fresh_values = network.next_fresh_values(len(ordered))
    value_of = dict(zip(ordered, fresh_values))

    interface = TableConstraint.create(
        network.next_fresh_constraint_id(),
        concat((fresh_variable,), factored),
        [concat((value_of[sub_tuple],), sub_tuple) for sub_tuple in ordered],
    )
    remainder = TableConstraint.create(
        constraint.id,
        concat(residual, (fresh_variable,)),
        [
            concat(project_tuple(row, residual_positions), (value_of[project_tuple(row, factored_positions)],))
            for row in constraint.relation
        ],
    )

    result = network.with_rewrite(
        removed_ids=(constraint.id,),
        added=[interface, remainder],
        fresh_variable=fresh_variable,
        fresh_domain=fresh_values,
    )
    record = RewriteRecord(
        kind=RuleKind.MRR,
        pattern=tuple(str(item) for item in candidate.items),
        fresh_variable=fresh_variable,
        value_map=tuple((sub_tuple, value_of[sub_tuple]) for sub_tuple in ordered),
        removed_constraint_ids=(constraint.id,),
        added_constraint_ids=(interface.id, constraint.id),
        size_before=network_size(network),
        size_after=network_size(result),
    )
    return result, record


def reconstruct_relation(
    interface: TableConstraint,
    remainder: TableConstraint,
    scope: Sequence[str],
    fresh_variable: str,
) -> frozenset[ValueTuple]:
    """Join ``c'`` with ``c_0`` on the fresh variable and project back onto ``scope``."""
    link = interface.position(fresh_variable)
    by_value: dict[str, list[ValueTuple]] = {}
    for row in interface.relation:
        by_value.setdefault(row[link], []).append(row)

    rebuilt = set()
    remainder_link = remainder.position(fresh_variable)
    for row in remainder.relation:
        for partner in by_value.get(row[remainder_link], []):
            values = dict(zip(interface.scope, partner))
            values.update(zip(remainder.scope, row))
            rebuilt.add(tuple(values[variable] for variable in scope))
    return frozenset(rebuilt)


def _check_counts(n: int, p: int, k: int) -> None:
    if min(n, p, k) < 1:
        raise ValueError(f"n, p and k must be at least 1, got n={n}, p={p}, k={k}.")
    if k > p:
        raise ValueError(f"Support k={k} cannot exceed the tuple count p={p}.")


def mrr_gain_bound(n: int, p: int, k: int) -> int:
    """Worst-case reduction n*k - (p + 1 + n + (p - k)), i.e. one sub-tuple per uncovered tuple."""
    _check_counts(n, p, k)
    return n * k - (p + 1 + n + (p - k))


def mrr_profitable(n: int, p: int, k: int) -> bool:
    """k > (2p + n + 1)/(n + 1), compared exactly."""
    _check_counts(n, p, k)
    return Fraction(k) > Fraction(2 * p + n + 1, n + 1)


def describe_candidate(candidate: MrrCandidate) -> str:
    return f"{candidate.constraint_id} I={{{', '.join(str(item) for item in candidate.items)}}} k={candidate.k}"

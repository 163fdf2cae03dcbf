"""Transaction databases and frequent / closed / maximal itemset mining.

A ``TransactionDB`` stores its transactions as a boolean occurrence matrix
(rows are transactions, columns are items in canonical order). Covers are
column conjunctions and closures are row conjunctions, which is all the LCM
closure-extension enumeration needs.

Items are opaque but must be mutually comparable: their natural order is the
canonical item order. The empty itemset is never reported as a pattern.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

import numpy as np

DEFAULT_ORACLE_ALPHABET_BOUND = 20


class DuplicateTransactionError(ValueError):
    """Raised when two transactions share a transaction identifier."""


class EmptyDatabaseError(ValueError):
    """Raised when a frequency is requested over an empty database."""


class AlphabetTooLargeError(ValueError):
    """Raised when the exhaustive oracle is asked to enumerate too many subsets."""


class PatternKind(str, Enum):
    FREQUENT = "frequent"
    CLOSED = "closed"
    MAXIMAL = "maximal"


@dataclass(frozen=True)
class Transaction:
    tid: str
    items: frozenset


@dataclass(frozen=True)
class MinedPattern:
    items: tuple
    support: int
    cover: frozenset[str]
    kind: PatternKind

    @property
    def itemset(self) -> frozenset:
        return frozenset(self.items)

    def render(self) -> str:
        return "{" + ", ".join(str(item) for item in self.items) + "}"


class TransactionDB:
    """A finite set of (tid, itemset) pairs over a fixed item alphabet."""

    def __init__(self, transactions: Iterable[Transaction], alphabet: Iterable[Hashable] | None = None):
        rows = list(transactions)

        seen: set[str] = set()
        for transaction in rows:
            if transaction.tid in seen:
                raise DuplicateTransactionError(f"Transaction id '{transaction.tid}' appears twice.")
            seen.add(transaction.tid)

        used = set().union(*(transaction.items for transaction in rows)) if rows else set()
        if alphabet is None:
            universe = used
        else:
            universe = set(alphabet)
            outside = used - universe
            if outside:
                raise ValueError(f"Transactions use items outside the alphabet: {sorted(outside)}")

        self._transactions = tuple(rows)
        self._alphabet = tuple(sorted(universe))
        self._index = {item: position for position, item in enumerate(self._alphabet)}

        matrix = np.zeros((len(rows), len(self._alphabet)), dtype=bool)
        for row, transaction in enumerate(rows):
            for item in transaction.items:
                matrix[row, self._index[item]] = True
        matrix.setflags(write=False)
        self._matrix = matrix

    def __len__(self) -> int:
        return len(self._transactions)

    @property
    def transactions(self) -> tuple[Transaction, ...]:
        return self._transactions

    @property
    def tids(self) -> tuple[str, ...]:
        return tuple(transaction.tid for transaction in self._transactions)

    @property
    def alphabet(self) -> tuple:
        return self._alphabet

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    def cover_mask(self, itemset: Iterable[Hashable]) -> np.ndarray:
        mask = np.ones(len(self._transactions), dtype=bool)
        for item in itemset:
            column = self._index.get(item)
            if column is None:
                return np.zeros(len(self._transactions), dtype=bool)
            mask &= self._matrix[:, column]
        return mask

    def tids_of(self, mask: np.ndarray) -> frozenset[str]:
        return frozenset(self._transactions[row].tid for row in np.flatnonzero(mask))

    def dump(self) -> str:
        """Render ``tid: item item ...`` lines, items in canonical order."""
        lines = []
        for transaction in self._transactions:
            items = " ".join(str(item) for item in sorted(transaction.items))
            lines.append(f"{transaction.tid}: {items}".rstrip())
        return "\n".join(lines) + ("\n" if lines else "")


def cover(itemset: Iterable[Hashable], db: TransactionDB) -> frozenset[str]:
    """Tids of the transactions containing every item of ``itemset``.

    Args:
        itemset: Items to look up. The empty itemset covers every transaction.
        db: Transaction database.

    Returns:
        The covering tids. An item outside the alphabet gives the empty set.
    """
    return db.tids_of(db.cover_mask(itemset))


def support(itemset: Iterable[Hashable], db: TransactionDB) -> int:
    """Absolute support, ``len(cover(itemset, db))``."""
    return int(db.cover_mask(itemset).sum())


def frequency(itemset: Iterable[Hashable], db: TransactionDB) -> Fraction:
    if len(db) == 0:
        raise EmptyDatabaseError("Frequency is undefined over an empty transaction database.")
    return Fraction(support(itemset, db), len(db))


def _pattern_sort_key(pattern: MinedPattern) -> tuple:
    return -pattern.support, -len(pattern.items), pattern.items


def _build_pattern(db: TransactionDB, columns: Sequence[int], mask: np.ndarray, kind: PatternKind) -> MinedPattern:
    items = tuple(db.alphabet[column] for column in sorted(columns))
    return MinedPattern(items=items, support=int(mask.sum()), cover=db.tids_of(mask), kind=kind)


def _frequent_columns(db: TransactionDB, min_support: int) -> list[tuple[tuple[int, ...], np.ndarray]]:
    matrix = db.matrix
    found: list[tuple[tuple[int, ...], np.ndarray]] = []
    stack: list[tuple[tuple[int, ...], np.ndarray, int]] = [((), np.ones(len(db), dtype=bool), -1)]
    while stack:
        columns, mask, last = stack.pop()
        for column in range(last + 1, matrix.shape[1]):
            extended = mask & matrix[:, column]
            if int(extended.sum()) < min_support:
                continue
            grown = columns + (column,)
            found.append((grown, extended))
            stack.append((grown, extended, column))
    return found


def _closed_columns(db: TransactionDB, min_support: int) -> list[tuple[tuple[int, ...], np.ndarray]]:
    """LCM: enumerate each closed set once through prefix-preserving closure extensions."""
    matrix = db.matrix
    if len(db) < min_support or len(db) == 0:
        return []

    def closure(mask: np.ndarray) -> np.ndarray:
        return matrix[mask].all(axis=0)

    found: list[tuple[tuple[int, ...], np.ndarray]] = []
    everything = np.ones(len(db), dtype=bool)
    root = closure(everything)
    if root.any():
        found.append((tuple(np.flatnonzero(root)), everything))

    stack: list[tuple[np.ndarray, np.ndarray, int]] = [(root, everything, -1)]
    while stack:
        itemset, mask, core = stack.pop()
        for column in range(core + 1, matrix.shape[1]):
            if itemset[column]:
                continue
            extended = mask & matrix[:, column]
            if int(extended.sum()) < min_support:
                continue
            closed = closure(extended)
            # prefix-preserving: nothing below the extension item may be added
            if not np.array_equal(closed[:column], itemset[:column]):
                continue
            found.append((tuple(np.flatnonzero(closed)), extended))
            stack.append((closed, extended, column))
    return found


def _maximal_only(closed: list[tuple[tuple[int, ...], np.ndarray]]) -> list[tuple[tuple[int, ...], np.ndarray]]:
    as_sets = [frozenset(columns) for columns, _ in closed]
    return [
        entry
        for entry, candidate in zip(closed, as_sets)
        if not any(candidate < other for other in as_sets)
    ]


def mine(db: TransactionDB, min_support: int, mode: PatternKind | str = PatternKind.CLOSED) -> tuple[MinedPattern, ...]:
    """Mine frequent, closed or maximal itemsets.

    Args:
        db: Transaction database.
        min_support: Absolute threshold; a pattern needs this many covering
            transactions.
        mode: Pattern family, a ``PatternKind`` or its value.

    Returns:
        Non-empty patterns sorted by support (desc), size (desc), then items.

    Raises:
        ValueError: ``min_support`` is below 1 or ``mode`` is unknown.
    """
    if min_support < 1:
        raise ValueError(f"Minimum support must be at least 1, got {min_support}.")
    kind = PatternKind(mode)

    if kind is PatternKind.FREQUENT:
        entries = _frequent_columns(db, min_support)
    else:
        entries = _closed_columns(db, min_support)
        if kind is PatternKind.MAXIMAL:
            entries = _maximal_only(entries)

    patterns = [_build_pattern(db, columns, mask, kind) for columns, mask in entries]
    return tuple(sorted(patterns, key=_pattern_sort_key))


def oracle_mine(
    db: TransactionDB,
    min_support: int,
    mode: PatternKind | str = PatternKind.CLOSED,
    max_alphabet: int = DEFAULT_ORACLE_ALPHABET_BOUND,
) -> tuple[MinedPattern, ...]:
    """Exhaustive reference miner: every subset of the alphabet, definitions applied directly.

    Subsets and covers are plain integer bitsets here, independent of the
    occurrence matrix used by ``mine``.
    """
    if min_support < 1:
        raise ValueError(f"Minimum support must be at least 1, got {min_support}.")
    kind = PatternKind(mode)
    alphabet = db.alphabet
    if len(alphabet) > max_alphabet:
        raise AlphabetTooLargeError(
            f"Alphabet has {len(alphabet)} items, the exhaustive oracle is bounded to {max_alphabet}."
        )

    transactions = db.transactions
    item_covers = []
    for item in alphabet:
        bits = 0
        for row, transaction in enumerate(transactions):
            if item in transaction.items:
                bits |= 1 << row
        item_covers.append(bits)

    subset_count = 1 << len(alphabet)
    covers = [0] * subset_count
    covers[0] = (1 << len(transactions)) - 1
    for subset in range(1, subset_count):
        lowest = subset & -subset
        covers[subset] = covers[subset ^ lowest] & item_covers[lowest.bit_length() - 1]

    def is_frequent(subset: int) -> bool:
        return bin(covers[subset]).count("1") >= min_support

    selected: list[int] = []
    for subset in range(1, subset_count):
        if not is_frequent(subset):
            continue
        outside = [1 << index for index in range(len(alphabet)) if not subset & (1 << index)]
        if kind is PatternKind.CLOSED and any(covers[subset | bit] == covers[subset] for bit in outside):
            continue
        if kind is PatternKind.MAXIMAL and any(is_frequent(subset | bit) for bit in outside):
            continue
        selected.append(subset)

    patterns = []
    for subset in selected:
        items = tuple(alphabet[index] for index in range(len(alphabet)) if subset & (1 << index))
        tids = frozenset(transactions[row].tid for row in range(len(transactions)) if covers[subset] >> row & 1)
        patterns.append(MinedPattern(items=items, support=len(tids), cover=tids, kind=kind))
    return tuple(sorted(patterns, key=_pattern_sort_key))

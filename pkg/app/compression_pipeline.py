"""End-to-end compression: coarse-grained CGR pass, then fine-grained MRR pass.

Both passes are greedy. Each iteration re-mines the current network, trial
applies every candidate to measure its exact size change, keeps the best
strictly positive one and starts over. Ties go to the larger pattern, then
to the lexicographically smaller one.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
from pathlib import Path
from typing import Any

import console
from brute_force_verifier import VerificationLimits
from constraint_network import ConstraintNetwork, network_size
from graph_compression import (
    RewriteRecord,
    build_graph_db,
    candidate_from_pattern as cgr_candidate_from_pattern,
    cgr_apply,
    cgr_profitable,
    describe_candidate as describe_cgr,
)
from itemset_mining import PatternKind, mine
from table_compression import (
    build_constraint_db,
    candidate_from_pattern as mrr_candidate_from_pattern,
    describe_candidate as describe_mrr,
    mrr_apply,
    mrr_profitable,
)


class ConfigError(ValueError):
    """Raised for invalid compression settings or unreadable profiles."""


class GainMode(str, Enum):
    EXACT_TRIAL = "exact"
    PREFILTER = "prefilter"


class PassSelection(str, Enum):
    GRAPH_AND_TABLE = "graph,table"
    GRAPH_ONLY = "graph"
    TABLE_ONLY = "table"

    @classmethod
    def parse(cls, text: str) -> "PassSelection":
        names = {part.strip().lower() for part in text.split(",") if part.strip()}
        if names == {"graph", "table"}:
            return cls.GRAPH_AND_TABLE
        if names == {"graph"}:
            return cls.GRAPH_ONLY
        if names == {"table"}:
            return cls.TABLE_ONLY
        raise ConfigError(f"Unknown pass selection '{text}'; use graph, table or graph,table.")


@dataclass(frozen=True)
class CompressionConfig:
    min_support: int = 2
    pattern_kind: PatternKind = PatternKind.CLOSED
    max_iterations: int = 100
    gain_mode: GainMode = GainMode.EXACT_TRIAL
    passes: PassSelection = PassSelection.GRAPH_AND_TABLE

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "pattern_kind", PatternKind(self.pattern_kind))
            object.__setattr__(self, "gain_mode", GainMode(self.gain_mode))
            passes = self.passes
            if not isinstance(passes, PassSelection):
                passes = PassSelection.parse(str(passes))
            object.__setattr__(self, "passes", passes)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

        if self.pattern_kind is PatternKind.FREQUENT:
            raise ConfigError("Compression mines closed or maximal patterns, not all frequent ones.")
        if not isinstance(self.min_support, int) or self.min_support < 2:
            raise ConfigError(f"min_support must be an integer of at least 2, got {self.min_support!r}.")
        if not isinstance(self.max_iterations, int) or self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be an integer of at least 1, got {self.max_iterations!r}.")

    @property
    def runs_graph(self) -> bool:
        return self.passes in (PassSelection.GRAPH_AND_TABLE, PassSelection.GRAPH_ONLY)

    @property
    def runs_table(self) -> bool:
        return self.passes in (PassSelection.GRAPH_AND_TABLE, PassSelection.TABLE_ONLY)

    def with_overrides(self, **overrides: Any) -> "CompressionConfig":
        return replace(self, **{key: value for key, value in overrides.items() if value is not None})

    def to_dict(self) -> dict[str, Any]:
        return {
            "min_support": self.min_support,
            "pattern_kind": self.pattern_kind.value,
            "max_iterations": self.max_iterations,
            "gain_mode": self.gain_mode.value,
            "passes": self.passes.value,
        }


def load_profile(path: str | Path) -> tuple[CompressionConfig, VerificationLimits]:
    """Read a ``configs/compression/*.json`` profile."""
    profile_path = Path(path)
    try:
        data = json.loads(profile_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"Profile '{profile_path}' was not found.") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Profile '{profile_path}' is not valid JSON (line {exc.lineno}).") from None

    if not isinstance(data, dict):
        raise ConfigError(f"Profile '{profile_path}' must be a JSON object.")

    sections = {"compression": CompressionConfig, "verification": VerificationLimits}
    unknown_sections = set(data) - set(sections)
    if unknown_sections:
        raise ConfigError(f"Unknown profile sections: {', '.join(sorted(unknown_sections))}.")

    built = []
    for name, target in sections.items():
        section = data.get(name, {})
        if not isinstance(section, dict):
            raise ConfigError(f"Profile section '{name}' must be an object.")
        allowed = {item.name for item in fields(target)}
        unknown = set(section) - allowed
        if unknown:
            raise ConfigError(f"Unknown keys in '{name}': {', '.join(sorted(unknown))}.")
        try:
            built.append(target(**section))
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"Invalid '{name}' section: {exc}") from None
    return built[0], built[1]


@dataclass
class PassStats:
    name: str
    iterations: int = 0
    candidates_considered: int = 0
    accepted: int = 0
    rejected_by_gain: int = 0
    rejected_by_prefilter: int = 0

    def absorb(self, other: "PassStats") -> None:
        self.iterations += other.iterations
        self.candidates_considered += other.candidates_considered
        self.accepted += other.accepted
        self.rejected_by_gain += other.rejected_by_gain
        self.rejected_by_prefilter += other.rejected_by_prefilter


@dataclass
class PassReport:
    stats: PassStats
    records: list[RewriteRecord] = field(default_factory=list)
    unsat_detected: bool = False


@dataclass(frozen=True)
class CompressionReport:
    input_size: int
    output_size: int
    records: tuple[RewriteRecord, ...]
    passes: tuple[PassStats, ...]
    rounds: int
    unsat_detected: bool
    config: CompressionConfig

    @property
    def total_delta(self) -> int:
        return sum(record.delta for record in self.records)

    def to_dict(self) -> dict[str, Any]:
        return {
            "input_size": self.input_size,
            "output_size": self.output_size,
            "unsat_detected": self.unsat_detected,
            "rounds": self.rounds,
            "config": self.config.to_dict(),
            "passes": [asdict(stats) for stats in self.passes],
            "records": [
                {
                    "kind": record.kind.value,
                    "pattern": list(record.pattern),
                    "fresh_variable": record.fresh_variable,
                    "value_map": [
                        {"sub_tuple": list(sub_tuple), "value": value} for sub_tuple, value in record.value_map
                    ],
                    "removed_constraints": list(record.removed_constraint_ids),
                    "added_constraints": list(record.added_constraint_ids),
                    "size_before": record.size_before,
                    "size_after": record.size_after,
                    "delta": record.delta,
                    "dropped_tuples": record.dropped_tuples,
                    "unsat": record.unsat,
                }
                for record in self.records
            ],
        }


def compress_graph_pass(
    network: ConstraintNetwork,
    config: CompressionConfig,
) -> tuple[ConstraintNetwork, PassReport]:
    """Greedy CGR loop: mine, try every candidate, keep the best strict gain.

    Stops when no candidate shrinks the network or the iteration cap is
    reached. An empty shared projection ends the pass with ``unsat_detected`` set.
    """
    report = PassReport(stats=PassStats("graph"))
    stats = report.stats
    current = network

    for _ in range(config.max_iterations):
        stats.iterations += 1
        patterns = mine(build_graph_db(current), config.min_support, config.pattern_kind)

        best = None
        for pattern in patterns:
            if len(pattern.items) < 2:
                continue
            candidate = cgr_candidate_from_pattern(current, pattern)
            stats.candidates_considered += 1
            if config.gain_mode is GainMode.PREFILTER and not cgr_profitable(candidate.n, candidate.k):
                stats.rejected_by_prefilter += 1
                continue
            trial, record = cgr_apply(current, candidate)
            if record.delta <= 0:
                stats.rejected_by_gain += 1
                continue
            rank = (-record.delta, -candidate.n, candidate.shared_vars, candidate.constraint_ids)
            if best is None or rank < best[0]:
                best = (rank, trial, record, candidate)

        if best is None:
            break

        _, current, record, candidate = best
        stats.accepted += 1
        report.records.append(record)
        console.log(
            "cgr",
            f"accepted {describe_cgr(candidate)} fresh={record.fresh_variable} "
            f"delta=+{record.delta} ({record.size_before} -> {record.size_after}) dropped={record.dropped_tuples}",
        )
        if record.unsat:
            report.unsat_detected = True
            console.warn("cgr", f"empty shared projection on {describe_cgr(candidate)}: network is unsatisfiable")
            break

    return current, report


def compress_table_pass(
    network: ConstraintNetwork,
    config: CompressionConfig,
) -> tuple[ConstraintNetwork, PassReport]:
    """Greedy MRR loop run table by table until no table shrinks.

    Args:
        network: Network to compress.
        config: Support threshold, pattern family, gain mode and iteration cap.

    Returns:
        The compressed network and the pass report. Every table, including
        interface tables added during the pass, is left with no profitable
        candidate unless the iteration cap cut it short.
    """
    report = PassReport(stats=PassStats("table"))
    stats = report.stats
    current = network

    # interface tables added by accepted rewrites join the end of the worklist
    worklist = list(current.constraint_ids)
    for constraint_id in worklist:
        for _ in range(config.max_iterations):
            stats.iterations += 1
            constraint = current.constraint(constraint_id)
            tuple_count = len(constraint.relation)
            patterns = mine(build_constraint_db(constraint), config.min_support, config.pattern_kind)

            best = None
            tried_positions: set[tuple[int, ...]] = set()
            for pattern in patterns:
                candidate = mrr_candidate_from_pattern(constraint_id, pattern)
                # patterns on the same positions give the same rewrite; keep the best supported one
                if candidate.positions in tried_positions:
                    continue
                tried_positions.add(candidate.positions)
                stats.candidates_considered += 1
                if config.gain_mode is GainMode.PREFILTER and not mrr_profitable(
                    candidate.n, tuple_count, candidate.k
                ):
                    stats.rejected_by_prefilter += 1
                    continue
                trial, record = mrr_apply(current, candidate)
                if record.delta <= 0:
                    stats.rejected_by_gain += 1
                    continue
                rank = (-record.delta, -candidate.n, record.pattern)
                if best is None or rank < best[0]:
                    best = (rank, trial, record, candidate)

            if best is None:
                break

            _, current, record, candidate = best
            stats.accepted += 1
            report.records.append(record)
            worklist.extend(added for added in record.added_constraint_ids if added != constraint_id)
            console.log(
                "mrr",
                f"accepted {describe_mrr(candidate)} fresh={record.fresh_variable} "
                f"delta=+{record.delta} ({record.size_before} -> {record.size_after})",
            )

    return current, report


def compress(
    network: ConstraintNetwork,
    config: CompressionConfig | None = None,
) -> tuple[ConstraintNetwork, CompressionReport]:
    """Compress ``network`` with the passes selected in ``config``.

    With both passes enabled, graph-then-table rounds repeat while the table
    pass still accepts a rewrite, so the result is a fixpoint of another run.

    Args:
        network: Input network; it is not modified.
        config: Pipeline settings. Defaults to ``CompressionConfig()``.

    Returns:
        The compressed network and the report of every accepted rewrite.
        Rewriting stops as soon as the graph pass detects unsatisfiability.
    """
    config = config or CompressionConfig()
    input_size = network_size(network)
    graph_stats = PassStats("graph")
    table_stats = PassStats("table")
    records: list[RewriteRecord] = []
    unsat = False
    rounds = 0
    current = network

    console.log("pipeline", f"input size={input_size} constraints={len(network.constraints)} passes={config.passes.value}")
    while True:
        rounds += 1
        if config.runs_graph:
            current, graph_report = compress_graph_pass(current, config)
            graph_stats.absorb(graph_report.stats)
            records.extend(graph_report.records)
            if graph_report.unsat_detected:
                unsat = True
                break

        table_accepted = 0
        if config.runs_table:
            current, table_report = compress_table_pass(current, config)
            table_stats.absorb(table_report.stats)
            records.extend(table_report.records)
            table_accepted = table_report.stats.accepted

        if not (config.runs_graph and config.runs_table and table_accepted):
            break

    output_size = network_size(current)
    console.log("pipeline", f"output size={output_size} rewrites={len(records)} rounds={rounds}")

    passes = tuple(
        stats
        for stats, enabled in ((graph_stats, config.runs_graph), (table_stats, config.runs_table))
        if enabled
    )
    report = CompressionReport(
        input_size=input_size,
        output_size=output_size,
        records=tuple(records),
        passes=passes,
        rounds=rounds,
        unsat_detected=unsat,
        config=config,
    )
    return current, report

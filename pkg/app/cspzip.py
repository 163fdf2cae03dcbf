"""Command line entry point: stats, mine, compress and verify table-constraint instances.

Usage:
    python3 cspzip.py stats shared_pair.json
    python3 cspzip.py mine --db graph --min-support 2 --mode closed shared_pair.json
    python3 cspzip.py compress shared_pair.json -o out.json --report report.json
    python3 cspzip.py verify shared_pair.json out.json

Exit codes: 0 success, 1 usage/parse/validation error, 2 verification
mismatch, 3 resource bound exceeded.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import networkx as nx

import console
from brute_force_verifier import SearchSpaceTooLargeError, VerificationLimits, Verdict, check_preservation
from compression_pipeline import CompressionConfig, compress, load_profile
from constraint_network import ConstraintNetwork, is_pairwise_consistent, natural_key, network_size, primal_graph
from graph_compression import build_graph_db
from itemset_mining import AlphabetTooLargeError, PatternKind, TransactionDB, mine, oracle_mine
from instance_io import read_instance, serialize_report, write_instance
from table_compression import build_constraint_db

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MISMATCH = 2
EXIT_RESOURCE = 3


class UsageError(ValueError):
    """Raised for malformed command lines."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise UsageError(f"{self.prog}: {message}")


def _profile_settings(path: str | None) -> tuple[CompressionConfig, VerificationLimits]:
    if path is None:
        return CompressionConfig(), VerificationLimits()
    return load_profile(path)


def _select_db(network: ConstraintNetwork, selector: str) -> TransactionDB:
    if selector == "graph":
        return build_graph_db(network)
    if selector.startswith("constraint:"):
        constraint_id = selector.split(":", 1)[1]
        if not network.has_constraint(constraint_id):
            raise UsageError(f"Unknown constraint '{constraint_id}'.")
        return build_constraint_db(network.constraint(constraint_id))
    raise UsageError(f"--db must be 'graph' or 'constraint:<id>', got '{selector}'.")


def run_stats(args: argparse.Namespace) -> int:
    network = read_instance(args.instance).network
    graph = primal_graph(network)
    print(f"size: {network_size(network)}")
    print(f"variables: {len(network.variables)}")
    print(f"constraints: {len(network.constraints)}")
    print(f"max_domain: {network.max_domain_size}")
    print(f"primal_edges: {graph.number_of_edges()}")
    print(f"components: {nx.number_connected_components(graph) if len(graph) else 0}")
    print(f"pairwise_consistent: {'yes' if is_pairwise_consistent(network) else 'no'}")
    for constraint in network.constraints:
        print(
            f"constraint {constraint.id}: arity={constraint.arity} "
            f"tuples={len(constraint.relation)} size={constraint.size}"
        )
    return EXIT_OK


def run_mine(args: argparse.Namespace) -> int:
    _, limits = _profile_settings(args.profile)
    network = read_instance(args.instance).network
    db = _select_db(network, args.db)
    if args.dump_db:
        sys.stdout.write(db.dump())

    if args.oracle:
        patterns = oracle_mine(db, args.min_support, args.mode, max_alphabet=limits.max_oracle_alphabet)
    else:
        patterns = mine(db, args.min_support, args.mode)
    console.log("mine", f"{len(patterns)} {args.mode} pattern(s) over {len(db)} transaction(s)")

    for pattern in patterns:
        cover = ",".join(sorted(pattern.cover, key=natural_key))
        print(f"{pattern.render()} support={pattern.support} cover={cover}")
    return EXIT_OK


def run_compress(args: argparse.Namespace) -> int:
    base, _ = _profile_settings(args.profile)
    config = base.with_overrides(
        min_support=args.min_support,
        pattern_kind=args.patterns,
        passes=args.passes,
        gain_mode=args.gain,
        max_iterations=args.max_iters,
    )
    parsed = read_instance(args.instance)
    console.log("load", f"{args.instance}: size={network_size(parsed.network)}")

    compressed, report = compress(parsed.network, config)
    write_instance(compressed, args.output)
    console.log("save", f"wrote {args.output}")
    if args.report:
        Path(args.report).write_text(serialize_report(report), encoding="utf-8", newline="\n")
        console.log("save", f"wrote report {args.report}")

    print(
        f"size {report.input_size} -> {report.output_size} "
        f"({len(report.records)} rewrite(s){', unsatisfiable' if report.unsat_detected else ''})"
    )
    return EXIT_OK


def run_verify(args: argparse.Namespace) -> int:
    _, limits = _profile_settings(args.profile)
    original = read_instance(args.original).network
    compressed = read_instance(args.compressed).network
    missing = [variable for variable in original.variables if variable not in compressed.domains]
    if missing:
        print(f"verdict: {Verdict.PROJECTION_MISMATCH.value}")
        console.error(f"Compressed instance lacks original variable(s): {', '.join(missing)}")
        return EXIT_MISMATCH

    verdict = check_preservation(
        original,
        compressed,
        original.variables,
        limit=args.limit,
        max_search_space=limits.max_search_space,
    )
    print(f"verdict: {verdict.value}")
    return EXIT_OK if verdict is Verdict.EQUIVALENT else EXIT_MISMATCH


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got '{text}'") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--quiet", action="store_true", help="silence [CSPZIP ...] progress lines")

    parser = _Parser(prog="cspzip.py", description="Mining-based compression of table-constraint networks.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    stats = subparsers.add_parser("stats", parents=[common], help="print size and shape of an instance")
    stats.add_argument("instance")
    stats.set_defaults(handler=run_stats)

    mine_parser = subparsers.add_parser("mine", parents=[common], help="mine itemsets from a transaction database")
    mine_parser.add_argument("instance")
    mine_parser.add_argument("--db", default="graph", help="'graph' or 'constraint:<id>'")
    mine_parser.add_argument("--min-support", type=_positive_int, default=2)
    mine_parser.add_argument("--mode", choices=[kind.value for kind in PatternKind], default=PatternKind.CLOSED.value)
    mine_parser.add_argument("--dump-db", action="store_true", help="print the transaction database first")
    mine_parser.add_argument("--oracle", action="store_true", help="use the exhaustive reference miner")
    mine_parser.add_argument("--profile", help="JSON profile under configs/compression/")
    mine_parser.set_defaults(handler=run_mine)

    compress_parser = subparsers.add_parser("compress", parents=[common], help="compress an instance")
    compress_parser.add_argument("instance")
    compress_parser.add_argument("-o", "--output", required=True)
    compress_parser.add_argument("--min-support", type=_positive_int)
    compress_parser.add_argument("--patterns", choices=[PatternKind.CLOSED.value, PatternKind.MAXIMAL.value])
    compress_parser.add_argument("--passes", help="graph, table or graph,table")
    compress_parser.add_argument("--gain", choices=["exact", "prefilter"])
    compress_parser.add_argument("--max-iters", type=_positive_int)
    compress_parser.add_argument("--report", help="write the JSON compression report here")
    compress_parser.add_argument("--profile", help="JSON profile under configs/compression/")
    compress_parser.set_defaults(handler=run_compress)

    verify_parser = subparsers.add_parser("verify", parents=[common], help="check a compressed instance")
    verify_parser.add_argument("original")
    verify_parser.add_argument("compressed")
    verify_parser.add_argument("--limit", type=_positive_int, help="stop each enumeration after N solutions")
    verify_parser.add_argument("--profile", help="JSON profile under configs/compression/")
    verify_parser.set_defaults(handler=run_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        console.error(str(exc))
        return EXIT_USAGE

    console.set_enabled(not args.quiet)
    try:
        return args.handler(args)
    except (SearchSpaceTooLargeError, AlphabetTooLargeError) as exc:
        console.error(str(exc))
        return EXIT_RESOURCE
    except OSError as exc:
        console.error(f"Could not access '{exc.filename}': {exc.strerror}")
        return EXIT_USAGE
    except ValueError as exc:
        console.error(str(exc))
        return EXIT_USAGE
    finally:
        console.set_enabled(False)


if __name__ == "__main__":
    raise SystemExit(main())

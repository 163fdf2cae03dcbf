"""Instance file handling and command line checks.

The command line checks run ``app/cspzip.py`` in a child interpreter inside
a temporary directory, so they exercise argument parsing, exit codes and
the files the tool writes.
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

_TESTING_SCRIPTS = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(_TESTING_SCRIPTS))

import numpy as np

from common.check_runner import (
    FIXTURES_DIR,
    PROJECT_ROOT,
    CheckCase,
    CheckSuite,
    expect,
    expect_equal,
    expect_raises,
    run_suite_main,
)
from common.cli_utils import run_cli
from common.env_utils import resolve_fuzz_seed
from common.instance_factory import deep_network, fanout_network, random_network
from brute_force_verifier import DEFAULT_MAX_SEARCH_SPACE, search_space
from compression_pipeline import compress
from constraint_network import ConstraintNetwork, TableConstraint, network_size
from instance_io import (
    InstanceSyntaxError,
    InstanceValidationError,
    parse_instance,
    read_instance,
    serialize_instance,
    serialize_report,
)

SHARED_PAIR = FIXTURES_DIR / "shared_pair.json"
FOUR_ARY = FIXTURES_DIR / "four_ary.json"


def _document(variables, constraints) -> str:
    return json.dumps({"format_version": "1", "variables": variables, "constraints": constraints})


def check_parse_fixtures() -> str:
    parsed = read_instance(SHARED_PAIR)
    network = parsed.network
    expect_equal(network.variables, ("x1", "x2", "x3", "x4"), "declaration order")
    expect_equal(network.constraint_ids, ("c1", "c2"), "constraint ids")
    expect_equal(network_size(network), 18, "size")
    expect_equal(parsed.merged_duplicates, 0, "no duplicates")

    four_ary = read_instance(FOUR_ARY).network
    expect_equal(network_size(four_ary), 20, "4-ary example size")

    duplicate = read_instance(FIXTURES_DIR / "duplicate_tuple.json")
    expect_equal(duplicate.merged_duplicates, 1, "one merged tuple")
    expect_equal(duplicate.network.constraint_ids, ("c1",), "default id")
    expect_equal(len(duplicate.network.constraint("c1").relation), 2, "relation is a set")

    mismatch = expect_raises(InstanceValidationError, read_instance, FIXTURES_DIR / "arity_mismatch.json")
    expect_equal([violation.kind for violation in mismatch.violations], ["arity-mismatch"], "violation kinds")

    malformed = expect_raises(InstanceSyntaxError, read_instance, FIXTURES_DIR / "malformed.json")
    expect(malformed.line is not None and malformed.line > 1, f"line number reported, got {malformed.line}")

    empty = read_instance(FIXTURES_DIR / "empty.json").network
    expect_equal((empty.variables, empty.constraints), ((), ()), "empty instance")
    return str(malformed)


def check_parse_errors() -> None:
    variables = [{"name": "x", "domain": ["a", "b"]}]
    expect_raises(InstanceSyntaxError, parse_instance, "[]")
    expect_raises(InstanceSyntaxError, parse_instance, json.dumps({"format_version": "2", "variables": [], "constraints": []}))
    expect_raises(InstanceSyntaxError, parse_instance, json.dumps({"variables": [], "constraints": []}))
    expect_raises(InstanceSyntaxError, parse_instance, _document([{"name": "x", "domain": [1, 2]}], []))
    expect_raises(InstanceSyntaxError, parse_instance, _document(variables, [{"scope": ["x"], "tuples": [[1]]}]))
    expect_raises(InstanceSyntaxError, parse_instance, _document(variables, [{"scope": ["x"], "tuples": [], "weight": "1"}]))
    expect_raises(InstanceSyntaxError, parse_instance, _document(variables, [{"id": 7, "scope": ["x"], "tuples": []}]))

    twice = expect_raises(InstanceValidationError, parse_instance, _document(variables * 2, []))
    expect_equal([violation.kind for violation in twice.violations], ["duplicate-variable"], "variable declared twice")

    outside = expect_raises(
        InstanceValidationError, parse_instance, _document(variables, [{"id": "c1", "scope": ["x"], "tuples": [["z"]]}])
    )
    expect_equal([violation.kind for violation in outside.violations], ["domain-violation"], "value outside the domain")

    same_id = [{"id": "c1", "scope": ["x"], "tuples": [["a"]]}] * 2
    reused = expect_raises(InstanceValidationError, parse_instance, _document(variables, same_id))
    expect("duplicate-constraint-id" in [violation.kind for violation in reused.violations], "constraint id used twice")


def check_default_ids() -> None:
    variables = [{"name": "x", "domain": ["a"]}]
    constraints = [
        {"scope": ["x"], "tuples": [["a"]]},
        {"id": "c1", "scope": ["x"], "tuples": [["a"]]},
        {"scope": ["x"], "tuples": []},
    ]
    network = parse_instance(_document(variables, constraints)).network
    expect_equal(network.constraint_ids, ("c1", "c2", "c3"), "explicit ids are skipped")
    expect_equal(network.constraint("c2").relation, {("a",)}, "first unnamed constraint")
    expect_equal(network.constraint("c3").relation, frozenset(), "second unnamed constraint")


def check_canonical_text() -> None:
    text = SHARED_PAIR.read_text(encoding="utf-8")
    network = parse_instance(text).network
    expect_equal(serialize_instance(network), text, "fixture is already canonical")

    compressed, _ = compress(network)
    written = serialize_instance(compressed)
    reread = parse_instance(written).network
    expect_equal(reread, compressed, "compressed network survives the file")
    expect_equal(serialize_instance(reread), written, "serialization is a fixpoint")
    expect_equal(reread.domain("_y0"), {"_v0", "_v1"}, "fresh variable and values keep their names")
    expect_equal(reread.next_fresh_variable(), "_y1", "fresh counter resumes after reload")
    expect(written.endswith("}\n") and "\r" not in written, "LF endings and a trailing newline")

    expect_equal(
        serialize_instance(ConstraintNetwork.create({})),
        (FIXTURES_DIR / "empty.json").read_text(encoding="utf-8"),
        "empty network",
    )
    empty_relation = ConstraintNetwork.create({"x": ["a"]}, [TableConstraint.create("c1", ["x"], [])])
    expect('"tuples": []}' in serialize_instance(empty_relation), "empty relation on one line")


def check_report_document() -> None:
    _, report = compress(read_instance(SHARED_PAIR).network)
    document = json.loads(serialize_report(report))
    expect_equal((document["input_size"], document["output_size"]), (18, 16), "sizes")
    expect_equal(len(document["records"]), 1, "one record")
    record = document["records"][0]
    expect_equal(record["kind"], "cgr", "kind")
    expect_equal(record["delta"], 2, "delta")
    expect_equal(
        record["value_map"],
        [{"sub_tuple": ["a", "b"], "value": "_v0"}, {"sub_tuple": ["b", "a"], "value": "_v1"}],
        "value map",
    )
    expect_equal(document["config"]["passes"], "graph,table", "config echoed")


def check_cli_compress_and_verify() -> str:
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "out.json"
        report_path = Path(tmp) / "report.json"
        run = run_cli("compress", SHARED_PAIR, "-o", out, "--report", report_path, cwd=Path(tmp))
        expect_equal(run.exit_code, 0, f"compress exit code ({run.stderr})")
        expect_equal(run.stdout.strip(), "size 18 -> 16 (1 rewrite(s))", "compress summary")
        expect("[CSPZIP CGR]" in run.stderr, "tagged progress on stderr")

        report = json.loads(report_path.read_text(encoding="utf-8"))
        expect_equal([(item["kind"], item["delta"]) for item in report["records"]], [("cgr", 2)], "report records")

        stats = run_cli("stats", out)
        expect_equal(stats.exit_code, 0, "stats exit code")
        expect(f"size: {report['output_size']}" in stats.stdout.splitlines(), "stats size matches the report")

        verify = run_cli("verify", SHARED_PAIR, out)
        expect_equal((verify.exit_code, verify.stdout.strip()), (0, "verdict: equivalent"), "verify")
        limited = run_cli("verify", SHARED_PAIR, out, "--limit", "1", "--quiet")
        expect_equal(limited.exit_code, 0, "verify with a limit")

        quiet = run_cli("compress", SHARED_PAIR, "-o", out, "--quiet")
        expect_equal((quiet.exit_code, quiet.stderr), (0, ""), "--quiet silences progress lines")
        return f"compress took {run.duration_sec:.2f}s"


def check_cli_stats_and_mine() -> None:
    stats = run_cli("stats", SHARED_PAIR)
    lines = stats.stdout.splitlines()
    for expected in ("size: 18", "variables: 4", "constraints: 2", "primal_edges: 5", "components: 1", "pairwise_consistent: no"):
        expect(expected in lines, f"stats prints '{expected}'")
    expect("constraint c1: arity=3 tuples=3 size=9" in lines, "per-constraint line")

    mined = run_cli("mine", SHARED_PAIR, "--db", "graph", "--min-support", "2", "--mode", "closed")
    expect_equal((mined.exit_code, mined.stdout.strip()), (0, "{x2, x3} support=2 cover=c1,c2"), "mined graph pattern")

    oracle = run_cli("mine", SHARED_PAIR, "--oracle", "--quiet")
    expect_equal(oracle.stdout, mined.stdout, "oracle prints the same patterns")

    table = run_cli("mine", FOUR_ARY, "--db", "constraint:c", "--min-support", "4", "--dump-db", "--quiet")
    expect_equal(table.exit_code, 0, "table mining exit code")
    expect(table.stdout.startswith("001: "), "database dump comes first")
    expect("support=4 cover=002,003,004,005" in table.stdout, "pattern over rows 002..005")


def check_cli_exit_codes() -> str:
    with tempfile.TemporaryDirectory() as tmp:
        tmp_path = Path(tmp)
        out = tmp_path / "out.json"
        usage = {
            "no command": run_cli(),
            "unknown command": run_cli("shrink", SHARED_PAIR),
            "missing file": run_cli("stats", tmp_path / "absent.json"),
            "malformed": run_cli("stats", FIXTURES_DIR / "malformed.json"),
            "invalid network": run_cli("stats", FIXTURES_DIR / "arity_mismatch.json"),
            "zero support": run_cli("compress", SHARED_PAIR, "-o", out, "--min-support", "0"),
            "support of one": run_cli("compress", SHARED_PAIR, "-o", out, "--min-support", "1"),
            "bad passes": run_cli("compress", SHARED_PAIR, "-o", out, "--passes", "mesh"),
            "unknown db": run_cli("mine", SHARED_PAIR, "--db", "constraint:c9"),
        }
        for label, run in usage.items():
            expect_equal(run.exit_code, 1, f"{label} exit code")
            expect("[CSPZIP] ERROR:" in run.stderr, f"{label} reports an error")

        expect_equal(run_cli("verify", SHARED_PAIR, FOUR_ARY).exit_code, 2, "different solutions")
        lacking = run_cli("verify", SHARED_PAIR, FIXTURES_DIR / "empty.json")
        expect_equal((lacking.exit_code, lacking.stdout.strip()), (2, "verdict: projection-mismatch"), "missing variables")

        tight = tmp_path / "tight.json"
        tight.write_text(json.dumps({"verification": {"max_search_space": 1, "max_oracle_alphabet": 1}}), encoding="utf-8")
        expect_equal(run_cli("verify", SHARED_PAIR, SHARED_PAIR, "--profile", tight).exit_code, 3, "search space bound")
        expect_equal(run_cli("mine", SHARED_PAIR, "--oracle", "--profile", tight).exit_code, 3, "oracle alphabet bound")
        expect_equal(run_cli("verify", SHARED_PAIR, SHARED_PAIR, "--profile", tight, "--limit", "5").exit_code, 0, "limit lifts it")
    return f"{len(usage)} usage errors"


def check_cli_determinism() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        outputs = []
        for name in ("first", "second"):
            out = Path(tmp) / f"{name}.json"
            report = Path(tmp) / f"{name}_report.json"
            run = run_cli("compress", FOUR_ARY, "-o", out, "--report", report, "--quiet")
            expect_equal(run.exit_code, 0, f"{name} run exit code")
            outputs.append((out.read_bytes(), report.read_bytes()))
        expect_equal(outputs[0], outputs[1], "byte-identical output and report")
        canonical = serialize_instance(read_instance(FOUR_ARY).network).encode("utf-8")
        expect_equal(outputs[0][0], canonical, "unchanged instance is written in canonical form")


def check_cli_profiles() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "out.json"
        profiles = _TESTING_SCRIPTS.parent.parent / "configs" / "compression"
        prefilter = run_cli("compress", SHARED_PAIR, "-o", out, "--profile", profiles / "prefilter.json", "--quiet")
        expect_equal(prefilter.stdout.strip(), "size 18 -> 18 (0 rewrite(s))", "prefilter profile")
        forced = run_cli(
            "compress", SHARED_PAIR, "-o", out, "--profile", profiles / "prefilter.json", "--gain", "exact", "--quiet"
        )
        expect_equal(forced.stdout.strip(), "size 18 -> 16 (1 rewrite(s))", "flag overrides the profile")
        table_only = run_cli("compress", SHARED_PAIR, "-o", out, "--passes", "table", "--quiet")
        expect_equal(table_only.stdout.strip(), "size 18 -> 18 (0 rewrite(s))", "table pass alone")


def check_cli_verify_after_compress() -> str:
    with tempfile.TemporaryDirectory() as tmp:
        tmp_path = Path(tmp)
        followers = tmp_path / "followers.json"
        followers.write_text(serialize_instance(fanout_network()), encoding="utf-8")
        leader = tmp_path / "leader.json"
        leader.write_text(serialize_instance(ConstraintNetwork.create({"x": ["a", "b", "c"]})), encoding="utf-8")
        expect(search_space(fanout_network()) > DEFAULT_MAX_SEARCH_SPACE, "nominal space past the default bound")
        run = run_cli("verify", leader, followers, "--quiet")
        expect_equal((run.exit_code, run.stdout.strip()), (0, "verdict: equivalent"), f"fixed followers ({run.stderr})")

        rng = np.random.default_rng(resolve_fuzz_seed(PROJECT_ROOT) + 23)
        rewritten = 0
        for index in range(6):
            network = random_network(rng, max_variables=6, max_constraints=5, max_arity=4, min_arity=2, max_domain=4)
            source = tmp_path / f"random_{index}.json"
            source.write_text(serialize_instance(network), encoding="utf-8")
            out = tmp_path / f"random_{index}_out.json"
            compressed = run_cli("compress", source, "-o", out, "--quiet")
            expect_equal(compressed.exit_code, 0, f"compress exit code ({compressed.stderr})")
            rewritten += read_instance(out).network.variables != network.variables

            verify = run_cli("verify", source, out, "--quiet")
            expect_equal(verify.exit_code, 0, f"verify with the default bound ({verify.stderr})")
            expect_equal(verify.stdout.strip(), "verdict: equivalent", "verdict")
    return f"{rewritten} of 6 random instances gained fresh variables"


def check_cli_verify_many_variables() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "deep.json"
        path.write_text(serialize_instance(deep_network(1200)), encoding="utf-8")
        run = run_cli("verify", path, path, "--limit", "1", "--quiet")
        expect_equal((run.exit_code, run.stdout.strip()), (0, "verdict: equivalent"), f"1200 variables ({run.stderr})")
        expect("Traceback" not in run.stderr, "no traceback")


SUITE = CheckSuite(
    key="cli",
    report_title="Instance Files and Command Line Test Report",
    report_filename="cli_io_test_result.md",
    cases=(
        CheckCase("fixture files parse", check_parse_fixtures),
        CheckCase("document errors", check_parse_errors),
        CheckCase("default constraint ids", check_default_ids),
        CheckCase("canonical instance text", check_canonical_text),
        CheckCase("report document", check_report_document),
        CheckCase("compress, stats and verify from the command line", check_cli_compress_and_verify),
        CheckCase("stats and mine output", check_cli_stats_and_mine),
        CheckCase("exit codes", check_cli_exit_codes),
        CheckCase("repeated runs write identical files", check_cli_determinism),
        CheckCase("profiles and flag overrides", check_cli_profiles),
        CheckCase("verify after compress under the default bound", check_cli_verify_after_compress),
        CheckCase("verify with a limit on 1200 variables", check_cli_verify_many_variables),
    ),
)


def main() -> int:
    return run_suite_main(SUITE)


if __name__ == "__main__":
    raise SystemExit(main())

"""JSON instance documents and compression reports.

An instance document looks like::

    {
      "format_version": "1",
      "variables": [{"name": "x1", "domain": ["a", "b"]}],
      "constraints": [{"id": "c1", "scope": ["x1"], "tuples": [["a"]]}]
    }

Every value is a string; nothing numeric-looking is coerced. ``id`` is
optional and defaults to ``c<position>`` (skipping ids taken explicitly).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import console
from compression_pipeline import CompressionReport
from constraint_network import ConstraintNetwork, TableConstraint, Violation, validate_network

FORMAT_VERSION = "1"


class InstanceSyntaxError(ValueError):
    """Raised when a document is not JSON or does not follow the instance layout."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class InstanceValidationError(ValueError):
    """Raised when a well-formed document describes an invalid network."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        details = "; ".join(violation.message for violation in violations[:5])
        more = f" (+{len(violations) - 5} more)" if len(violations) > 5 else ""
        super().__init__(f"Instance has {len(violations)} violation(s): {details}{more}")


@dataclass(frozen=True)
class ParsedInstance:
    network: ConstraintNetwork
    merged_duplicates: int = 0


def _string_list(value: Any, where: str) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(item, str) for item in value):
        raise InstanceSyntaxError(f"{where} must be a list of strings.")
    return value


def _object(value: Any, where: str, required: tuple[str, ...], optional: tuple[str, ...] = ()) -> dict:
    if not isinstance(value, dict):
        raise InstanceSyntaxError(f"{where} must be an object.")
    missing = [key for key in required if key not in value]
    if missing:
        raise InstanceSyntaxError(f"{where} is missing {', '.join(missing)}.")
    unknown = sorted(set(value) - set(required) - set(optional))
    if unknown:
        raise InstanceSyntaxError(f"{where} has unknown fields {', '.join(unknown)}.")
    return value


def parse_instance(text: str) -> ParsedInstance:
    """Parse and validate an instance document.

    Args:
        text: JSON text in the instance layout.

    Returns:
        The network and the number of duplicate tuples merged while reading.

    Raises:
        InstanceSyntaxError: Not JSON, or not the instance layout.
        InstanceValidationError: The described network breaks a model invariant.
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceSyntaxError(f"Invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None

    document = _object(document, "Instance", ("format_version", "variables", "constraints"))
    if document["format_version"] != FORMAT_VERSION:
        raise InstanceSyntaxError(
            f"Unsupported format_version {document['format_version']!r}; expected '{FORMAT_VERSION}'."
        )
    if not isinstance(document["variables"], list):
        raise InstanceSyntaxError("'variables' must be a list.")
    if not isinstance(document["constraints"], list):
        raise InstanceSyntaxError("'constraints' must be a list.")

    violations: list[Violation] = []
    domains: dict[str, list[str]] = {}
    for index, entry in enumerate(document["variables"], start=1):
        entry = _object(entry, f"Variable #{index}", ("name", "domain"))
        name = entry["name"]
        if not isinstance(name, str):
            raise InstanceSyntaxError(f"Variable #{index} name must be a string.")
        domain = _string_list(entry["domain"], f"Domain of '{name}'")
        if name in domains:
            violations.append(Violation("duplicate-variable", name, f"Variable '{name}' is declared twice."))
            continue
        domains[name] = domain

    entries = [
        _object(entry, f"Constraint #{index}", ("scope", "tuples"), ("id",))
        for index, entry in enumerate(document["constraints"], start=1)
    ]
    taken = {entry["id"] for entry in entries if isinstance(entry.get("id"), str)}

    constraints: list[TableConstraint] = []
    merged = 0
    for index, entry in enumerate(entries, start=1):
        constraint_id = entry.get("id")
        if constraint_id is None:
            number = index
            while f"c{number}" in taken:
                number += 1
            constraint_id = f"c{number}"
            taken.add(constraint_id)
        elif not isinstance(constraint_id, str):
            raise InstanceSyntaxError(f"Constraint #{index} id must be a string.")

        scope = _string_list(entry["scope"], f"Scope of '{constraint_id}'")
        if not isinstance(entry["tuples"], list):
            raise InstanceSyntaxError(f"Tuples of '{constraint_id}' must be a list.")
        rows = [tuple(_string_list(row, f"A tuple of '{constraint_id}'")) for row in entry["tuples"]]

        constraint = TableConstraint.create(constraint_id, scope, rows)
        merged += len(rows) - len(constraint.relation)
        constraints.append(constraint)

    network = ConstraintNetwork.create(domains, constraints)
    violations.extend(validate_network(network))
    if violations:
        raise InstanceValidationError(violations)

    if merged:
        console.warn("load", f"merged {merged} duplicate tuple(s)")
    return ParsedInstance(network=network, merged_duplicates=merged)


def read_instance(path: str | Path) -> ParsedInstance:
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def _inline(values) -> str:
    return "[" + ", ".join(json.dumps(value, ensure_ascii=False) for value in values) + "]"


def serialize_instance(network: ConstraintNetwork) -> str:
    """Canonical text: byte-identical for equal networks, LF endings, trailing newline."""
    lines = ["{", f'  "format_version": {json.dumps(FORMAT_VERSION)},']

    variable_lines = [
        f'    {{"name": {json.dumps(variable, ensure_ascii=False)}, '
        f'"domain": {_inline(sorted(network.domain(variable)))}}}'
        for variable in network.variables
    ]
    if variable_lines:
        lines.append('  "variables": [')
        lines.append(",\n".join(variable_lines))
        lines.append("  ],")
    else:
        lines.append('  "variables": [],')

    constraint_blocks = []
    for constraint in network.constraints:
        head = (
            f'    {{"id": {json.dumps(constraint.id, ensure_ascii=False)}, '
            f'"scope": {_inline(constraint.scope)}, "tuples": ['
        )
        rows = constraint.sorted_tuples()
        if rows:
            body = ",\n".join(f"      {_inline(row)}" for row in rows)
            constraint_blocks.append(f"{head}\n{body}\n    ]}}")
        else:
            constraint_blocks.append(f"{head}]}}")
    if constraint_blocks:
        lines.append('  "constraints": [')
        lines.append(",\n".join(constraint_blocks))
        lines.append("  ]")
    else:
        lines.append('  "constraints": []')

    lines.append("}")
    return "\n".join(lines) + "\n"


def write_instance(network: ConstraintNetwork, path: str | Path) -> None:
    Path(path).write_text(serialize_instance(network), encoding="utf-8", newline="\n")


def serialize_report(report: CompressionReport) -> str:
    return json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n"

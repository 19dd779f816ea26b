"""
cli: Command-Line Interface of i3audit

Subcommands:

    - compute: indicators of a dataset file (table, JSON or CSV).
    - scenario: replays a scenario file and emits one row per case (CSV ready for plotting, JSON or table).
    - audit: runs a consistency audit over a scenario file.
    - example: writes one of the builtin datasets or scenarios.

Dataset files are JSON/YAML objects `{"label": ..., "papers": [{"id", "owner", "citations"}, ...]}` (or a bare list
of paper records), or CSV files with the header `id,owner,citations`. Scenario files are JSON/YAML objects
`{"name", "initial", "steps": [{"case", "op", "owner", "from_count"?}, ...]}` where `initial` is an inline dataset
or the path of a dataset file. `-` reads from standard input.

Exit codes: 0 success, 2 unreadable or invalid input, 3 invalid scoring policy, 4 violations found with
`--fail-on-violation`.
"""
import io
import os
import csv
import sys
import json
import yaml
import logging
import argparse

from pydantic import ValidationError
from typing import List, Optional

from . import (ClassScheme, Dataset, EmptyReferenceSetError, UnknownCitationBinError, UNATTRIBUTED,
               __version__)
from .audit import ViolationKind, audit
from .evolution import ReplayError, Scenario, example_a, example_b_endpoints, example_b_like, replay
from .scoring import PolicyError, ScoringPolicy, per_owner_report, rank_basis, weights_table
from .util import dict_to_table, format_rational

logger = logging.getLogger(__name__)

DATASET_FIELDS = ("id", "owner", "citations")
EXAMPLES = ("A", "B1", "B73", "b-like")
EXIT_OK, EXIT_INPUT, EXIT_POLICY, EXIT_VIOLATIONS = 0, 2, 3, 4


class DatasetFormatError(ValueError):
    """Raised when a dataset, scenario or scheme file cannot be parsed."""


def _read_text(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as reader:
            return reader.read()
    except UnicodeDecodeError as e:
        raise DatasetFormatError(f"'{path}' is not valid UTF-8 text: {e}")


def _write_text(text: str, path: str = None):
    if not path or path == "-":
        sys.stdout.write(text)
        return
    if os.path.split(path)[0]:
        os.makedirs(os.path.split(path)[0], exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as writer:
        writer.write(text)


def _parse_structured(text: str, path: str):
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise DatasetFormatError(f"'{path}' is neither valid JSON nor YAML: {e}")


def _default_label(path: str) -> str:
    return "" if path == "-" else os.path.splitext(os.path.basename(path))[0]


def _is_csv(text: str, path: str, fmt: str) -> bool:
    if fmt != "auto":
        return fmt == "csv"
    ext = os.path.splitext(path)[1].lower()
    if ext in (".json", ".yaml", ".yml"):
        return False
    if ext == ".csv":
        return True
    first_line = text.lstrip().split("\n", 1)[0]
    return not first_line.startswith(("{", "[", "-")) and "," in first_line and ":" not in first_line


def parse_dataset_csv(text: str, label: str = "") -> Dataset:
    """
    Parses a dataset from CSV rows with the header `id,owner,citations`.

    :param text: The CSV content.
    :type text: str
    :param label: Case label of the dataset.
    :type label: str
    :return: The dataset.
    :rtype: Dataset
    :raises DatasetFormatError: On a wrong header, a non-integer value or an invalid record.
    """
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    unknown = [field for field in header if field not in DATASET_FIELDS]
    missing = [field for field in DATASET_FIELDS if field not in header]
    if unknown or missing:
        raise DatasetFormatError(f"CSV header must be {','.join(DATASET_FIELDS)} "
                                 f"(unknown fields: {unknown}, missing fields: {missing})")
    records = []
    for line, row in enumerate(reader, start=2):
        if None in row or None in row.values():
            raise DatasetFormatError(f"line {line}: expected exactly {len(DATASET_FIELDS)} values "
                                     f"({','.join(DATASET_FIELDS)})")
        try:
            records.append({"id": int(row["id"]), "owner": row["owner"], "citations": int(row["citations"])})
        except (TypeError, ValueError):
            raise DatasetFormatError(f"line {line}: id and citations must be integers, got {dict(row)}")
    try:
        return Dataset.from_records(records, label=label)
    except ValidationError as e:
        raise DatasetFormatError(f"Invalid dataset: {e}")


def parse_dataset(data, label: str = "") -> Dataset:
    """
    Builds a dataset from parsed JSON/YAML: an object with `papers` (and optionally `label`) or a list of records.

    :raises DatasetFormatError: If the structure or a record is invalid.
    """
    try:
        if isinstance(data, list):
            return Dataset.from_records(data, label=label)
        if isinstance(data, dict) and "papers" in data:
            return Dataset.model_validate({"label": label, **data})
    except ValidationError as e:
        raise DatasetFormatError(f"Invalid dataset: {e}")
    raise DatasetFormatError("A dataset must be a list of paper records or an object with a 'papers' list")


def read_dataset_file(path: str, fmt: str = "auto") -> Dataset:
    """
    Reads a dataset file (JSON, YAML or CSV; `-` for standard input).

    :param path: File path.
    :type path: str
    :param fmt: "json", "yaml", "csv" or "auto" (by extension, then by content).
    :type fmt: str
    :return: The dataset.
    :rtype: Dataset
    :raises DatasetFormatError: If the file is empty or invalid.
    """
    text = _read_text(path)
    if not text.strip():
        raise DatasetFormatError(f"'{path}' is empty")
    label = _default_label(path)
    if _is_csv(text, path, fmt):
        return parse_dataset_csv(text, label=label)
    return parse_dataset(_parse_structured(text, path), label=label)


def dataset_to_csv(dataset: Dataset) -> str:
    """Renders a dataset as `id,owner,citations` CSV rows."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(DATASET_FIELDS)
    for paper in dataset.papers:
        writer.writerow([paper.id, paper.owner, paper.citations])
    return buffer.getvalue()


def write_dataset_file(dataset: Dataset, path: str = None, fmt: str = "auto"):
    """
    Writes a dataset as JSON or CSV (by `fmt`, or by the extension of `path` if "auto"; JSON by default).

    :param dataset: The dataset.
    :type dataset: Dataset
    :param path: Output path (standard output if None or "-").
    :type path: str
    :param fmt: "json", "csv" or "auto".
    :type fmt: str
    """
    if fmt == "auto":
        fmt = "csv" if path and path.lower().endswith(".csv") else "json"
    _write_text(dataset_to_csv(dataset) if fmt == "csv" else dataset.json(string=True) + "\n", path)


def read_scenario_file(path: str) -> Scenario:
    """
    Reads a scenario file (JSON or YAML; `-` for standard input).

    The `initial` dataset may be inline or the path of a dataset file, relative to the scenario file.

    :param path: File path.
    :type path: str
    :return: The scenario.
    :rtype: Scenario
    :raises DatasetFormatError: If the file is empty or invalid.
    """
    text = _read_text(path)
    if not text.strip():
        raise DatasetFormatError(f"'{path}' is empty")
    data = _parse_structured(text, path)
    if not isinstance(data, dict) or "initial" not in data:
        raise DatasetFormatError(f"'{path}': a scenario must be an object with 'initial' and 'steps'")

    data = dict(data)
    data.setdefault("name", _default_label(path))
    initial = data["initial"]
    if isinstance(initial, str):
        initial_path = initial if os.path.isabs(initial) or path == "-" else \
            os.path.join(os.path.dirname(path), initial)
        initial = read_dataset_file(initial_path)
    else:
        initial = parse_dataset(initial, label=data.get("initial_case", ""))
    data["initial"] = initial.json()
    try:
        return Scenario.from_dict(data)
    except (ValidationError, KeyError, TypeError) as e:
        raise DatasetFormatError(f"Invalid scenario '{path}': {e}")


def read_scheme_file(scheme: Optional[str]) -> ClassScheme:
    """
    Resolves the `--scheme` option: None for the configured scheme, "6pr", or a JSON/YAML file with
    `boundaries`, `weights` and optionally `name`.

    :raises DatasetFormatError: If the file is invalid.
    """
    if scheme is None:
        return ClassScheme.default()
    if scheme.lower() == "6pr":
        return ClassScheme.six_pr()
    data = _parse_structured(_read_text(scheme), scheme)
    if not isinstance(data, dict):
        raise DatasetFormatError(f"'{scheme}': a scheme must be an object with 'boundaries' and 'weights'")
    try:
        return ClassScheme(name=data.get("name") or _default_label(scheme),
                           boundaries=data.get("boundaries", []),
                           weights=data.get("weights", []))
    except (ValidationError, ValueError) as e:
        raise DatasetFormatError(f"Invalid class scheme '{scheme}': {e}")


def _csv(rows: List[list]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(rows)
    return buffer.getvalue()


def _policy(args) -> ScoringPolicy:
    policy = ScoringPolicy.from_names(args.rule, args.ties)
    rank_basis(args.rank_by)
    return policy


def cmd_compute(args) -> int:
    """Indicators of one dataset."""
    policy = _policy(args)
    scheme = read_scheme_file(args.scheme)
    dataset = read_dataset_file(args.input)
    report = per_owner_report(dataset, scheme, policy, args.rank_by)
    digits = args.digits

    if args.format == "json":
        data = report.json(digits=digits)
        if not args.by_owner:
            data.pop("per_owner")
        _write_text(json.dumps(data, indent=2) + "\n")
    elif args.format == "csv":
        if args.by_owner:
            rows = [["owner", "papers", "citations", "i3", "r", "share", "rank"]]
            rows += [[owner] + list(row.values()) for owner, row in report.table_rows(digits).items()]
        else:
            rows = [["case", "n_papers", "n_citations", "i3", "r"],
                    [report.label, report.n_tot, report.n_citations,
                     format_rational(report.total_i3, digits), format_rational(report.total_r, digits, fixed=True)]]
        _write_text(_csv(rows))
    else:
        if args.by_owner:
            table = dict_to_table(report.table_rows(digits), show=False)
        else:
            table = dict_to_table({str(c): {key: ("-" if value is None else format_rational(value, digits))
                                            for key, value in row.items()}
                                   for c, row in weights_table(dataset, scheme, policy).items()},
                                  index_name="c", show=False)
        _write_text(f"{report.label} ({report.scheme}, {report.policy}): {report.n_tot} papers, "
                    f"{report.n_citations} citations, I3 = {format_rational(report.total_i3, digits)}, "
                    f"R = {format_rational(report.total_r, digits, fixed=True)}\n{table}\n")
    return EXIT_OK


def scenario_rows(scenario: Scenario, scheme: ClassScheme, policy: ScoringPolicy, rank_by: str = None,
                  digits: int = None) -> List[list]:
    """
    Per-case rows: case, n_papers, n_citations, i3, r, then i3/r/rank columns for each owner (except "_").

    :return: The header row followed by one row per case.
    :rtype: List[list]
    """
    reports = [per_owner_report(snapshot, scheme, policy, rank_by) for snapshot in replay(scenario)]
    owners = sorted({owner for report in reports for owner in report.per_owner if owner != UNATTRIBUTED})
    header = ["case", "n_papers", "n_citations", "i3", "r"]
    for owner in owners:
        header += [f"i3_{owner}", f"r_{owner}", f"rank_{owner}"]
    rows = [header]
    for report in reports:
        row = [report.label, report.n_tot, report.n_citations,
               format_rational(report.total_i3, digits), format_rational(report.total_r, digits, fixed=True)]
        for owner in owners:
            ind = report.per_owner.get(owner)
            row += ["", "", ""] if ind is None else [format_rational(ind.i3, digits),
                                                     format_rational(ind.r, digits, fixed=True),
                                                     format_rational(ind.rank, digits)]
        rows.append(row)
    return rows


def cmd_scenario(args) -> int:
    """Replays a scenario and emits one row per case."""
    policy = _policy(args)
    scheme = read_scheme_file(args.scheme)
    scenario = read_scenario_file(args.input)
    rows = scenario_rows(scenario, scheme, policy, args.rank_by, args.digits)

    if args.emit == "json":
        header, *values = rows
        _write_text(json.dumps({"scenario": scenario.name, "scheme": scheme.label, "policy": policy.label,
                                "cases": [dict(zip(header, [str(v) for v in row])) for row in values]},
                               indent=2) + "\n")
    elif args.emit == "table":
        header, *values = rows
        table = dict_to_table({row[0]: dict(zip(header[1:], [str(v) for v in row[1:]])) for row in values},
                              index_name="case", show=False)
        _write_text(f"{scenario.name} ({scheme.label}, {policy.label})\n{table}\n")
    else:
        _write_text(_csv(rows))
    return EXIT_OK


def cmd_audit(args) -> int:
    """Runs a consistency audit over a scenario."""
    policy = _policy(args)
    scheme = read_scheme_file(args.scheme)
    scenario = read_scenario_file(args.input)
    report = audit(scenario, args.check, scheme, policy, args.rank_by)

    if args.format == "json":
        _write_text(report.json(string=True, digits=args.digits) + "\n")
    else:
        lines = [f"{report.kind.value} audit of '{report.scenario}' ({report.scheme}, {report.policy}, "
                 f"ranked by {report.rank_by.value}): {len(report)} violation(s)"]
        lines += [f"warning: {warning}" for warning in report.warnings]
        if len(report):
            lines.append(dict_to_table(report.table_rows(args.digits), index_name="#", show=False))
        _write_text("\n".join(lines) + "\n")

    if args.fail_on_violation and len(report):
        return EXIT_VIOLATIONS
    return EXIT_OK


def cmd_example(args) -> int:
    """Writes a builtin dataset (B1, B73) or scenario (A, b-like)."""
    if args.name not in EXAMPLES:
        logger.error(f"Unknown example '{args.name}', expected one of: {', '.join(EXAMPLES)}")
        return EXIT_INPUT
    if args.name in ("B1", "B73"):
        b1, b73, _ = example_b_endpoints()
        write_dataset_file(b1 if args.name == "B1" else b73, args.output, args.format)
        return EXIT_OK
    if args.format == "csv":
        logger.error(f"Example '{args.name}' is a scenario, which can only be written as JSON")
        return EXIT_INPUT
    scenario = example_a() if args.name == "A" else example_b_like()
    _write_text(scenario.json(string=True) + "\n", args.output)
    return EXIT_OK


def _add_policy_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--scheme", default=None,
                        help="'6pr' or a JSON/YAML file with boundaries and weights (default: configured scheme)")
    parser.add_argument("--rule", default=None,
                        help="Counting rule: strict-less, inclusive, plus-0.9 or fractional")
    parser.add_argument("--ties", default=None,
                        help="Tie policy: lowest, highest, average-rank or average-weight (not with fractional)")
    parser.add_argument("--rank-by", default=None, help="Rank owners by 'r' (default) or 'i3'")


def build_parser() -> argparse.ArgumentParser:
    """Builds the argument parser of the `i3audit` command."""
    parser = argparse.ArgumentParser(prog="i3audit",
                                     description="Percentile rank class citation indicators and ranking audits")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--digits", type=int, default=None, help="Decimals of non-integer values (default 4)")
    parser.add_argument("--verbose", action="store_true", help="Debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)

    compute = subparsers.add_parser("compute", help="Indicators of a dataset")
    compute.add_argument("input", help="Dataset file (JSON, YAML or CSV), '-' for standard input")
    _add_policy_arguments(compute)
    compute.add_argument("--by-owner", action="store_true", help="Per-owner indicators and ranks")
    compute.add_argument("--format", choices=["table", "json", "csv"], default="table")
    compute.set_defaults(func=cmd_compute)

    scenario = subparsers.add_parser("scenario", help="Per-case indicators of a scenario")
    scenario.add_argument("input", help="Scenario file (JSON or YAML), '-' for standard input")
    _add_policy_arguments(scenario)
    scenario.add_argument("--emit", choices=["per-case-csv", "json", "table"], default="per-case-csv")
    scenario.set_defaults(func=cmd_scenario)

    audit_parser = subparsers.add_parser("audit", help="Ranking consistency audit of a scenario")
    audit_parser.add_argument("input", help="Scenario file (JSON or YAML), '-' for standard input")
    _add_policy_arguments(audit_parser)
    audit_parser.add_argument("--check", choices=[kind.value for kind in ViolationKind],
                              default=ViolationKind.STRICT_INDEPENDENCE.value)
    audit_parser.add_argument("--format", choices=["table", "json"], default="table")
    audit_parser.add_argument("--fail-on-violation", action="store_true",
                              help=f"Exit with code {EXIT_VIOLATIONS} if violations are found")
    audit_parser.set_defaults(func=cmd_audit)

    example = subparsers.add_parser("example", help="Write a builtin dataset or scenario")
    example.add_argument("--name", required=True, help=f"One of: {', '.join(EXAMPLES)}")
    example.add_argument("--output", default=None, help="Output file (default: standard output)")
    example.add_argument("--format", choices=["auto", "json", "csv"], default="auto",
                         help="csv is only available for the B1 and B73 datasets")
    example.set_defaults(func=cmd_example)
    return parser


def main(argv: List[str] = None) -> int:
    """
    Entry point of the `i3audit` command.

    :param argv: Command-line arguments (default: `sys.argv[1:]`).
    :type argv: List[str]
    :return: The exit code.
    :rtype: int
    """
    args = build_parser().parse_args(argv)
    logging.getLogger("i3audit").setLevel(logging.DEBUG if args.verbose else logging.INFO)
    if args.digits is not None and args.digits < 0:
        logger.error("--digits must be non-negative")
        return EXIT_INPUT

    try:
        return args.func(args)
    except PolicyError as e:
        logger.error(f"Invalid scoring policy: {e}")
        return EXIT_POLICY
    except (DatasetFormatError, EmptyReferenceSetError, UnknownCitationBinError, ReplayError,
            ValidationError, OSError) as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

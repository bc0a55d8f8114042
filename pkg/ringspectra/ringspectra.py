"""Main module with CLI."""

import argparse
import dataclasses
import enum
import json
import pathlib
import sys
import traceback
from typing import Optional, Union

from .builders import build_ring
from .charpoly import IntPoly, charpoly_dense, charpoly_lowrank
from .common import (
    DEFAULT_DENSE_LIMIT,
    ElementId,
    HypothesisError,
    InvalidInputError,
    RingSpectraError,
    default_sweep_limit,
    resolve_cap,
)
from .local import find_structure_basis, is_local, local_profile
from .matrix import (
    OrderingTag,
    block_census,
    build_product_matrix,
    make_ordering,
    proof_ordering_tag,
    to_grid_text,
    to_hex_json,
)
from .ring import FiniteRing
from .theorems import Theorem, predict
from .verify import (
    METHODS,
    ORDERINGS,
    SCHEMA_VERSION,
    VerifyOptions,
    VerifyReport,
    classify,
    load_sweep_plan,
    reports_to_csv,
    run_sweep,
    summarize,
    sweep_to_json,
    verify_instance,
)

FORMATS = ("json", "csv", "text")
MIN_CAP = 4


@dataclasses.dataclass
class CliConfig:
    """Configuration shared by all subcommands."""

    cap: int
    sweep_limit: int
    format: str = "text"
    output: Optional[pathlib.Path] = None
    threads: int = 1
    timings: bool = False
    verbose: bool = False

    def __post_init__(self):
        if self.cap < MIN_CAP:
            raise InvalidInputError(f"Order cap must be at least {MIN_CAP}.")
        if self.format not in FORMATS:
            raise InvalidInputError(f"Invalid output format: '{self.format}'.")
        if self.threads < 1:
            raise InvalidInputError("Thread count must be at least 1.")


@dataclasses.dataclass
class InstanceConfig:
    """Configuration for the subcommands that take a ring & an element."""

    ring_spec: str
    u: Optional[str] = None
    ordering: str = "natural"
    method: str = "both"
    dense_limit: int = DEFAULT_DENSE_LIMIT
    family: Optional[Theorem] = None
    census: bool = False


@dataclasses.dataclass
class SweepConfig:
    """Configuration for running a sweep plan."""

    plan: pathlib.Path
    method: str = "both"
    dense_limit: int = DEFAULT_DENSE_LIMIT
    ordering: str = "natural"


class SubcommandResult(enum.Enum):
    """Result values of the subcommand functions."""

    OK = enum.auto()
    FAILED = enum.auto()
    AUX_FAILED = enum.auto()


def print_message(message: str, use_stderr: bool = False):
    """Print message about, e.g., sweep progress. If use_stderr=True, use
    sys.stderr instead of sys.stdout.
    """
    file = sys.stderr if use_stderr else sys.stdout
    error_prefix = "Error: " if use_stderr else ""
    print(f"ringspectra: {error_prefix}{message}", file=file, flush=True)


def print_progress(message: str):
    """Print a progress message on sys.stderr."""
    print(f"ringspectra: {message}", file=sys.stderr, flush=True)


def exit_on_exception(exception: Exception):
    """Print error and exit program with error code."""
    tback = "".join(
        traceback.format_exception(type(exception), exception, exception.__traceback__)
    )
    print_message(
        f"{exception}\n\n{tback}",
        use_stderr=True,
    )
    sys.exit(1)


def exit_on_input_error(exception: RingSpectraError):
    """Print the message of an invalid-input error and exit with code 2."""
    print_message(str(exception), use_stderr=True)
    sys.exit(2)


def exit_with_result(result: SubcommandResult):
    """Exit the program with an exit code based on SubcommandResult value."""
    if result == SubcommandResult.FAILED:
        sys.exit(1)
    if result == SubcommandResult.AUX_FAILED:
        sys.exit(3)
    sys.exit(0)


def emit(config: CliConfig, text: str):
    """Write the output document to --output, or to stdout."""
    if config.output is not None:
        config.output.write_text(text + "\n", encoding="utf-8")
    else:
        print(text, flush=True)


def dump_json(document) -> str:
    return json.dumps(document, indent=2, ensure_ascii=False)


def add_argument_help(helpless_parser):
    helpless_parser.add_argument(
        "-h",
        "--help",
        action="help",
        help="Show this help message and exit.",
    )


def add_common_arguments(parser: argparse.ArgumentParser):
    """Options accepted by every subcommand."""
    parser.add_argument(
        "--format",
        choices=FORMATS,
        default="text",
        help="Output format. Defaults to text.",
    )
    parser.add_argument(
        "--output",
        type=pathlib.Path,
        default=None,
        help="Write the output to a file instead of stdout.",
    )
    parser.add_argument(
        "--cap",
        type=int,
        default=None,
        help=(
            "Largest ring order to construct. Defaults to $RINGSPECTRA_CAP, "
            "or 4096."
        ),
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="store_true",
        help="Print progress & phase timings on stderr.",
    )
    add_argument_help(parser)


def add_instance_arguments(parser: argparse.ArgumentParser):
    parser.add_argument(
        "ring", help='Ring spec, e.g. "zn:27" or "polyquot:zn:2;f=x^3".'
    )
    parser.add_argument(
        "u", help='Canonical label of the element u, e.g. "9" or "x+1".'
    )


def add_computation_arguments(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--ordering",
        choices=ORDERINGS,
        default="natural",
        help=(
            "Element ordering of the matrix, 'proof' for the layout that "
            "exposes its block structure."
        ),
    )
    parser.add_argument(
        "--method",
        choices=METHODS,
        default="both",
        help=(
            "Characteristic polynomial algorithm, 'both' for low-rank with a "
            "dense cross-check."
        ),
    )
    parser.add_argument(
        "--dense-limit",
        type=int,
        default=DEFAULT_DENSE_LIMIT,
        help="Largest ring order for the dense cross-check. Defaults to 512.",
    )


def add_family_argument(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--family",
        choices=[theorem.value for theorem in Theorem],
        default=None,
        help="Classify against one theorem only.",
    )


def add_sweep_arguments(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--threads",
        type=int,
        default=1,
        help="Worker processes for the rings of a sweep. Defaults to 1.",
    )
    parser.add_argument(
        "--limit",
        type=int,
        default=None,
        help=(
            "Upper bound for the summed ring orders of a sweep. Defaults to "
            "$RINGSPECTRA_SWEEP_LIMIT, or 200000."
        ),
    )
    parser.add_argument(
        "--timings",
        action="store_true",
        help="Include wall times in JSON reports.",
    )


def parse_args_and_init(
    argv: Optional[list[str]] = None,
) -> tuple[str, CliConfig, Union[InstanceConfig, SweepConfig]]:
    """Parse CLI arguments. Exit the program if no further processing is needed.

    Returns
    -------
    subcommand
        Name of the subcommand to run.
    config
        Configuration shared by all subcommands.
    command_config
        Configuration of the subcommand.
    """
    parser = argparse.ArgumentParser(
        prog="ringspectra",
        description=(
            "RingSpectra - Exact characteristic polynomials of product matrices "
            "of finite commutative local rings"
        ),
        add_help=False,
        formatter_class=argparse.RawTextHelpFormatter,
    )
    group_options = parser.add_argument_group(title="optional arguments")
    add_argument_help(group_options)

    subparsers = parser.add_subparsers(
        title="subcommands",
        dest="subcommand",
        metavar="{info, matrix, charpoly, predict, verify, sweep}",
    )

    parser_info = subparsers.add_parser(
        "info",
        description=(
            "Print the order, locality, local profile & structure basis of a ring."
        ),
        add_help=False,
    )
    parser_info.add_argument("ring", help='Ring spec, e.g. "zn:27".')
    add_common_arguments(parser_info)

    parser_matrix = subparsers.add_parser(
        "matrix",
        description="Print the product matrix A_u(R).",
        add_help=False,
    )
    add_instance_arguments(parser_matrix)
    parser_matrix.add_argument(
        "--ordering",
        choices=ORDERINGS,
        default="natural",
        help="Element ordering of the matrix.",
    )
    parser_matrix.add_argument(
        "--census",
        action="store_true",
        help="Print the shapes of the connected components instead.",
    )
    add_common_arguments(parser_matrix)

    parser_charpoly = subparsers.add_parser(
        "charpoly",
        description="Compute the exact characteristic polynomial det(A_u(R) - λI).",
        add_help=False,
    )
    add_instance_arguments(parser_charpoly)
    add_computation_arguments(parser_charpoly)
    add_family_argument(parser_charpoly)
    add_common_arguments(parser_charpoly)

    parser_predict = subparsers.add_parser(
        "predict",
        description=(
            "Classify (R, u) and print the closed-form characteristic polynomial, "
            "without building the matrix."
        ),
        add_help=False,
    )
    add_instance_arguments(parser_predict)
    add_family_argument(parser_predict)
    add_common_arguments(parser_predict)

    parser_verify = subparsers.add_parser(
        "verify",
        description=(
            "Compare the closed form to the exact characteristic polynomial, for "
            "one u, for every u of a ring if u is omitted, or for a sweep plan."
        ),
        add_help=False,
    )
    parser_verify.add_argument(
        "ring", nargs="?", default=None, help='Ring spec, e.g. "zn:27".'
    )
    parser_verify.add_argument(
        "u", nargs="?", default=None, help="Canonical label of the element u."
    )
    parser_verify.add_argument(
        "--sweep",
        type=pathlib.Path,
        default=None,
        help="Sweep plan JSON file to verify instead of a single ring.",
    )
    add_computation_arguments(parser_verify)
    add_family_argument(parser_verify)
    add_sweep_arguments(parser_verify)
    add_common_arguments(parser_verify)

    parser_sweep = subparsers.add_parser(
        "sweep",
        description="Verify every instance of a sweep plan.",
        add_help=False,
    )
    parser_sweep.add_argument("plan", type=pathlib.Path, help="Sweep plan JSON file.")
    add_computation_arguments(parser_sweep)
    add_sweep_arguments(parser_sweep)
    add_common_arguments(parser_sweep)

    args = parser.parse_args(argv)
    subcommand = args.subcommand
    if subcommand is None:
        parser.print_help()
        sys.exit(0)

    config = CliConfig(
        cap=resolve_cap(args.cap),
        sweep_limit=(
            default_sweep_limit()
            if getattr(args, "limit", None) is None
            else args.limit
        ),
        format=args.format,
        output=args.output,
        threads=getattr(args, "threads", 1),
        timings=getattr(args, "timings", False),
        verbose=args.verbose,
    )

    if subcommand == "verify" and args.sweep is not None:
        if args.ring is not None:
            raise InvalidInputError("Give either a ring or --sweep, not both.")
        subcommand = "sweep"
        args.plan = args.sweep
    if subcommand == "sweep":
        return (
            subcommand,
            config,
            SweepConfig(
                plan=args.plan,
                method=args.method,
                dense_limit=args.dense_limit,
                ordering=args.ordering,
            ),
        )
    if args.ring is None:
        raise InvalidInputError("A ring spec or --sweep is required.")

    family = getattr(args, "family", None)
    return (
        subcommand,
        config,
        InstanceConfig(
            ring_spec=args.ring,
            u=getattr(args, "u", None),
            ordering=getattr(args, "ordering", "natural"),
            method=getattr(args, "method", "both"),
            dense_limit=getattr(args, "dense_limit", DEFAULT_DENSE_LIMIT),
            family=None if family is None else Theorem(family),
            census=getattr(args, "census", False),
        ),
    )


def _element(ring: FiniteRing, label: Optional[str]) -> ElementId:
    if label is None:
        raise InvalidInputError("An element u is required.")
    return ring.element_by_label(label)


def _ordering_tag(ring: FiniteRing, u: ElementId, ordering: str) -> OrderingTag:
    if ordering == "proof":
        return proof_ordering_tag(ring, u)
    return OrderingTag.NATURAL


def cmd_info(config: CliConfig, command: InstanceConfig) -> SubcommandResult:
    """Print the order, locality, local profile & structure basis of a ring."""
    ring = build_ring(command.ring_spec, config.cap)
    document: dict = {
        "schema": SCHEMA_VERSION,
        "ring": ring.name,
        "order": ring.order,
        "characteristic": ring.characteristic,
        "units": len(ring.units),
        "local": is_local(ring),
        "profile": None,
        "basis": None,
    }
    if document["local"]:
        profile = local_profile(ring)
        document["profile"] = profile.to_json()
        try:
            basis = find_structure_basis(ring, profile)
        except HypothesisError:
            pass
        else:
            document["basis"] = {
                "g": ring.label(basis.g),
                "x": ring.label(basis.x),
                "digits": [ring.label(d) for d in basis.digit_set],
            }

    if config.format == "json":
        emit(config, dump_json(document))
    elif config.format == "csv":
        columns = ["ring", "order", "characteristic", "local", "q", "n", "nil_index"]
        profile_json = document["profile"] or {}
        values = [
            ring.name,
            ring.order,
            ring.characteristic,
            str(document["local"]).lower(),
            *(profile_json.get(key, "") for key in ("q", "n", "nil_index")),
        ]
        emit(config, ",".join(columns) + "\n" + ",".join(map(str, values)))
    else:
        lines = [
            f"ring: {ring.name}",
            f"order: {ring.order}",
            f"characteristic: {ring.characteristic}",
            f"units: {len(ring.units)}",
        ]
        if document["profile"] is None:
            lines.append("not local")
        else:
            p = document["profile"]
            lines += [
                "local: yes",
                f"q: {p['q']} = {p['p']}^{p['r']}",
                f"n: {p['n']}",
                f"nilpotency index: {p['nil_index']}",
                "strata: " + " ".join(map(str, p["stratum_sizes"])),
            ]
        if document["basis"] is not None:
            b = document["basis"]
            lines.append(f"structure basis: g = {b['g']}, x = {b['x']}")
        emit(config, "\n".join(lines))
    return SubcommandResult.OK


def cmd_matrix(config: CliConfig, command: InstanceConfig) -> SubcommandResult:
    """Print A_u(R) as a 0/1 grid, as packed hex rows, or its block census."""
    ring = build_ring(command.ring_spec, config.cap)
    u = _element(ring, command.u)
    plan = make_ordering(ring, u, _ordering_tag(ring, u, command.ordering))
    matrix = build_product_matrix(ring, u, plan)
    labels = [ring.label(a) for a in matrix.ordering]

    if command.census:
        census = block_census(matrix)
        if config.format == "json":
            emit(
                config,
                dump_json(
                    {
                        "schema": SCHEMA_VERSION,
                        "ring": ring.name,
                        "u": ring.label(u),
                        "census": census,
                    }
                ),
            )
        elif config.format == "csv":
            emit(
                config,
                "\n".join(
                    ["shape,count"] + [f"{s},{c}" for s, c in census.items()]
                ),
            )
        else:
            emit(config, "\n".join(f"{s}: {c}" for s, c in census.items()))
        return SubcommandResult.OK

    if config.format == "json":
        document = {
            "schema": SCHEMA_VERSION,
            "ring": ring.name,
            "u": ring.label(u),
            "ordering": plan.tag.value,
            "labels": labels,
            **to_hex_json(matrix),
        }
        emit(config, dump_json(document))
    elif config.format == "csv":
        rows = [",".join(map(str, row)) for row in matrix.dense()]
        emit(config, "\n".join(rows))
    else:
        emit(config, to_grid_text(matrix))
    return SubcommandResult.OK


def _poly_json(poly: IntPoly) -> dict:
    return {**poly.to_json(), "human": str(poly)}


def cmd_charpoly(config: CliConfig, command: InstanceConfig) -> SubcommandResult:
    """Compute det(A_u(R) - λI) with the chosen method, and print it next to
    the closed form if one applies.
    """
    ring = build_ring(command.ring_spec, config.cap)
    u = _element(ring, command.u)
    plan = make_ordering(ring, u, _ordering_tag(ring, u, command.ordering))
    matrix = build_product_matrix(ring, u, plan)
    if command.method == "dense":
        poly = charpoly_dense(matrix)
    else:
        poly = charpoly_lowrank(matrix)
        if command.method == "both" and ring.order <= command.dense_limit:
            dense = charpoly_dense(matrix)
            if dense != poly:
                raise RuntimeError(
                    f"Dense & low-rank characteristic polynomials differ: "
                    f"{dense} != {poly}."
                )
    case = classify(ring, u, command.family)
    predicted = predict(case)
    match = None if predicted is None else predicted.expand() == poly

    if config.format == "json":
        document = {
            "schema": SCHEMA_VERSION,
            "ring": ring.name,
            "u": ring.label(u),
            "size": ring.order,
            "method": command.method,
            "ordering": plan.tag.value,
            "case": case.to_json(),
            "charpoly": _poly_json(poly),
            "factored": None if predicted is None else str(predicted),
            "match": match,
        }
        emit(config, dump_json(document))
    elif config.format == "csv":
        emit(
            config,
            "ring,u,case,charpoly,factored\n"
            f"{ring.name},{ring.label(u)},{case},{poly},"
            f"{'' if predicted is None else predicted}",
        )
    else:
        lines = [f"case: {case}"]
        if predicted is not None and match:
            lines.append(f"factored: {predicted}")
        elif predicted is not None:
            lines.append(f"predicted (differs): {predicted}")
        lines.append(f"expanded: {poly}")
        emit(config, "\n".join(lines))
    return SubcommandResult.OK


def cmd_predict(config: CliConfig, command: InstanceConfig) -> SubcommandResult:
    """Classify (R, u) & print the closed form, without building A_u(R)."""
    ring = build_ring(command.ring_spec, config.cap)
    u = _element(ring, command.u)
    case = classify(ring, u, command.family)
    predicted = predict(case)
    if config.format == "json":
        document = {
            "schema": SCHEMA_VERSION,
            "ring": ring.name,
            "u": ring.label(u),
            "case": case.to_json(),
            "predicted": None,
        }
        if predicted is not None:
            document["predicted"] = {
                **predicted.to_json(),
                "human": str(predicted),
                "expanded": _poly_json(predicted.expand()),
            }
        emit(config, dump_json(document))
    elif config.format == "csv":
        emit(
            config,
            "ring,u,case,predicted\n"
            f"{ring.name},{ring.label(u)},{case},{predicted or ''}",
        )
    else:
        lines = [f"case: {case}"]
        if case.note:
            lines.append(f"note: {case.note}")
        if predicted is not None:
            lines += [f"factored: {predicted}", f"expanded: {predicted.expand()}"]
        emit(config, "\n".join(lines))
    return SubcommandResult.OK


def _report_line(report: VerifyReport) -> str:
    if report.match is None:
        outcome = "unsupported"
    else:
        outcome = "match" if report.match else "MISMATCH"
    failed = [name for name, passed in report.aux_checks.items() if not passed]
    if failed:
        outcome += " (failed checks: " + ", ".join(sorted(failed)) + ")"
    return f"{report.ring_spec} u={report.u_label} {report.case}: {outcome}"


def _summary_lines(summary: dict) -> list[str]:
    lines = [
        f"{tag}: {c['total']} total, {c['match']} match, {c['mismatch']} "
        f"mismatch, {c['unsupported']} unsupported"
        for tag, c in summary["cases"].items()
    ]
    lines.append(
        f"all: {summary['total']} total, {summary['match']} match, "
        f"{summary['mismatch']} mismatch, {summary['unsupported']} unsupported, "
        f"{summary['aux_failures']} failed auxiliary checks"
    )
    return lines


def _emit_reports(
    config: CliConfig,
    reports: list[VerifyReport],
    document: dict,
    with_summary: bool,
):
    if config.format == "json":
        emit(config, dump_json(document))
    elif config.format == "csv":
        emit(config, reports_to_csv(reports).rstrip("\n"))
    else:
        lines = [_report_line(report) for report in reports]
        if with_summary:
            lines += _summary_lines(summarize(reports))
        emit(config, "\n".join(lines))


def _print_dumps(reports: list[VerifyReport]):
    """Print the matrices of the failed reports on sys.stderr."""
    for report in reports:
        matrix = report.dumped_matrix()
        if matrix is None:
            continue
        print_progress(f"A_u of {report.ring_spec} u={report.u_label}:")
        for row in matrix:
            print_progress("".join(map(str, row)))


def _verify_result(reports: list[VerifyReport]) -> SubcommandResult:
    """FAILED on a mismatch, AUX_FAILED if only auxiliary checks failed."""
    if any(report.match is False for report in reports):
        return SubcommandResult.FAILED
    if not all(report.aux_ok for report in reports):
        return SubcommandResult.AUX_FAILED
    return SubcommandResult.OK


def cmd_verify(config: CliConfig, command: InstanceConfig) -> SubcommandResult:
    """Verify one u, or every u of the ring if u is omitted."""
    ring = build_ring(command.ring_spec, config.cap)
    options = VerifyOptions(
        method=command.method,
        dense_limit=command.dense_limit,
        ordering=command.ordering,
        family=command.family,
    )
    elements = (
        range(ring.order) if command.u is None else [_element(ring, command.u)]
    )
    reports = []
    for u in elements:
        report = verify_instance(ring, u, options)
        if config.verbose:
            timings = ", ".join(f"{k} {v:.1f} ms" for k, v in report.timings.items())
            print_progress(f"{ring.name} u={report.u_label}: {timings}.")
        reports.append(report)

    if command.u is not None:
        document = reports[0].to_json(config.timings)
    else:
        document = {
            "schema": SCHEMA_VERSION,
            "ring": ring.name,
            "reports": [report.to_json(config.timings) for report in reports],
            "summary": summarize(reports),
        }
    _emit_reports(config, reports, document, with_summary=command.u is None)
    if config.verbose:
        _print_dumps(reports)
    return _verify_result(reports)


def cmd_sweep(config: CliConfig, command: SweepConfig) -> SubcommandResult:
    """Verify every instance of a sweep plan."""
    plan = load_sweep_plan(command.plan)
    options = VerifyOptions(
        method=command.method,
        dense_limit=command.dense_limit,
        ordering=command.ordering,
    )
    result = run_sweep(
        plan,
        cap=config.cap,
        limit=config.sweep_limit,
        threads=config.threads,
        options=options,
        progress=print_progress if config.verbose else None,
    )
    _emit_reports(
        config,
        result.reports,
        sweep_to_json(plan, result, config.timings),
        with_summary=True,
    )
    if config.verbose:
        _print_dumps(result.reports)
    return _verify_result(result.reports)


SUBCOMMANDS = {
    "info": cmd_info,
    "matrix": cmd_matrix,
    "charpoly": cmd_charpoly,
    "predict": cmd_predict,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def main(argv: Optional[list[str]] = None):
    try:
        subcommand, config, command = parse_args_and_init(argv)
        result = SUBCOMMANDS[subcommand](config, command)  # type: ignore[operator]
    except RingSpectraError as e:
        exit_on_input_error(e)
        raise
    except Exception as e:
        exit_on_exception(e)
        raise

    exit_with_result(result)

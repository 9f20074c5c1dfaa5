"""Operator-facing command line.

Subcommands:

    trace     capture one run (tracer follows children), analyze it, report
    two-run   capture or load a baseline/target pair and diff them
    attach    attach to a running pid for a window of time, then report
    analyze   offline pipeline over a saved log; needs no tracer binary
    scenario  write a synthetic log plus its ground-truth manifest

Exit codes: 0 success, 1 analysis error (bad/unreadable input), 2
environment error (tracer missing, attach refused, pid gone).
"""

from __future__ import annotations

import argparse
import datetime
import os
import posixpath
import socket
import sys

from .analysis import Classifier, FilePackageProvider
from .events import AccessLog, Dialect
from .parsing import detect_dialect, parse_stream
from .replay import replay
from .report import (
    MODE_ATTACH,
    MODE_SINGLE,
    MODE_TWO_RUN,
    RunProvenance,
    build_report,
    emit,
    render_summary,
)
from .scenario import write_scenario
from .tracers import TracerError, check_pid, get_adapter

EXIT_OK = 0
EXIT_ANALYSIS = 1
EXIT_ENVIRONMENT = 2


class AnalysisError(Exception):
    """Bad or unusable analysis input (exit code 1)."""


def _read_log(path: str, role: str = "trace") -> str:
    try:
        with open(path, encoding="utf-8", errors="surrogateescape") as fh:
            return fh.read()
    except OSError as exc:
        raise AnalysisError(f"cannot read {role} log {path!r}: {exc}") from exc


def _resolve_dialect(text: str, choice: str, role: str = "trace") -> Dialect:
    if choice != "auto":
        return Dialect(choice)
    dialect = detect_dialect(text)
    if dialect is None:
        raise AnalysisError(
            f"could not detect the dialect of the {role} log; "
            f"pass --dialect strace or --dialect dtruss"
        )
    return dialect


def _replay_log(text: str, dialect: Dialect, cwd: str) -> tuple[AccessLog, list[str]]:
    parsed = parse_stream(text, dialect)
    warnings = []
    if not parsed.events:
        warnings.append("empty trace")
    for issue in parsed.issues[:10]:
        warnings.append(f"parse issue at line {issue.line_number}: {issue.reason}")
    if len(parsed.issues) > 10:
        warnings.append(f"... and {len(parsed.issues) - 10} more parse issues")
    return replay(parsed, cwd), warnings


def _iso_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _file_provenance(path: str, dialect: Dialect, role: str, mode: str,
                     command: tuple[str, ...] = ()) -> RunProvenance:
    try:
        mtime = os.path.getmtime(path)
        ts = datetime.datetime.fromtimestamp(
            mtime, datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    except OSError:
        ts = "1970-01-01T00:00:00Z"
    return RunProvenance(role, command, dialect, "unknown", ts, path, mode)


def _live_provenance(path: str, dialect: Dialect, role: str, mode: str,
                     command: tuple[str, ...]) -> RunProvenance:
    return RunProvenance(role, command, dialect, socket.gethostname(),
                         _iso_now(), path, mode)


def _classifier(args) -> Classifier | None:
    if not getattr(args, "classify_rules", None):
        return None
    clf = Classifier()
    try:
        with open(args.classify_rules, encoding="utf-8") as fh:
            clf.extend_from_text(fh.read())
    except OSError as exc:
        raise AnalysisError(f"cannot read classification rules: {exc}") from exc
    except ValueError as exc:
        raise AnalysisError(f"bad classification rules: {exc}") from exc
    return clf


def _provider(args):
    if not getattr(args, "packages", None):
        return None
    try:
        return FilePackageProvider(args.packages)
    except (OSError, ValueError, KeyError) as exc:
        raise AnalysisError(f"cannot load package mapping: {exc}") from exc


def _write_output(text: str, output: str | None) -> None:
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)


def _render(report, args) -> str:
    return emit(report) if args.format == "json" else render_summary(report)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_analyze(args) -> int:
    text = _read_log(args.log, "target")
    dialect = _resolve_dialect(text, args.dialect, "target")
    target_log, warnings = _replay_log(text, dialect, args.cwd)

    baseline_log = None
    provenance: list[RunProvenance]
    if args.baseline_log:
        btext = _read_log(args.baseline_log, "baseline")
        bdialect = _resolve_dialect(btext, args.dialect, "baseline")
        baseline_log, bwarnings = _replay_log(btext, bdialect, args.cwd)
        warnings = [f"baseline: {w}" for w in bwarnings] + warnings
        provenance = [
            _file_provenance(args.baseline_log, bdialect, "baseline", MODE_TWO_RUN),
            _file_provenance(args.log, dialect, "target", MODE_TWO_RUN),
        ]
    else:
        provenance = [_file_provenance(args.log, dialect, "single", MODE_SINGLE)]

    report = build_report(
        target_log,
        provenance,
        baseline=baseline_log,
        provider=_provider(args),
        classifier=_classifier(args),
        extra_warnings=warnings,
    )
    _write_output(_render(report, args), args.output)
    return EXIT_OK


def cmd_trace(args) -> int:
    command = list(args.command)
    if command and command[0] == "--":
        command = command[1:]
    if not command:
        raise AnalysisError("no command to trace; usage: trace --log FILE -- PROGRAM ARGS")
    adapter = get_adapter(args.adapter)
    status = adapter.launch(command, args.log)
    warnings = []
    if status != 0:
        warnings.append(f"traced program exited with status {status}")

    text = _read_log(args.log)
    target_log, parse_warnings = _replay_log(text, adapter.dialect, os.getcwd())
    provenance = [_live_provenance(args.log, adapter.dialect, "single",
                                   MODE_SINGLE, tuple(command))]
    report = build_report(
        target_log,
        provenance,
        provider=_provider(args),
        classifier=_classifier(args),
        extra_warnings=warnings + parse_warnings,
    )
    _write_output(_render(report, args), args.output)
    return EXIT_OK


def cmd_two_run(args) -> int:
    from_logs = bool(args.baseline_log and args.target_log)
    from_cmds = bool(args.baseline_cmd and args.target_cmd)
    if not from_logs and not from_cmds:
        raise AnalysisError(
            "two-run needs either --baseline-log and --target-log, or "
            "--baseline-cmd and --target-cmd"
        )

    if from_logs:
        baseline_path, target_path = args.baseline_log, args.target_log
        btext = _read_log(baseline_path, "baseline")
        ttext = _read_log(target_path, "target")
        bdialect = _resolve_dialect(btext, args.dialect, "baseline")
        tdialect = _resolve_dialect(ttext, args.dialect, "target")
        provenance = [
            _file_provenance(baseline_path, bdialect, "baseline", MODE_TWO_RUN),
            _file_provenance(target_path, tdialect, "target", MODE_TWO_RUN),
        ]
    else:
        import shlex

        adapter = get_adapter(args.adapter)
        baseline_cmd = shlex.split(args.baseline_cmd)
        target_cmd = shlex.split(args.target_cmd)
        baseline_path = os.path.join(args.log_dir, "baseline.trace")
        target_path = os.path.join(args.log_dir, "target.trace")
        adapter.launch(baseline_cmd, baseline_path)
        adapter.launch(target_cmd, target_path)
        btext = _read_log(baseline_path, "baseline")
        ttext = _read_log(target_path, "target")
        bdialect = tdialect = adapter.dialect
        provenance = [
            _live_provenance(baseline_path, bdialect, "baseline", MODE_TWO_RUN,
                             tuple(baseline_cmd)),
            _live_provenance(target_path, tdialect, "target", MODE_TWO_RUN,
                             tuple(target_cmd)),
        ]

    baseline_log, bwarnings = _replay_log(btext, bdialect, args.cwd)
    target_log, twarnings = _replay_log(ttext, tdialect, args.cwd)
    warnings = [f"baseline: {w}" for w in bwarnings] + twarnings
    report = build_report(
        target_log,
        provenance,
        baseline=baseline_log,
        provider=_provider(args),
        classifier=_classifier(args),
        extra_warnings=warnings,
    )
    _write_output(_render(report, args), args.output)
    return EXIT_OK


def cmd_attach(args) -> int:
    check_pid(args.pid)
    adapter = get_adapter(args.adapter)
    warnings: list[str] = []
    if args.duration <= 0:
        with open(args.log, "w", encoding="utf-8"):
            pass
        warnings.append(
            f"attach window was {args.duration:g} seconds; nothing captured"
        )
        text = ""
    else:
        adapter.attach(args.pid, args.log, args.duration)
        text = _read_log(args.log)

    target_log, parse_warnings = _replay_log(text, adapter.dialect, args.cwd)
    provenance = [_live_provenance(args.log, adapter.dialect, "attach", MODE_ATTACH, ())]
    report = build_report(
        target_log,
        provenance,
        provider=_provider(args),
        classifier=_classifier(args),
        extra_warnings=warnings + parse_warnings,
    )
    _write_output(_render(report, args), args.output)
    return EXIT_OK


def cmd_scenario(args) -> int:
    write_scenario(args.seed, args.events, args.log, args.manifest)
    print(f"wrote {args.log} and {args.manifest}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_report_options(sub, with_cwd_default: str | None = "/") -> None:
    if with_cwd_default is not None:
        sub.add_argument("--cwd", default=with_cwd_default,
                         help="initial working directory assumed during replay")
    sub.add_argument("--packages", metavar="FILE",
                     help="JSON path-to-package mapping for enrichment")
    sub.add_argument("--classify-rules", metavar="FILE",
                     help="extra classification rules (kind pattern class, one per line)")
    sub.add_argument("--format", choices=["json", "text"], default="json")
    sub.add_argument("--output", "-O", metavar="FILE",
                     help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ri-tracer",
        description="Reconstruct the file dependencies of a rendering process "
                    "from OS call traces and report them as representation "
                    "information.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("analyze", help="offline analysis of a saved trace log")
    p.add_argument("log", help="trace log file")
    p.add_argument("--dialect", choices=["auto", "strace", "dtruss"], default="auto")
    p.add_argument("--baseline-log", metavar="FILE",
                   help="diff against this baseline run")
    _add_report_options(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("trace", help="trace one program run and report it")
    p.add_argument("--log", required=True, help="where to write the raw trace")
    p.add_argument("--adapter", choices=["strace", "dtruss"],
                   help="tracer to use (default: platform pick)")
    _add_report_options(p, with_cwd_default=None)
    p.add_argument("command", nargs=argparse.REMAINDER,
                   help="program and arguments, after --")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("two-run", help="baseline/target comparison")
    p.add_argument("--baseline-log", metavar="FILE")
    p.add_argument("--target-log", metavar="FILE")
    p.add_argument("--baseline-cmd", metavar="CMD", help="shell-style command line")
    p.add_argument("--target-cmd", metavar="CMD")
    p.add_argument("--log-dir", default=".", help="where live captures are written")
    p.add_argument("--dialect", choices=["auto", "strace", "dtruss"], default="auto")
    p.add_argument("--adapter", choices=["strace", "dtruss"])
    _add_report_options(p)
    p.set_defaults(func=cmd_two_run)

    p = sub.add_parser("attach", help="attach to a running process for a while")
    p.add_argument("--pid", type=int, required=True)
    p.add_argument("--duration", type=float, default=30.0,
                   help="seconds to stay attached")
    p.add_argument("--log", required=True, help="where to write the raw trace")
    p.add_argument("--adapter", choices=["strace", "dtruss"])
    _add_report_options(p)
    p.set_defaults(func=cmd_attach)

    p = sub.add_parser("scenario", help="emit a synthetic log plus ground truth")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--events", type=int, default=1000)
    p.add_argument("--log", required=True)
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_scenario)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TracerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ENVIRONMENT
    except AnalysisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())

"""Representation-information reports: build, serialize, load, summarize.

The JSON schema (version "1") is a compatibility surface; changes within
the version are additive only. Top-level keys:

    schemaVersion      "1"
    provenance         list of run records: role (baseline/target/single/
                       attach), command (argv, may be empty), dialect,
                       captureHost, captureTime (ISO-8601), traceFile, mode
                       (two-run/attach/single-run)
    resources          list sorted by path: path, class (e.g. "font/type1"),
                       access {read, wrote, executed, stattedOnly}, pids,
                       bytesRead, optional package {name, version, source}
    delta              optional {added, shared, removed}, each sorted
    missing            list: basename, attemptedPaths (in probe order),
                       errnoNames, pids
    packagesUnresolved integer
    warnings           list of strings

Paths are serialized exactly as reconstructed; they are evidence and are
never re-normalized here. emit() is deterministic: equal reports produce
byte-identical documents.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

from .analysis import (
    Classifier,
    DependencyDelta,
    MissingResource,
    PackageInfo,
    PackageProvider,
    classify,
    detect_missing,
    diff_logs,
    enrich_packages,
)
from .events import READ_MASK, AccessLog, AccessMode, Dialect

SCHEMA_VERSION = "1"

MODE_SINGLE = "single-run"
MODE_TWO_RUN = "two-run"
MODE_ATTACH = "attach"


class ReportError(ValueError):
    """A structurally invalid report document."""


class UnsupportedSchemaVersion(ReportError):
    def __init__(self, version: object):
        super().__init__(f"unsupported report schema version: {version!r} "
                         f"(this tool reads version {SCHEMA_VERSION!r})")
        self.version = version


@dataclass(frozen=True)
class RunProvenance:
    role: str                      # "single" | "baseline" | "target" | "attach"
    command: tuple[str, ...]       # argv of the traced run; empty in attach mode
    dialect: Dialect
    capture_host: str
    capture_time: str              # ISO-8601
    trace_file: str
    mode: str                      # MODE_SINGLE | MODE_TWO_RUN | MODE_ATTACH


@dataclass(frozen=True)
class ReportResource:
    path: str
    resource_class: str
    access: AccessMode
    pids: tuple[int, ...]
    bytes_read: int = 0
    package: PackageInfo | None = None


@dataclass(frozen=True)
class RIReport:
    provenance: tuple[RunProvenance, ...]
    resources: tuple[ReportResource, ...] = ()
    delta: DependencyDelta | None = None
    missing: tuple[MissingResource, ...] = ()
    packages_unresolved: int = 0
    warnings: tuple[str, ...] = ()
    schema_version: str = SCHEMA_VERSION

    @property
    def mode(self) -> str:
        return self.provenance[0].mode if self.provenance else MODE_SINGLE


def build_report(
    target: AccessLog,
    provenance: Iterable[RunProvenance],
    *,
    baseline: AccessLog | None = None,
    diff_mask: AccessMode = READ_MASK,
    provider: PackageProvider | None = None,
    classifier: Classifier | None = None,
    extra_warnings: Iterable[str] = (),
) -> RIReport:
    """Assemble a report from replayed logs.

    When a baseline log is given the report carries the dependency delta
    under `diff_mask` (reads by default), isolating document-specific
    dependencies from the software's own plumbing.
    """
    packages: dict[str, PackageInfo] = {}
    unresolved = 0
    if provider is not None:
        real_paths = [p for p in target.resources if not p.startswith("<fd:")]
        infos, unresolved = enrich_packages(real_paths, provider)
        packages = {info.path: info for info in infos}

    resources = []
    for path in sorted(target.resources):
        res = target.resources[path]
        if classifier is not None:
            cls = classifier.classify(path, res.sniffed_prefix,
                                      executed=res.mode.executed,
                                      directory=res.is_directory)
        else:
            cls = classify(path, res.sniffed_prefix,
                           executed=res.mode.executed,
                           directory=res.is_directory)
        resources.append(ReportResource(
            path=path,
            resource_class=cls.label,
            access=res.mode,
            pids=res.pids,
            bytes_read=res.total_bytes_read,
            package=packages.get(path),
        ))

    delta = diff_logs(baseline, target, diff_mask) if baseline is not None else None
    warnings = list(extra_warnings)
    if baseline is not None:
        warnings.extend(f"baseline: {w}" for w in baseline.warnings)
    warnings.extend(target.warnings)

    return RIReport(
        provenance=tuple(provenance),
        resources=tuple(resources),
        delta=delta,
        missing=tuple(detect_missing(target)),
        packages_unresolved=unresolved,
        warnings=tuple(warnings),
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _provenance_doc(p: RunProvenance) -> dict:
    return {
        "role": p.role,
        "command": list(p.command),
        "dialect": p.dialect.value,
        "captureHost": p.capture_host,
        "captureTime": p.capture_time,
        "traceFile": p.trace_file,
        "mode": p.mode,
    }


def _resource_doc(r: ReportResource) -> dict:
    doc: dict = {
        "path": r.path,
        "class": r.resource_class,
        "access": {
            "read": r.access.read,
            "wrote": r.access.wrote,
            "executed": r.access.executed,
            "stattedOnly": r.access.statted_only,
        },
        "pids": sorted(r.pids),
        "bytesRead": r.bytes_read,
    }
    if r.package is not None:
        doc["package"] = {
            "name": r.package.package_name,
            "version": r.package.package_version,
            "source": r.package.source,
        }
    return doc


def emit(report: RIReport) -> str:
    """Serialize a report; stable key order, sorted lists, trailing newline."""
    doc: dict = {
        "schemaVersion": report.schema_version,
        "provenance": [_provenance_doc(p) for p in report.provenance],
        "resources": [_resource_doc(r) for r in sorted(report.resources, key=lambda r: r.path)],
    }
    if report.delta is not None:
        doc["delta"] = {
            "added": sorted(report.delta.added),
            "shared": sorted(report.delta.shared),
            "removed": sorted(report.delta.removed),
        }
    doc["missing"] = [
        {
            "basename": m.basename,
            "attemptedPaths": list(m.attempted_paths),
            "errnoNames": sorted(m.errno_names),
            "pids": sorted(m.pids),
        }
        for m in report.missing
    ]
    doc["packagesUnresolved"] = report.packages_unresolved
    doc["warnings"] = list(report.warnings)
    return json.dumps(doc, indent=2) + "\n"


def _load_provenance(doc: dict) -> RunProvenance:
    return RunProvenance(
        role=doc["role"],
        command=tuple(doc["command"]),
        dialect=Dialect(doc["dialect"]),
        capture_host=doc["captureHost"],
        capture_time=doc["captureTime"],
        trace_file=doc["traceFile"],
        mode=doc["mode"],
    )


def _load_resource(doc: dict) -> ReportResource:
    access = doc["access"]
    package = None
    if "package" in doc:
        package = PackageInfo(
            path=doc["path"],
            package_name=doc["package"]["name"],
            package_version=doc["package"]["version"],
            source=doc["package"]["source"],
        )
    return ReportResource(
        path=doc["path"],
        resource_class=doc["class"],
        access=AccessMode(
            read=access["read"],
            wrote=access["wrote"],
            executed=access["executed"],
            statted_only=access["stattedOnly"],
        ),
        pids=tuple(doc["pids"]),
        bytes_read=doc["bytesRead"],
        package=package,
    )


def load(text: str) -> RIReport:
    """Parse a report document; inverse of emit on valid reports.

    Raises json.JSONDecodeError (with position) for malformed text,
    UnsupportedSchemaVersion for a version this tool does not read, and
    ReportError for structural problems.
    """
    doc = json.loads(text)
    if not isinstance(doc, dict):
        raise ReportError("report document must be a JSON object")
    version = doc.get("schemaVersion")
    if version != SCHEMA_VERSION:
        raise UnsupportedSchemaVersion(version)
    try:
        delta = None
        if "delta" in doc:
            delta = DependencyDelta(
                added=frozenset(doc["delta"]["added"]),
                shared=frozenset(doc["delta"]["shared"]),
                removed=frozenset(doc["delta"]["removed"]),
            )
        return RIReport(
            provenance=tuple(_load_provenance(p) for p in doc["provenance"]),
            resources=tuple(_load_resource(r) for r in doc["resources"]),
            delta=delta,
            missing=tuple(
                MissingResource(
                    basename=m["basename"],
                    attempted_paths=tuple(m["attemptedPaths"]),
                    errno_names=tuple(m["errnoNames"]),
                    pids=tuple(m["pids"]),
                )
                for m in doc["missing"]
            ),
            packages_unresolved=doc["packagesUnresolved"],
            warnings=tuple(doc["warnings"]),
        )
    except (KeyError, TypeError) as exc:
        raise ReportError(f"malformed report document: {exc!r}") from exc


# ---------------------------------------------------------------------------
# Human-readable summary
# ---------------------------------------------------------------------------

_GROUP_TITLES = {
    "font": "Fonts",
    "shared-library": "Shared libraries",
    "executable": "Executables",
    "media": "Media files",
    "config": "Configuration",
    "directory": "Directories",
    "other": "Other resources",
}
_GROUP_ORDER = ["font", "shared-library", "executable", "media", "config",
                "directory", "other"]


def render_summary(report: RIReport) -> str:
    """Plain-text table of the report, fonts first."""
    lines: list[str] = []
    lines.append(f"mode: {report.mode}")
    for p in report.provenance:
        cmd = " ".join(p.command) if p.command else "(no command recorded)"
        lines.append(f"  {p.role}: {cmd} [{p.dialect.value}] {p.trace_file}")

    groups: dict[str, list[ReportResource]] = {}
    for res in report.resources:
        kind = res.resource_class.partition("/")[0]
        groups.setdefault(kind, []).append(res)

    if not report.resources and not report.missing:
        lines.append("no resources")

    order = _GROUP_ORDER + sorted(k for k in groups if k not in _GROUP_ORDER)
    for kind in order:
        members = groups.get(kind)
        if not members:
            continue
        lines.append(f"{_GROUP_TITLES.get(kind, kind)} ({len(members)}):")
        for res in sorted(members, key=lambda r: r.path):
            detail = f"[{res.resource_class}]"
            if res.bytes_read:
                detail += f" read {res.bytes_read} bytes"
            if res.package is not None:
                version = res.package.package_version or ""
                detail += f" package {res.package.package_name} {version}".rstrip()
            lines.append(f"  {res.path}  {detail}")

    if report.delta is not None:
        lines.append(f"document-specific additions ({len(report.delta.added)}):")
        for path in sorted(report.delta.added):
            lines.append(f"  {path}")

    if report.missing:
        lines.append(f"missing resources ({len(report.missing)}):")
        for m in report.missing:
            errnos = ",".join(m.errno_names)
            lines.append(f"  {m.basename}: probed {len(m.attempted_paths)} locations ({errnos})")
            for path in m.attempted_paths:
                lines.append(f"    {path}")

    if report.warnings:
        lines.append(f"warnings ({len(report.warnings)}):")
        for w in report.warnings:
            lines.append(f"  {w}")

    return "\n".join(lines) + "\n"

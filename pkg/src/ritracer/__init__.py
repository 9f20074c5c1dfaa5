"""Dynamic file-dependency reconstruction from OS call traces.

Capture a rendering process with the platform tracer (strace or dtruss),
replay the log through a descriptor-table state machine, and report every
file-system resource the performance depended on: fonts and other
transcluded media, shared libraries, executed helpers, configuration. A
baseline/target diff isolates document-specific dependencies, and repeated
failed opens expose missing transcluded resources.
"""

from .analysis import (
    Classifier,
    DependencyDelta,
    FilePackageProvider,
    MissingResource,
    PackageInfo,
    classify,
    detect_missing,
    diff_logs,
    enrich_packages,
    fontset,
)
from .events import (
    AccessLog,
    AccessMode,
    ANY_MASK,
    Dialect,
    EXEC_MASK,
    FailedOpen,
    ParsedTrace,
    ParseIssue,
    ProcessNode,
    READ_MASK,
    ResourceAccess,
    STAT_MASK,
    TraceEvent,
    WRITE_MASK,
)
from .parsing import (
    decode_escaped_buffer,
    detect_dialect,
    parse_line,
    parse_stream,
)
from .replay import canonicalize, replay, resource_set
from .report import (
    RIReport,
    ReportError,
    RunProvenance,
    UnsupportedSchemaVersion,
    build_report,
    emit,
    load,
    render_summary,
)
from .scenario import generate as generate_scenario

__version__ = "0.1.0"

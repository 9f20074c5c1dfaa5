"""Domain types for decoded kernel-call trace events.

Everything in this module is an immutable value with structural equality;
no I/O happens here. A trace is a sequence of TraceEvents, each one decoded
kernel call made by some process. Call classes the analysis cares about
(opening, reading, writing, descriptor management, process lifecycle) get
their own variant; everything else is preserved as Other so event indices
stay aligned with log line numbers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Dialect(enum.Enum):
    """Supported tracer output formats."""

    STRACE = "strace"
    DTRUSS = "dtruss"


@dataclass(frozen=True)
class OpenFlags:
    """Access intent of an open call.

    `raw` keeps the original flag text verbatim for audit; unknown flag
    tokens live only there. `directory` is set when the flags ask for a
    directory (O_DIRECTORY), which downstream classification uses.
    """

    read: bool
    write: bool
    create: bool = False
    directory: bool = False
    raw: str = ""


@dataclass(frozen=True)
class CallResult:
    """Return value of a kernel call.

    A failing call carries the errno token (uppercase, e.g. "ENOENT") and
    the tracer's human-readable message; `errno_name` is empty on success.
    """

    value: int
    errno_name: str = ""
    message: str = ""

    @property
    def ok(self) -> bool:
        return not self.errno_name


@dataclass(frozen=True)
class Open:
    path: str
    flags: OpenFlags
    # openat: number of the directory fd the path is relative to, or None
    # for plain open / AT_FDCWD.
    dir_fd: int | None = None


@dataclass(frozen=True)
class Read:
    fd: int
    byte_count: int  # requested size, not the amount actually read


@dataclass(frozen=True)
class Write:
    fd: int
    byte_count: int


@dataclass(frozen=True)
class Close:
    fd: int


@dataclass(frozen=True)
class Dup:
    old_fd: int
    new_fd: int


@dataclass(frozen=True)
class Fork:
    # None when the fork itself failed and no child exists.
    child_pid: int | None


@dataclass(frozen=True)
class Exec:
    program: str
    # Empty when the tracer could not log argument values (dtruss).
    argv: tuple[str, ...] = ()


@dataclass(frozen=True)
class Chdir:
    path: str


@dataclass(frozen=True)
class Stat:
    """A metadata probe (stat/lstat/access family) that names a path."""

    path: str


@dataclass(frozen=True)
class Other:
    """Any kernel call the dialects do not map; kept, never dropped."""

    name: str
    args: tuple[str, ...] = ()


Call = Open | Read | Write | Close | Dup | Fork | Exec | Chdir | Stat | Other


@dataclass(frozen=True)
class TraceEvent:
    """One decoded kernel-call record.

    `read_prefix` holds the decoded leading bytes of a read buffer when the
    tracer printed them (only ever set on Read events); `prefix_truncated`
    records that the tracer cut the buffer off.
    """

    pid: int
    call: Call
    result: CallResult
    line_number: int
    read_prefix: bytes | None = None
    prefix_truncated: bool = False


@dataclass(frozen=True)
class ParseIssue:
    """A line the parser could not turn into an event. Never an exception."""

    line_number: int
    raw_line: str
    reason: str


@dataclass(frozen=True)
class ParsedTrace:
    """Parse result for one whole trace log.

    Line accounting holds: len(events) + len(issues) + skipped equals the
    number of logical lines (physical lines minus `merged` continuation
    pairs that were folded into single events).
    """

    events: tuple[TraceEvent, ...]
    issues: tuple[ParseIssue, ...]
    dialect: Dialect
    skipped: int = 0
    merged: int = 0


@dataclass(frozen=True)
class ProcessNode:
    """One process observed in a trace; parent is None for root pids."""

    pid: int
    parent: int | None = None
    program: str | None = None
    argv: tuple[str, ...] = ()


@dataclass(frozen=True)
class AccessMode:
    """How a resource was touched. statted_only means a metadata probe was
    the strongest access observed."""

    read: bool = False
    wrote: bool = False
    executed: bool = False
    statted_only: bool = False

    def intersects(self, mask: "AccessMode") -> bool:
        return (
            (self.read and mask.read)
            or (self.wrote and mask.wrote)
            or (self.executed and mask.executed)
            or (self.statted_only and mask.statted_only)
        )


READ_MASK = AccessMode(read=True)
WRITE_MASK = AccessMode(wrote=True)
EXEC_MASK = AccessMode(executed=True)
STAT_MASK = AccessMode(statted_only=True)
ANY_MASK = AccessMode(read=True, wrote=True, executed=True, statted_only=True)


@dataclass(frozen=True)
class ResourceAccess:
    """Aggregate record of every touch of one canonical path."""

    path: str
    mode: AccessMode
    pids: tuple[int, ...]
    first_event: int
    total_bytes_read: int = 0
    sniffed_prefix: bytes | None = None
    is_directory: bool = False


@dataclass(frozen=True)
class FailedOpen:
    attempted_path: str
    errno_name: str
    pid: int
    line_number: int


@dataclass(frozen=True)
class AccessLog:
    """Reconstructed per-run resource map.

    `resources` is keyed by canonical path and iterates in lexicographic
    path order. Synthetic entries named "<fd:N of pid P>" stand in for
    descriptors inherited from before the trace began.
    """

    resources: dict[str, ResourceAccess] = field(default_factory=dict)
    failed_opens: tuple[FailedOpen, ...] = ()
    processes: tuple[ProcessNode, ...] = ()
    warnings: tuple[str, ...] = ()

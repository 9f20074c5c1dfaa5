"""Replay parsed trace events through a per-process state machine.

Each process gets a descriptor table and a working directory; fork copies
both to the child, exec records the program, close releases bindings.
Replaying a trace reconstructs which file-system resources were touched,
how (read/written/executed/only probed), and by which processes.

Replay is offline and purely lexical: paths are normalized without looking
at any real filesystem, so a log captured on one machine can be analyzed on
another and the report shows paths exactly as the traced program addressed
them.
"""

from __future__ import annotations

import posixpath
from dataclasses import dataclass, field

from .events import (
    AccessLog,
    AccessMode,
    Chdir,
    Close,
    Dup,
    Exec,
    FailedOpen,
    Fork,
    Open,
    Other,
    ParsedTrace,
    ProcessNode,
    Read,
    ResourceAccess,
    Stat,
    TraceEvent,
    Write,
)

_MMAP_NAMES = {"mmap", "mmap2", "old_mmap"}


def canonicalize(cwd: str, raw: str) -> str:
    """Resolve a path to absolute form, collapsing . and .. lexically.

    Symlinks are deliberately not resolved: replay may run on a different
    machine than capture, and the log alone must determine the result.
    Raises ValueError for an empty path or a relative cwd.
    """
    if not raw:
        raise ValueError("empty path in event")
    if not cwd.startswith("/"):
        raise ValueError(f"cwd must be absolute, got {cwd!r}")
    path = raw if raw.startswith("/") else posixpath.join(cwd, raw)
    norm = posixpath.normpath(path)
    if norm.startswith("//"):
        norm = "/" + norm.lstrip("/")
    return norm


def synthetic_fd_path(fd: int, pid: int) -> str:
    """Name for a resource reached through a descriptor opened before the
    trace began (attach mode) or otherwise never seen being opened."""
    return f"<fd:{fd} of pid {pid}>"


@dataclass
class _Acc:
    """Mutable per-path accumulator used only during replay."""

    first_event: int
    read: bool = False
    wrote: bool = False
    executed: bool = False
    statted: bool = False
    is_directory: bool = False
    bytes_read: int = 0
    sniff: bytes | None = None
    pids: set[int] = field(default_factory=set)


class _ReplayState:
    def __init__(self, initial_cwd: str):
        self.initial_cwd = initial_cwd
        self.fd_tables: dict[int, dict[int, str]] = {}
        self.cwds: dict[int, str] = {}
        self.proc_order: list[int] = []
        self.parents: dict[int, int | None] = {}
        self.programs: dict[int, str | None] = {}
        self.argvs: dict[int, tuple[str, ...]] = {}
        self.resources: dict[str, _Acc] = {}
        self.failed: list[FailedOpen] = []
        self.warnings: list[str] = []

    def ensure_pid(self, pid: int) -> None:
        if pid not in self.fd_tables:
            self.fd_tables[pid] = {}
            self.cwds[pid] = self.initial_cwd
            self.proc_order.append(pid)
            self.parents[pid] = None
            self.programs[pid] = None
            self.argvs[pid] = ()

    def touch(self, path: str, line: int, pid: int, *, read: bool = False,
              wrote: bool = False, executed: bool = False, statted: bool = False,
              directory: bool = False) -> _Acc:
        acc = self.resources.get(path)
        if acc is None:
            acc = _Acc(first_event=line)
            self.resources[path] = acc
        acc.read = acc.read or read
        acc.wrote = acc.wrote or wrote
        acc.executed = acc.executed or executed
        acc.statted = acc.statted or statted
        acc.is_directory = acc.is_directory or directory
        acc.pids.add(pid)
        return acc

    def warn(self, message: str) -> None:
        self.warnings.append(message)


def _mmap_fd(args: tuple[str, ...]) -> int | None:
    if len(args) < 5:
        return None
    token = args[4].strip()
    try:
        value = int(token, 16) if token.lower().startswith("0x") else int(token)
    except ValueError:
        return None
    if value >= 1 << 31:
        value -= 1 << 32
    return value


def _apply(state: _ReplayState, event: TraceEvent) -> None:
    pid = event.pid
    state.ensure_pid(pid)
    call = event.call
    result = event.result
    fds = state.fd_tables[pid]
    line = event.line_number

    if isinstance(call, Open):
        base = state.cwds[pid]
        if call.dir_fd is not None:
            bound_dir = fds.get(call.dir_fd)
            if bound_dir is not None:
                base = bound_dir
            else:
                state.warn(
                    f"openat via unknown directory fd {call.dir_fd} by pid {pid} "
                    f"(line {line}); falling back to its working directory"
                )
        try:
            path = canonicalize(base, call.path)
        except ValueError as exc:
            state.warn(f"malformed open path at line {line}: {exc}")
            return
        if result.ok and result.value >= 0:
            fds[result.value] = path
            state.touch(path, line, pid, read=call.flags.read,
                        wrote=call.flags.write, directory=call.flags.directory)
        elif not result.ok:
            state.failed.append(FailedOpen(path, result.errno_name, pid, line))

    elif isinstance(call, Read):
        if not result.ok:
            return
        path = fds.get(call.fd)
        if path is None:
            path = synthetic_fd_path(call.fd, pid)
            state.warn(
                f"read from fd {call.fd} never seen opened by pid {pid} "
                f"(line {line}); attributed to {path}"
            )
        acc = state.touch(path, line, pid, read=True)
        acc.bytes_read += max(result.value, 0)
        if event.read_prefix is not None and acc.sniff is None:
            acc.sniff = event.read_prefix

    elif isinstance(call, Write):
        if not result.ok:
            return
        path = fds.get(call.fd)
        if path is None:
            path = synthetic_fd_path(call.fd, pid)
            state.warn(
                f"write to fd {call.fd} never seen opened by pid {pid} "
                f"(line {line}); attributed to {path}"
            )
        state.touch(path, line, pid, wrote=True)

    elif isinstance(call, Close):
        if call.fd not in fds:
            state.warn(f"close of unknown fd {call.fd} by pid {pid} (line {line})")
        elif result.ok:
            del fds[call.fd]

    elif isinstance(call, Dup):
        if not result.ok:
            return
        path = fds.get(call.old_fd)
        if path is None:
            state.warn(f"dup of unknown fd {call.old_fd} by pid {pid} (line {line})")
        elif call.new_fd >= 0:
            fds[call.new_fd] = path

    elif isinstance(call, Fork):
        if not result.ok or call.child_pid is None:
            return
        child = call.child_pid
        if child in state.fd_tables:
            state.warn(f"pid {child} forked twice (line {line}); resetting its state")
        else:
            state.proc_order.append(child)
            state.programs[child] = None
            state.argvs[child] = ()
        state.parents[child] = pid
        state.fd_tables[child] = dict(fds)
        state.cwds[child] = state.cwds[pid]

    elif isinstance(call, Exec):
        if not result.ok:
            return
        try:
            program = canonicalize(state.cwds[pid], call.program)
        except ValueError as exc:
            state.warn(f"malformed exec path at line {line}: {exc}")
            return
        state.programs[pid] = program
        state.argvs[pid] = call.argv
        state.touch(program, line, pid, executed=True)

    elif isinstance(call, Chdir):
        if not result.ok:
            return
        try:
            state.cwds[pid] = canonicalize(state.cwds[pid], call.path)
        except ValueError as exc:
            state.warn(f"malformed chdir path at line {line}: {exc}")

    elif isinstance(call, Stat):
        if not result.ok:
            return
        try:
            path = canonicalize(state.cwds[pid], call.path)
        except ValueError as exc:
            state.warn(f"malformed stat path at line {line}: {exc}")
            return
        state.touch(path, line, pid, statted=True)

    elif isinstance(call, Other):
        if call.name in _MMAP_NAMES:
            fd = _mmap_fd(call.args)
            if fd is not None and fd >= 0 and fd in fds:
                state.warn(
                    f"mmap of {fds[fd]} (fd {fd}) by pid {pid} at line {line} "
                    f"is not counted as a read"
                )


def replay(trace: ParsedTrace, initial_cwd: str) -> AccessLog:
    """Reconstruct the resource map of one traced run.

    Total function: anomalies (unknown descriptors, malformed paths, pid
    reuse) become warnings, never exceptions. Deterministic: the same trace
    and working directory always produce a structurally equal AccessLog.
    """
    if not initial_cwd.startswith("/"):
        raise ValueError(f"initial cwd must be absolute, got {initial_cwd!r}")
    state = _ReplayState(posixpath.normpath(initial_cwd))
    for event in trace.events:
        _apply(state, event)

    resources: dict[str, ResourceAccess] = {}
    for path in sorted(state.resources):
        acc = state.resources[path]
        mode = AccessMode(
            read=acc.read,
            wrote=acc.wrote,
            executed=acc.executed,
            statted_only=acc.statted and not (acc.read or acc.wrote or acc.executed),
        )
        resources[path] = ResourceAccess(
            path=path,
            mode=mode,
            pids=tuple(sorted(acc.pids)),
            first_event=acc.first_event,
            total_bytes_read=acc.bytes_read,
            sniffed_prefix=acc.sniff,
            is_directory=acc.is_directory,
        )

    processes = tuple(
        ProcessNode(
            pid=pid,
            parent=state.parents[pid],
            program=state.programs[pid],
            argv=state.argvs[pid],
        )
        for pid in state.proc_order
    )
    return AccessLog(
        resources=resources,
        failed_opens=tuple(state.failed),
        processes=processes,
        warnings=tuple(state.warnings),
    )


def resource_set(log: AccessLog, mask: AccessMode) -> set[str]:
    """Paths whose access mode intersects the mask."""
    return {path for path, res in log.resources.items() if res.mode.intersects(mask)}

"""Turn raw tracer output (strace or dtruss text) into TraceEvents.

The two supported log grammars:

strace (Linux), as produced by ``strace -f -o LOG``::

    5336  open("/usr/share/fonts/type1/gsfonts/n019004l.pfb", O_RDONLY) = 4
    5336  read(4, "\\200\\1\\f\\5\\0\\0%!PS-AdobeFont-1.0: Nimbus"..., 4096) = 4096
    5336  close(4) = 0
    5336  openat(AT_FDCWD, "/etc/passwd", O_RDONLY|O_CLOEXEC) = -1 ENOENT (No such file or directory)
    5336  wait4(-1,  <unfinished ...>
    5337  +++ exited with 0 +++
    5336  <... wait4 resumed> [{WIFEXITED(s)}], 0, NULL) = 5337

dtruss (macOS), as produced by ``dtruss -f``; kernel-call names differ
slightly (``_nocancel`` twins), numbers are hex, copied-in strings keep a
trailing NUL, and errors show as ``Err#N``::

      5336/0x1f03:  open_nocancel("/etc/hosts\\0", 0x0, 0x1B6)\t\t = 3 0
      5336/0x1f03:  read_nocancel(0x3, "127.0.0.1\\tlocalhost\\n\\0", 0x1000)\t\t = 22 0
      5336/0x1f03:  open("/nope\\0", 0x0, 0x0)\t\t = -1 Err#2

Parsing is total: every input line becomes a TraceEvent, a skip (tracer
chatter the grammar recognises), or a ParseIssue. Nothing raises.
"""

from __future__ import annotations

import re

from .events import (
    Call,
    CallResult,
    Chdir,
    Close,
    Dialect,
    Dup,
    Exec,
    Fork,
    Open,
    OpenFlags,
    Other,
    ParsedTrace,
    ParseIssue,
    Read,
    Stat,
    TraceEvent,
    Write,
)


class BufferDecodeError(ValueError):
    """Raised for an invalid escape sequence in a traced string."""


# ---------------------------------------------------------------------------
# C-style escape decoding / encoding
# ---------------------------------------------------------------------------

_SHORT_ESCAPES = {
    "n": 0x0A, "t": 0x09, "r": 0x0D, "f": 0x0C, "v": 0x0B,
    "a": 0x07, "b": 0x08, "\\": 0x5C, '"': 0x22, "'": 0x27,
}
_REVERSE_ESCAPES = {0x0A: "\\n", 0x09: "\\t", 0x0D: "\\r", 0x0C: "\\f",
                    0x0B: "\\v", 0x5C: "\\\\", 0x22: '\\"'}


def _decode_c_escapes(raw: str) -> bytes:
    """Decode the body of a traced string literal into bytes."""
    out = bytearray()
    i = 0
    n = len(raw)
    while i < n:
        ch = raw[i]
        if ch != "\\":
            out.extend(ch.encode("utf-8", "surrogateescape"))
            i += 1
            continue
        if i + 1 >= n:
            raise BufferDecodeError("trailing backslash")
        nxt = raw[i + 1]
        if nxt in _SHORT_ESCAPES:
            out.append(_SHORT_ESCAPES[nxt])
            i += 2
        elif nxt in "01234567":
            j = i + 1
            digits = ""
            while j < n and raw[j] in "01234567" and len(digits) < 3:
                digits += raw[j]
                j += 1
            value = int(digits, 8)
            if value > 0xFF:
                raise BufferDecodeError(f"octal escape out of range: \\{digits}")
            out.append(value)
            i = j
        elif nxt == "x":
            j = i + 2
            digits = ""
            while j < n and raw[j] in "0123456789abcdefABCDEF" and len(digits) < 2:
                digits += raw[j]
                j += 1
            if not digits:
                raise BufferDecodeError("\\x escape without hex digits")
            out.append(int(digits, 16))
            i = j
        else:
            raise BufferDecodeError(f"invalid escape: \\{nxt}")
    return bytes(out)


def decode_escaped_buffer(raw: str) -> tuple[bytes, bool]:
    """Decode a traced buffer body; returns (bytes, truncated).

    `raw` is the quoted-string body of a buffer argument, optionally with
    the tracer's trailing truncation marker ``...`` appended (the marker is
    recorded, not decoded). Raises BufferDecodeError on an invalid escape,
    which the line parser converts into a ParseIssue.
    """
    truncated = False
    if raw.endswith("..."):
        truncated = True
        raw = raw[:-3]
    return _decode_c_escapes(raw), truncated


def encode_buffer(data: bytes) -> str:
    """Escape bytes the way strace prints buffers; inverse of the decoder."""
    out = []
    for b in data:
        if b in _REVERSE_ESCAPES:
            out.append(_REVERSE_ESCAPES[b])
        elif 0x20 <= b <= 0x7E:
            out.append(chr(b))
        else:
            out.append(f"\\{b:03o}")
    return "".join(out)


# ---------------------------------------------------------------------------
# Shared argument helpers
# ---------------------------------------------------------------------------

_QUOTED = re.compile(r'^"(?P<body>(?:\\.|[^"\\])*)"(?P<trunc>\.\.\.)?$')


def split_args(text: str) -> list[str]:
    """Split a call's argument text on top-level commas.

    Respects quoted strings (with backslash escapes) and nested
    (), [], {} groups, so struct and list arguments stay whole.
    """
    parts: list[str] = []
    buf: list[str] = []
    depth = 0
    in_str = False
    esc = False
    for ch in text:
        if in_str:
            buf.append(ch)
            if esc:
                esc = False
            elif ch == "\\":
                esc = True
            elif ch == '"':
                in_str = False
            continue
        if ch == '"':
            in_str = True
            buf.append(ch)
        elif ch in "([{":
            depth += 1
            buf.append(ch)
        elif ch in ")]}":
            depth -= 1
            buf.append(ch)
        elif ch == "," and depth <= 0:
            parts.append("".join(buf).strip())
            buf = []
        else:
            buf.append(ch)
    tail = "".join(buf).strip()
    if tail:
        parts.append(tail)
    return parts


def _unquote(arg: str) -> tuple[bytes, bool] | None:
    """Decode a quoted-string argument; None if the arg is not a string."""
    m = _QUOTED.match(arg)
    if not m:
        return None
    return _decode_c_escapes(m.group("body")), bool(m.group("trunc"))


def _path_arg(arg: str, strip_nul: bool = False) -> str:
    data = _unquote(arg)
    if data is None:
        raise BufferDecodeError(f"expected a quoted path, got {arg!r}")
    raw = data[0]
    if strip_nul and raw.endswith(b"\x00"):
        raw = raw[:-1]
    return raw.decode("utf-8", "surrogateescape")


def _argv_list(arg: str) -> tuple[str, ...]:
    if not (arg.startswith("[") and arg.endswith("]")):
        return ()
    items = []
    for elem in split_args(arg[1:-1]):
        if elem == "...":
            continue  # strace elides very long vectors
        data = _unquote(elem)
        if data is not None:
            items.append(data[0].decode("utf-8", "surrogateescape"))
    return tuple(items)


# ---------------------------------------------------------------------------
# strace dialect
# ---------------------------------------------------------------------------

_STRACE_PID = re.compile(r"^\s*(?P<pid>\d+)\s+(?P<rest>\S.*)$")
#: optional -t/-tt/-ttt/-r timestamp between pid and call name
_STRACE_TIME = re.compile(r"^(?:\d+:\d+:\d+(?:\.\d+)?|\d+\.\d+)\s+")
_STRACE_CALL = re.compile(
    r"^(?P<name>[a-zA-Z_][\w$]*)\((?P<args>.*)\)\s+=\s+"
    r"(?P<ret>-?\d+|0x[0-9a-fA-F]+|\?)(?P<rest>$|\s.*$)"
)
_STRACE_UNFINISHED = re.compile(
    r"^(?P<name>[a-zA-Z_][\w$]*)\((?P<args>.*?)\s*<unfinished[^>]*>\s*$"
)
_STRACE_RESUMED = re.compile(
    r"^<\.\.\.\s+(?P<name>[\w$]+)\s+resumed>\s*(?P<rest>.*)$"
)
_STRACE_ERRNO = re.compile(r"^\s*(?P<err>E[A-Z0-9_]+)\s*(?:\((?P<msg>[^)]*)\))?")
#: rows of an `strace -c` style summary table
_SUMMARY_ROW = re.compile(r"^\s*(?:% time\b|-{6,}|total\b|\d+\.\d+\s+\d+\.\d+)")

_STRACE_STAT_PATH_FIRST = {"stat", "stat64", "lstat", "lstat64", "oldstat", "access"}
_STRACE_STAT_PATH_SECOND = {"statx", "newfstatat", "fstatat64", "faccessat", "faccessat2"}
_STRACE_READ = {"read", "pread", "pread64"}
_STRACE_WRITE = {"write", "pwrite", "pwrite64"}
_STRACE_FORK = {"fork", "vfork", "clone", "clone2", "clone3"}
_MMAP_NAMES = {"mmap", "mmap2", "old_mmap"}


def _parse_strace_flags(raw: str) -> OpenFlags:
    tokens = set(raw.split("|"))
    read = "O_RDONLY" in tokens or "O_RDWR" in tokens
    write = "O_WRONLY" in tokens or "O_RDWR" in tokens
    if not (read or write):
        read = True  # O_RDONLY is the zero flag; its absence means mode 0
    return OpenFlags(
        read=read,
        write=write,
        create="O_CREAT" in tokens,
        directory="O_DIRECTORY" in tokens,
        raw=raw,
    )


def _int_arg(arg: str) -> int:
    arg = arg.strip()
    if arg.lower().startswith("0x"):
        return int(arg, 16)
    return int(arg)


def _dirfd_arg(arg: str) -> int | None:
    if arg == "AT_FDCWD":
        return None
    value = _int_arg(arg)
    if value >= 1 << 63:
        value -= 1 << 64
    return None if value == -100 else value


def _strace_result(ret: str, rest: str) -> CallResult:
    errno = ""
    message = ""
    m = _STRACE_ERRNO.match(rest)
    if m:
        errno = m.group("err")
        message = m.group("msg") or ""
    if ret == "?":
        value = -1 if errno else 0
    elif ret.lower().startswith("0x"):
        value = int(ret, 16)
    else:
        value = int(ret)
    return CallResult(value=value, errno_name=errno, message=message)


def _map_strace_call(
    name: str, args: list[str], result: CallResult
) -> tuple[Call, bytes | None, bool]:
    """Build the call variant; returns (call, read_prefix, prefix_truncated)."""
    prefix: bytes | None = None
    truncated = False

    if name in ("open", "creat"):
        raw_flags = args[1] if name == "open" and len(args) > 1 else "O_WRONLY|O_CREAT|O_TRUNC"
        call: Call = Open(path=_path_arg(args[0]), flags=_parse_strace_flags(raw_flags))
    elif name in ("openat", "openat2"):
        flag_text = args[2] if len(args) > 2 else ""
        if name == "openat2":
            # flags live inside the how struct; pick out the O_ tokens
            tokens = re.findall(r"O_[A-Z_]+", flag_text)
            flag_text = "|".join(tokens)
        call = Open(
            path=_path_arg(args[1]),
            flags=_parse_strace_flags(flag_text),
            dir_fd=_dirfd_arg(args[0]),
        )
    elif name in _STRACE_READ:
        call = Read(fd=_int_arg(args[0]), byte_count=_int_arg(args[2]))
        data = _unquote(args[1])
        if data is not None:
            prefix, truncated = data
    elif name in _STRACE_WRITE:
        call = Write(fd=_int_arg(args[0]), byte_count=_int_arg(args[2]))
    elif name == "close":
        call = Close(fd=_int_arg(args[0]))
    elif name == "dup":
        call = Dup(old_fd=_int_arg(args[0]), new_fd=result.value if result.ok else -1)
    elif name in ("dup2", "dup3"):
        call = Dup(old_fd=_int_arg(args[0]), new_fd=_int_arg(args[1]))
    elif name in _STRACE_FORK:
        call = Fork(child_pid=result.value if result.ok and result.value > 0 else None)
    elif name == "execve":
        call = Exec(program=_path_arg(args[0]), argv=_argv_list(args[1]) if len(args) > 1 else ())
    elif name == "execveat":
        call = Exec(program=_path_arg(args[1]), argv=_argv_list(args[2]) if len(args) > 2 else ())
    elif name == "chdir":
        call = Chdir(path=_path_arg(args[0]))
    elif name in _STRACE_STAT_PATH_FIRST:
        call = Stat(path=_path_arg(args[0]))
    elif name in _STRACE_STAT_PATH_SECOND:
        call = Stat(path=_path_arg(args[1]))
    else:
        call = Other(name=name, args=tuple(args))
    return call, prefix, truncated


def _parse_strace_line(line: str, line_number: int) -> TraceEvent | None | ParseIssue:
    text = line.strip()
    if not text:
        return None
    if text.startswith("strace:") or "<detached" in text:
        return None
    if _SUMMARY_ROW.match(line):
        return None

    m = _STRACE_PID.match(line)
    if not m:
        return ParseIssue(line_number, line, "no pid prefix")
    pid = int(m.group("pid"))
    if pid <= 0:
        return ParseIssue(line_number, line, "pid must be positive")
    rest = m.group("rest")
    t = _STRACE_TIME.match(rest)
    if t:
        rest = rest[t.end():]

    if rest.startswith("+++") or rest.startswith("---"):
        return None
    if _STRACE_UNFINISHED.match(rest) or _STRACE_RESUMED.match(rest):
        return ParseIssue(line_number, line, "unmerged continuation fragment")

    call_m = _STRACE_CALL.match(rest)
    if not call_m:
        return ParseIssue(line_number, line, "unrecognized call syntax")
    result = _strace_result(call_m.group("ret"), call_m.group("rest"))
    if result.value == -1 and call_m.group("ret") == "-1" and not result.errno_name:
        return ParseIssue(line_number, line, "failing call without errno token")
    args = split_args(call_m.group("args"))
    try:
        call, prefix, truncated = _map_strace_call(call_m.group("name"), args, result)
    except (BufferDecodeError, ValueError, IndexError) as exc:
        return ParseIssue(line_number, line, f"bad arguments: {exc}")
    return TraceEvent(
        pid=pid,
        call=call,
        result=result,
        line_number=line_number,
        read_prefix=prefix,
        prefix_truncated=truncated,
    )


# ---------------------------------------------------------------------------
# dtruss dialect
# ---------------------------------------------------------------------------

_DTRUSS_PID = re.compile(r"^\s*(?P<pid>\d+)/0x[0-9a-fA-F]+:\s*(?P<rest>.*)$")
_DTRUSS_CALL = re.compile(
    r"^(?P<name>[a-zA-Z_][\w$]*)\((?P<args>.*)\)\s*=\s*"
    r"(?P<ret>-?\d+|0x[0-9a-fA-F]+)(?:\s+(?P<err>Err#\d+|-?\d+))?\s*$"
)

#: XNU errno numbers as dtruss reports them (Err#N)
_BSD_ERRNO = {
    1: "EPERM", 2: "ENOENT", 3: "ESRCH", 4: "EINTR", 5: "EIO", 6: "ENXIO",
    7: "E2BIG", 8: "ENOEXEC", 9: "EBADF", 10: "ECHILD", 11: "EDEADLK",
    12: "ENOMEM", 13: "EACCES", 14: "EFAULT", 16: "EBUSY", 17: "EEXIST",
    18: "EXDEV", 19: "ENODEV", 20: "ENOTDIR", 21: "EISDIR", 22: "EINVAL",
    23: "ENFILE", 24: "EMFILE", 25: "ENOTTY", 26: "ETXTBSY", 27: "EFBIG",
    28: "ENOSPC", 29: "ESPIPE", 30: "EROFS", 31: "EMLINK", 32: "EPIPE",
    33: "EDOM", 34: "ERANGE", 35: "EAGAIN",
}

_DTRUSS_STAT = {"stat", "stat64", "lstat", "lstat64", "access", "getattrlist"}
_DTRUSS_READ = {"read", "pread"}
_DTRUSS_WRITE = {"write", "pwrite"}
_DTRUSS_FORK = {"fork", "vfork"}

# macOS open(2) flag bits
_O_ACCMODE = 0x3
_O_CREAT_MAC = 0x200
_O_DIRECTORY_MAC = 0x100000


def _parse_dtruss_flags(raw: str) -> OpenFlags:
    value = _int_arg(raw)
    accmode = value & _O_ACCMODE
    return OpenFlags(
        read=accmode in (0, 2, 3),
        write=accmode in (1, 2, 3),
        create=bool(value & _O_CREAT_MAC),
        directory=bool(value & _O_DIRECTORY_MAC),
        raw=raw,
    )


def _dtruss_errno_name(err: str) -> str:
    number = int(err[4:]) if err.startswith("Err#") else int(err)
    return _BSD_ERRNO.get(number, f"ERRNO{number}")


def _map_dtruss_call(
    name: str, args: list[str], result: CallResult
) -> tuple[Call, bytes | None, bool]:
    prefix: bytes | None = None
    truncated = False

    if name == "open":
        call: Call = Open(
            path=_path_arg(args[0], strip_nul=True),
            flags=_parse_dtruss_flags(args[1]) if len(args) > 1 else OpenFlags(True, False, raw=""),
        )
    elif name == "openat":
        call = Open(
            path=_path_arg(args[1], strip_nul=True),
            flags=_parse_dtruss_flags(args[2]) if len(args) > 2 else OpenFlags(True, False, raw=""),
            dir_fd=_dirfd_arg(args[0]),
        )
    elif name in _DTRUSS_READ:
        call = Read(fd=_int_arg(args[0]), byte_count=_int_arg(args[2]))
        data = _unquote(args[1])
        if data is not None:
            body, truncated = data
            if body.endswith(b"\x00"):
                body = body[:-1]  # copyinstr terminator, not file data
            prefix = body
    elif name in _DTRUSS_WRITE:
        call = Write(fd=_int_arg(args[0]), byte_count=_int_arg(args[2]))
    elif name == "close":
        call = Close(fd=_int_arg(args[0]))
    elif name == "dup":
        call = Dup(old_fd=_int_arg(args[0]), new_fd=result.value if result.ok else -1)
    elif name == "dup2":
        call = Dup(old_fd=_int_arg(args[0]), new_fd=_int_arg(args[1]))
    elif name in _DTRUSS_FORK:
        call = Fork(child_pid=result.value if result.ok and result.value > 0 else None)
    elif name == "execve":
        # dtruss cannot log the argument vector, only the program path
        call = Exec(program=_path_arg(args[0], strip_nul=True), argv=())
    elif name == "chdir":
        call = Chdir(path=_path_arg(args[0], strip_nul=True))
    elif name in _DTRUSS_STAT:
        call = Stat(path=_path_arg(args[0], strip_nul=True))
    else:
        call = Other(name=name, args=tuple(args))
    return call, prefix, truncated


def _parse_dtruss_line(line: str, line_number: int) -> TraceEvent | None | ParseIssue:
    text = line.strip()
    if not text:
        return None
    if text.startswith("dtrace:") or "SYSCALL(args)" in text or text == "PID/THRD":
        return None

    pid = 1  # single-process log without the pid column
    rest = line
    m = _DTRUSS_PID.match(line)
    if m:
        pid = int(m.group("pid"))
        if pid <= 0:
            return ParseIssue(line_number, line, "pid must be positive")
        rest = m.group("rest")

    call_m = _DTRUSS_CALL.match(rest.strip())
    if not call_m:
        return ParseIssue(line_number, line, "unrecognized call syntax")
    err = call_m.group("err")
    ret = call_m.group("ret")
    value = int(ret, 16) if ret.lower().startswith("0x") else int(ret)
    if err and err != "0":
        result = CallResult(value=value, errno_name=_dtruss_errno_name(err))
    else:
        result = CallResult(value=value)

    name = call_m.group("name")
    if name.endswith("_nocancel"):
        name = name[: -len("_nocancel")]
    args = split_args(call_m.group("args"))
    try:
        call, prefix, truncated = _map_dtruss_call(name, args, result)
    except (BufferDecodeError, ValueError, IndexError) as exc:
        return ParseIssue(line_number, line, f"bad arguments: {exc}")
    return TraceEvent(
        pid=pid,
        call=call,
        result=result,
        line_number=line_number,
        read_prefix=prefix,
        prefix_truncated=truncated,
    )


# ---------------------------------------------------------------------------
# Public entry points
# ---------------------------------------------------------------------------

def parse_line(line: str, dialect: Dialect, line_number: int) -> TraceEvent | None | ParseIssue:
    """Parse one complete logical trace line.

    Returns a TraceEvent, None for recognised tracer chatter (signal notes,
    exit notes, summary rows, blank lines), or a ParseIssue. Continuation
    halves must be merged by parse_stream first; a stray half becomes a
    ParseIssue here.
    """
    if dialect is Dialect.STRACE:
        return _parse_strace_line(line, line_number)
    return _parse_dtruss_line(line, line_number)


def parse_stream(text: str, dialect: Dialect) -> ParsedTrace:
    """Parse a whole trace log; never raises.

    strace splits calls that block across two half-lines; the halves are
    merged (keyed per pid) and the joined event sits at the position of the
    resumed half. Unmatched halves are reported as issues.
    """
    events: list[TraceEvent] = []
    issues: list[ParseIssue] = []
    skipped = 0
    merged = 0
    # pid -> (call name, first args half, line number, raw line)
    pending: dict[int, tuple[str, str, int, str]] = {}

    def dispatch(out: TraceEvent | None | ParseIssue) -> None:
        nonlocal skipped
        if out is None:
            skipped += 1
        elif isinstance(out, ParseIssue):
            issues.append(out)
        else:
            events.append(out)

    for line_number, raw in enumerate(text.splitlines(), 1):
        if dialect is Dialect.STRACE:
            pid_m = _STRACE_PID.match(raw)
            if pid_m:
                pid = int(pid_m.group("pid"))
                rest = pid_m.group("rest")
                t = _STRACE_TIME.match(rest)
                if t:
                    rest = rest[t.end():]
                um = _STRACE_UNFINISHED.match(rest)
                if um:
                    if pid in pending:
                        name, _, old_line, old_raw = pending[pid]
                        issues.append(ParseIssue(
                            old_line, old_raw,
                            f"unfinished {name} evicted by a second unfinished call",
                        ))
                    pending[pid] = (um.group("name"), um.group("args"), line_number, raw)
                    continue
                rm = _STRACE_RESUMED.match(rest)
                if rm:
                    if pid in pending and pending[pid][0] == rm.group("name"):
                        name, first_half, _, _ = pending.pop(pid)
                        joined = f"{pid} {name}({first_half} {rm.group('rest')}"
                        dispatch(parse_line(joined, dialect, line_number))
                        merged += 1
                    else:
                        issues.append(ParseIssue(
                            line_number, raw,
                            "resumed call without matching unfinished half",
                        ))
                    continue
        dispatch(parse_line(raw, dialect, line_number))

    for pid in sorted(pending):
        name, _, line_number, raw = pending[pid]
        issues.append(ParseIssue(line_number, raw, f"unfinished {name} never resumed"))

    return ParsedTrace(
        events=tuple(events),
        issues=tuple(issues),
        dialect=dialect,
        skipped=skipped,
        merged=merged,
    )


def detect_dialect(text: str, sample_lines: int = 50) -> Dialect | None:
    """Guess the log dialect by voting over the first parseable lines.

    Returns None when neither grammar parses a majority of the sampled
    lines that parse under at least one dialect.
    """
    candidates = [l for l in text.splitlines() if l.strip()][:sample_lines]
    votes = {Dialect.STRACE: 0, Dialect.DTRUSS: 0}
    parseable = 0
    for i, line in enumerate(candidates, 1):
        line_votes = []
        pid_m = _STRACE_PID.match(line)
        if pid_m and (_STRACE_UNFINISHED.match(pid_m.group("rest"))
                      or _STRACE_RESUMED.match(pid_m.group("rest"))):
            line_votes.append(Dialect.STRACE)
        elif isinstance(parse_line(line, Dialect.STRACE, i), TraceEvent):
            line_votes.append(Dialect.STRACE)
        if isinstance(parse_line(line, Dialect.DTRUSS, i), TraceEvent):
            line_votes.append(Dialect.DTRUSS)
        if line_votes:
            parseable += 1
        for d in line_votes:
            votes[d] += 1
    if not parseable:
        return None
    best = max(votes, key=lambda d: votes[d])
    other = Dialect.DTRUSS if best is Dialect.STRACE else Dialect.STRACE
    if votes[best] * 2 <= parseable or votes[best] == votes[other]:
        return None
    return best


# ---------------------------------------------------------------------------
# Canonical rendering (debug form; re-parseable in the strace dialect)
# ---------------------------------------------------------------------------

def make_open_flags(read: bool, write: bool, create: bool = False,
                    directory: bool = False) -> OpenFlags:
    """Build OpenFlags whose raw text matches its decoded booleans."""
    if read and write:
        tokens = ["O_RDWR"]
    elif write:
        tokens = ["O_WRONLY"]
    else:
        tokens = ["O_RDONLY"]
    if create:
        tokens.append("O_CREAT")
    if directory:
        tokens.append("O_DIRECTORY")
    return OpenFlags(read=read or not write, write=write, create=create,
                     directory=directory, raw="|".join(tokens))


def _render_path(path: str) -> str:
    return encode_buffer(path.encode("utf-8", "surrogateescape"))


def _render_result(result: CallResult) -> str:
    if result.ok:
        return f"= {result.value}"
    suffix = f" ({result.message})" if result.message else ""
    return f"= {result.value} {result.errno_name}{suffix}"


def render_strace_line(event: TraceEvent) -> str:
    """Render an event back to canonical strace-style text.

    Every Open/Read/Write/Close/Dup/Chdir/Stat event re-parses to a
    structurally equal event; the remaining variants render a best-effort
    debug form.
    """
    call = event.call
    ret = _render_result(event.result)
    if isinstance(call, Open):
        flags = call.flags.raw or make_open_flags(
            call.flags.read, call.flags.write, call.flags.create, call.flags.directory
        ).raw
        if call.dir_fd is None:
            body = f'open("{_render_path(call.path)}", {flags})'
        else:
            body = f'openat({call.dir_fd}, "{_render_path(call.path)}", {flags})'
    elif isinstance(call, Read):
        if event.read_prefix is None:
            buf = "0x0"
        else:
            marker = "..." if event.prefix_truncated else ""
            buf = f'"{encode_buffer(event.read_prefix)}"{marker}'
        body = f"read({call.fd}, {buf}, {call.byte_count})"
    elif isinstance(call, Write):
        body = f"write({call.fd}, 0x0, {call.byte_count})"
    elif isinstance(call, Close):
        body = f"close({call.fd})"
    elif isinstance(call, Dup):
        body = f"dup2({call.old_fd}, {call.new_fd})"
    elif isinstance(call, Chdir):
        body = f'chdir("{_render_path(call.path)}")'
    elif isinstance(call, Stat):
        body = f'stat("{_render_path(call.path)}")'
    elif isinstance(call, Fork):
        body = "fork()"
    elif isinstance(call, Exec):
        argv = ", ".join(f'"{_render_path(a)}"' for a in call.argv)
        body = f'execve("{_render_path(call.program)}", [{argv}], 0x0 /* 0 vars */)'
    else:
        body = f"{call.name}({', '.join(call.args)})"
    return f"{event.pid} {body} {ret}"

"""Synthetic trace generator with ground-truth manifests.

Generates strace-dialect logs describing randomized but internally
consistent process activity (opens, reads, writes, closes, descriptor
duplication and reuse, forks, execs, directory changes, failed opens),
together with a manifest of exactly which resources the activity touched
and how. The manifest is computed from the generator's own action
bookkeeping, never by running the parser or the replayer, so it serves as
an independent oracle for both.

Ground truth covers: the resource map (paths, access flags, byte counts,
pid attribution), the process tree, failed opens, and the multiset of
(pid, call kind) pairs in the log.
"""

from __future__ import annotations

import json
import posixpath
import random
from collections import Counter

_DIRS = [
    "/usr/share/fonts/type1/gsfonts",
    "/usr/lib",
    "/usr/share/app/data",
    "/etc/app",
    "/home/user/docs",
    "/opt/tool/resource",
]
_EXTENSIONS = ["pfb", "ttf", "so", "conf", "png", "dat"]
_MISSING_DIRS = ["/home/user/missing", "/private/tmp", "/var/spool/drop"]
_PROGRAMS = [f"/usr/bin/tool{i}" for i in range(6)]
_ENOENT = "-1 ENOENT (No such file or directory)"

#: descriptor numbers used for reads on never-opened fds; far above anything
#: the lowest-free allocator can reach within one scenario
_UNBOUND_FD_BASE = 100_000

_ACTIONS = [
    ("open", 26),
    ("read", 24),
    ("write", 8),
    ("close", 14),
    ("dup", 5),
    ("fork", 4),
    ("exec", 4),
    ("chdir", 5),
    ("stat", 6),
    ("failed_open", 6),
    ("unbound_read", 1),
    ("noise_call", 5),
]


class _Generator:
    def __init__(self, seed: int, initial_cwd: str):
        self.rng = random.Random(seed)
        self.initial_cwd = initial_cwd
        self.lines: list[str] = []
        self.event_count = 0
        self.multiset: Counter = Counter()
        # ground truth per path
        self.truth: dict[str, dict] = {}
        self.failed: list[dict] = []
        # per-process simulation state
        root = 400
        self.fd_tables: dict[int, dict[int, tuple[str, bool, bool]]] = {root: {}}
        self.cwds: dict[int, str] = {root: initial_cwd}
        self.processes: list[dict] = [
            {"pid": root, "parent": None, "program": None, "argv": []}
        ]
        self.next_pid = root + 1
        self.path_counter = 0
        self.stat_counter = 0
        self.missing_names = [f"gone{i}.png" for i in range(4)]

    # -- bookkeeping ------------------------------------------------------

    def emit(self, pid: int, body: str, kind: str) -> None:
        self.lines.append(f"{pid}  {body}")
        self.multiset[f"{pid} {kind}"] += 1
        self.event_count += 1

    def chatter(self, pid: int, body: str) -> None:
        self.lines.append(f"{pid}  {body}")

    def touch(self, path: str, pid: int, *, read=False, wrote=False,
              executed=False, statted=False) -> dict:
        entry = self.truth.setdefault(path, {
            "read": False, "wrote": False, "executed": False,
            "statted": False, "bytesRead": 0, "pids": set(),
        })
        entry["read"] = entry["read"] or read
        entry["wrote"] = entry["wrote"] or wrote
        entry["executed"] = entry["executed"] or executed
        entry["statted"] = entry["statted"] or statted
        entry["pids"].add(pid)
        return entry

    def pick_pid(self) -> int:
        return self.rng.choice(list(self.fd_tables))

    def alloc_fd(self, pid: int) -> int:
        fd = 3
        while fd in self.fd_tables[pid]:
            fd += 1
        return fd

    def new_path(self) -> str:
        self.path_counter += 1
        ext = self.rng.choice(_EXTENSIONS)
        return f"{self.rng.choice(_DIRS)}/res{self.path_counter:04d}.{ext}"

    def spell_path(self, pid: int, path: str) -> str:
        """Absolute or cwd-relative spelling of a known absolute target."""
        if self.rng.random() < 0.3:
            rel = posixpath.relpath(path, self.cwds[pid])
            if rel != ".":
                return rel
        return path

    # -- actions ----------------------------------------------------------

    def act_open(self) -> None:
        pid = self.pick_pid()
        existing = [p for p in self.truth if not p.startswith("<")]
        if existing and self.rng.random() < 0.3:
            path = self.rng.choice(existing)
        else:
            path = self.new_path()
        roll = self.rng.random()
        read, write = (True, False) if roll < 0.7 else (False, True) if roll < 0.9 else (True, True)
        create = write and self.rng.random() < 0.5
        tokens = ["O_RDWR" if read and write else "O_WRONLY" if write else "O_RDONLY"]
        if create:
            tokens.append("O_CREAT")
        if self.rng.random() < 0.3:
            tokens.append("O_CLOEXEC")
        flags = "|".join(tokens)
        fd = self.alloc_fd(pid)
        raw = self.spell_path(pid, path)
        if self.rng.random() < 0.3:
            body = f'openat(AT_FDCWD, "{raw}", {flags}) = {fd}'
        elif create:
            body = f'open("{raw}", {flags}, 0644) = {fd}'
        else:
            body = f'open("{raw}", {flags}) = {fd}'
        self.emit(pid, body, "open")
        self.fd_tables[pid][fd] = (path, read, write)
        self.touch(path, pid, read=read, wrote=write)

    def act_read(self) -> None:
        pid = self.pick_pid()
        readable = [fd for fd, (_, r, _) in self.fd_tables[pid].items() if r]
        if not readable:
            self.act_open()
            return
        fd = self.rng.choice(readable)
        path = self.fd_tables[pid][fd][0]
        requested = self.rng.choice([512, 1024, 4096, 8192])
        n = self.rng.choice([0, requested, self.rng.randint(1, requested)])
        if n == 0:
            body = f'read({fd}, "", {requested}) = 0'
        else:
            shown = "".join(self.rng.choice("abcdefgh") for _ in range(min(n, 6)))
            marker = "..." if n > len(shown) else ""
            body = f'read({fd}, "{shown}"{marker}, {requested}) = {n}'
        self.emit(pid, body, "read")
        entry = self.touch(path, pid, read=True)
        entry["bytesRead"] += n

    def act_write(self) -> None:
        pid = self.pick_pid()
        writable = [fd for fd, (_, _, w) in self.fd_tables[pid].items() if w]
        if not writable:
            self.act_open()
            return
        fd = self.rng.choice(writable)
        path = self.fd_tables[pid][fd][0]
        n = self.rng.randint(1, 4096)
        self.emit(pid, f'write({fd}, "out"..., {n}) = {n}', "write")
        self.touch(path, pid, wrote=True)

    def act_close(self) -> None:
        pid = self.pick_pid()
        fds = self.fd_tables[pid]
        if fds and self.rng.random() > 0.08:
            fd = self.rng.choice(list(fds))
            del fds[fd]
        else:
            # close of a descriptor this trace never saw opened
            fd = self.rng.randint(60, 90)
            if fd in fds:
                del fds[fd]
        self.emit(pid, f"close({fd}) = 0", "close")

    def act_dup(self) -> None:
        pid = self.pick_pid()
        fds = self.fd_tables[pid]
        if not fds:
            self.act_open()
            return
        old = self.rng.choice(list(fds))
        if len(fds) > 3 and self.rng.random() < 0.3:
            new = self.rng.choice([fd for fd in fds if fd != old] or [self.alloc_fd(pid)])
        else:
            new = self.alloc_fd(pid)
        self.emit(pid, f"dup2({old}, {new}) = {new}", "dup")
        fds[new] = fds[old]

    def act_fork(self) -> None:
        pid = self.pick_pid()
        if len(self.fd_tables) >= 8:
            self.act_open()
            return
        child = self.next_pid
        self.next_pid += 1
        call = self.rng.choice([
            "fork()",
            "clone(child_stack=NULL, flags=CLONE_CHILD_CLEARTID|SIGCHLD, "
            "child_tidptr=0x7f2a00000a10)",
        ])
        self.emit(pid, f"{call} = {child}", "fork")
        self.fd_tables[child] = dict(self.fd_tables[pid])
        self.cwds[child] = self.cwds[pid]
        self.processes.append({"pid": child, "parent": pid, "program": None, "argv": []})

    def act_exec(self) -> None:
        pid = self.pick_pid()
        program = self.rng.choice(_PROGRAMS)
        argv = [posixpath.basename(program)]
        for _ in range(self.rng.randint(0, 2)):
            argv.append(self.rng.choice(["--page", "7", "input.pdf", "-v", "output.jpg"]))
        rendered = ", ".join(f'"{a}"' for a in argv)
        body = f'execve("{program}", [{rendered}], 0x7ffce2f1a000 /* 23 vars */) = 0'
        self.emit(pid, body, "exec")
        self.touch(program, pid, executed=True)
        for proc in self.processes:
            if proc["pid"] == pid:
                proc["program"] = program
                proc["argv"] = argv

    def act_chdir(self) -> None:
        pid = self.pick_pid()
        target = self.rng.choice(_DIRS)
        raw = self.spell_path(pid, target)
        self.emit(pid, f'chdir("{raw}") = 0', "chdir")
        self.cwds[pid] = target

    def act_stat(self) -> None:
        pid = self.pick_pid()
        existing = [p for p in self.truth if not p.startswith("<")]
        if existing and self.rng.random() < 0.5:
            path = self.rng.choice(existing)
        else:
            self.stat_counter += 1
            path = f"{self.rng.choice(_DIRS)}/statonly{self.stat_counter:03d}.dat"
        raw = self.spell_path(pid, path)
        body = f'stat("{raw}", {{st_mode=S_IFREG|0644, st_size=2210}}) = 0'
        self.emit(pid, body, "stat")
        self.touch(path, pid, statted=True)

    def act_failed_open(self) -> None:
        pid = self.pick_pid()
        name = self.rng.choice(self.missing_names)
        path = f"{self.rng.choice(_MISSING_DIRS)}/{name}"
        self.emit(pid, f'open("{path}", O_RDONLY) = {_ENOENT}', "open")
        self.failed.append({"path": path, "errno": "ENOENT", "pid": pid})

    def act_unbound_read(self) -> None:
        pid = self.pick_pid()
        fd = _UNBOUND_FD_BASE + self.rng.randint(0, 50)
        if fd in self.fd_tables[pid]:
            return self.act_read()
        n = self.rng.randint(1, 2048)
        self.emit(pid, f'read({fd}, "inh"..., 4096) = {n}', "read")
        entry = self.touch(f"<fd:{fd} of pid {pid}>", pid, read=True)
        entry["bytesRead"] += n

    def act_noise_call(self) -> None:
        pid = self.pick_pid()
        body = self.rng.choice([
            "brk(NULL) = 0x55d1c2a00000",
            "fstat(1, {st_mode=S_IFCHR|0620, st_rdev=makedev(0x88, 0x2)}) = 0",
            f"getpid() = {pid}",
            "mmap(NULL, 8192, PROT_READ|PROT_WRITE, MAP_PRIVATE|MAP_ANONYMOUS, -1, 0) "
            "= 0x7f2a00200000",
        ])
        self.emit(pid, body, "other")

    def maybe_chatter(self) -> None:
        if self.rng.random() < 0.05:
            pid = self.pick_pid()
            self.chatter(
                pid,
                "--- SIGCHLD {si_signo=SIGCHLD, si_code=CLD_EXITED, si_pid=999, "
                "si_uid=1000, si_status=0, si_utime=0, si_stime=0} ---",
            )

    # -- top level ---------------------------------------------------------

    def run(self, events: int) -> None:
        names = [name for name, _ in _ACTIONS]
        weights = [weight for _, weight in _ACTIONS]
        while self.event_count < events:
            action = self.rng.choices(names, weights=weights, k=1)[0]
            getattr(self, f"act_{action}")()
            self.maybe_chatter()
        for pid in self.fd_tables:
            self.chatter(pid, "+++ exited with 0 +++")

    def manifest(self, seed: int) -> dict:
        resources = {}
        for path in sorted(self.truth):
            entry = self.truth[path]
            others = entry["read"] or entry["wrote"] or entry["executed"]
            resources[path] = {
                "read": entry["read"],
                "wrote": entry["wrote"],
                "executed": entry["executed"],
                "stattedOnly": entry["statted"] and not others,
                "bytesRead": entry["bytesRead"],
                "pids": sorted(entry["pids"]),
            }
        return {
            "seed": seed,
            "initialCwd": self.initial_cwd,
            "lineCount": len(self.lines),
            "eventCount": self.event_count,
            "callMultiset": dict(sorted(self.multiset.items())),
            "resources": resources,
            "processes": self.processes,
            "failedOpens": self.failed,
        }


def generate(seed: int, events: int = 1000, initial_cwd: str = "/work") -> tuple[str, dict]:
    """Build one scenario; returns (strace-dialect log text, manifest dict)."""
    gen = _Generator(seed, initial_cwd)
    gen.run(events)
    return "\n".join(gen.lines) + "\n", gen.manifest(seed)


def write_scenario(seed: int, events: int, log_path: str, manifest_path: str) -> None:
    log_text, manifest = generate(seed, events)
    with open(log_path, "w", encoding="utf-8") as fh:
        fh.write(log_text)
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")

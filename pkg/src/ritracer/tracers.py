"""Platform tracer orchestration.

Adapters wrap the host's call tracer behind one contract: launch a program
(following its children) or attach to a running pid, and leave behind a
log file parseable in the adapter's dialect. All analysis runs offline
from the log, so everything except these adapters works on any platform.

The tracer binary is found on PATH or overridden with the RI_TRACER_PATH
environment variable.
"""

from __future__ import annotations

import os
import shutil
import signal
import subprocess
import sys
import time

from .events import Dialect

TRACER_PATH_ENV = "RI_TRACER_PATH"


class TracerError(RuntimeError):
    """Environment-level tracing failure (exit code 2 at the CLI)."""


class TracerUnavailable(TracerError):
    pass


class AttachPermissionDenied(TracerError):
    pass


class NoSuchProcess(TracerError):
    pass


class StraceAdapter:
    """Linux capture via strace.

    Invocation contract: follow forks (-f), restrict to file, descriptor
    and process call classes, keep 256 bytes of buffer strings for content
    sniffing (path arguments are never truncated by strace), write to the
    named log file.
    """

    name = "strace"
    dialect = Dialect.STRACE

    _BASE_FLAGS = ["-f", "-q", "-s", "256", "-e", "trace=%file,%process,%desc"]

    def binary(self) -> str | None:
        override = os.environ.get(TRACER_PATH_ENV)
        if override:
            return override if os.path.exists(override) else None
        return shutil.which(self.name)

    def require_binary(self) -> str:
        found = self.binary()
        if found is None:
            raise TracerUnavailable(
                f"tracer '{self.name}' not found on PATH; install it or point "
                f"{TRACER_PATH_ENV} at the binary"
            )
        return found

    def launch(self, argv: list[str], log_path: str) -> int:
        binary = self.require_binary()
        cmd = [binary, *self._BASE_FLAGS, "-o", log_path, "--", *argv]
        proc = subprocess.run(cmd, stderr=subprocess.PIPE, text=True)
        self._raise_for_stderr(proc.stderr or "")
        return proc.returncode

    def attach(self, pid: int, log_path: str, stop_after: float) -> int:
        binary = self.require_binary()
        cmd = [binary, *self._BASE_FLAGS, "-o", log_path, "-p", str(pid)]
        proc = subprocess.Popen(cmd, stderr=subprocess.PIPE, text=True)
        try:
            proc.wait(timeout=stop_after)
        except subprocess.TimeoutExpired:
            proc.send_signal(signal.SIGINT)  # strace detaches cleanly on SIGINT
            try:
                proc.wait(timeout=10)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()
        stderr = proc.stderr.read() if proc.stderr else ""
        self._raise_for_stderr(stderr)
        return proc.returncode or 0

    @staticmethod
    def _raise_for_stderr(stderr: str) -> None:
        if "Operation not permitted" in stderr or "PTRACE" in stderr:
            raise AttachPermissionDenied(
                "tracer was refused permission to attach (ptrace denied); "
                "try running with elevated privileges"
            )
        if "No such process" in stderr:
            raise NoSuchProcess("the target process vanished before tracing began")


class DtrussAdapter:
    """macOS capture via dtruss (a DTrace wrapper); needs root.

    dtruss writes its trace to stderr, follows children with -f, and cannot
    log the argument vectors of executed children.
    """

    name = "dtruss"
    dialect = Dialect.DTRUSS

    def binary(self) -> str | None:
        override = os.environ.get(TRACER_PATH_ENV)
        if override:
            return override if os.path.exists(override) else None
        return shutil.which(self.name)

    def require_binary(self) -> str:
        found = self.binary()
        if found is None:
            raise TracerUnavailable(
                f"tracer '{self.name}' not found on PATH; install the Xcode "
                f"command-line tools or point {TRACER_PATH_ENV} at the binary"
            )
        return found

    def launch(self, argv: list[str], log_path: str) -> int:
        binary = self.require_binary()
        with open(log_path, "w", encoding="utf-8") as log:
            proc = subprocess.run([binary, "-f", *argv], stderr=log)
        return proc.returncode

    def attach(self, pid: int, log_path: str, stop_after: float) -> int:
        binary = self.require_binary()
        with open(log_path, "w", encoding="utf-8") as log:
            proc = subprocess.Popen([binary, "-f", "-p", str(pid)], stderr=log)
            try:
                proc.wait(timeout=stop_after)
            except subprocess.TimeoutExpired:
                proc.send_signal(signal.SIGINT)
                try:
                    proc.wait(timeout=10)
                except subprocess.TimeoutExpired:
                    proc.kill()
                    proc.wait()
        return proc.returncode or 0


ADAPTERS = {
    "strace": StraceAdapter,
    "dtruss": DtrussAdapter,
}


def default_adapter_name() -> str:
    return "dtruss" if sys.platform == "darwin" else "strace"


def get_adapter(name: str | None = None):
    return ADAPTERS[name or default_adapter_name()]()


def check_pid(pid: int) -> None:
    """Raise NoSuchProcess if pid does not exist; permission errors pass
    (the tracer reports those itself)."""
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        raise NoSuchProcess(f"no process with pid {pid}") from None
    except PermissionError:
        pass


def wait_briefly(seconds: float) -> None:
    time.sleep(seconds)

"""Turn reconstructed access logs into preservation knowledge.

Four independent pieces:

 - baseline diffing: which resources only appear when the document is
   present (separating document dependencies from UI/software plumbing),
 - resource classification: font subtypes, shared libraries, media,
   config, driven by magic bytes, extensions and path segments,
 - missing-resource clustering: repeated failed opens of one basename
   across several directories are the signature of a program hunting for
   a broken transclusion,
 - package enrichment: mapping dependency paths to the packages that
   provide them, through a pluggable lookup contract.

Everything here is pure: no filesystem access, deterministic output.
"""

from __future__ import annotations

import json
import posixpath
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Protocol

from .events import AccessLog, AccessMode
from .replay import resource_set


# ---------------------------------------------------------------------------
# Baseline diffing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DependencyDelta:
    """Set difference between a baseline run and a target run.

    added/shared/removed are pairwise disjoint; added | shared is the
    target's path set and shared | removed is the baseline's.
    """

    added: frozenset[str]
    shared: frozenset[str]
    removed: frozenset[str]


def diff_logs(baseline: AccessLog, target: AccessLog, mask: AccessMode) -> DependencyDelta:
    """Compare two runs under one access-mode mask."""
    base = resource_set(baseline, mask)
    tgt = resource_set(target, mask)
    return DependencyDelta(
        added=frozenset(tgt - base),
        shared=frozenset(tgt & base),
        removed=frozenset(base - tgt),
    )


# ---------------------------------------------------------------------------
# Resource classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResourceClass:
    kind: str
    subtype: str = ""

    @property
    def label(self) -> str:
        return f"{self.kind}/{self.subtype}" if self.subtype else self.kind

    @staticmethod
    def parse(label: str) -> "ResourceClass":
        kind, _, subtype = label.partition("/")
        return ResourceClass(kind, subtype)


FONT_TYPE1 = ResourceClass("font", "type1")
FONT_TRUETYPE = ResourceClass("font", "truetype")
FONT_OPENTYPE = ResourceClass("font", "opentype")
FONT_UNKNOWN = ResourceClass("font", "unknown")
SHARED_LIBRARY = ResourceClass("shared-library")
EXECUTABLE = ResourceClass("executable")
CONFIG = ResourceClass("config")
DIRECTORY = ResourceClass("directory")
OTHER = ResourceClass("other")

#: binary-image magic; resolves to executable or shared-library depending
#: on whether the path was actually executed
_BINARY = ResourceClass("_binary")

# (pattern, match anywhere in the sniffed prefix instead of at its start, class)
_DEFAULT_MAGIC: list[tuple[bytes, bool, ResourceClass]] = [
    (b"\x80\x01", False, FONT_TYPE1),          # PFB segment header
    (b"%!PS-AdobeFont", True, FONT_TYPE1),
    (b"%!FontType1", True, FONT_TYPE1),
    (b"\x00\x01\x00\x00", False, FONT_TRUETYPE),
    (b"true", False, FONT_TRUETYPE),
    (b"ttcf", False, FONT_TRUETYPE),
    (b"OTTO", False, FONT_OPENTYPE),
    (b"\x7fELF", False, _BINARY),
    (b"\xfe\xed\xfa\xce", False, _BINARY),     # Mach-O 32
    (b"\xfe\xed\xfa\xcf", False, _BINARY),     # Mach-O 64
    (b"\xce\xfa\xed\xfe", False, _BINARY),
    (b"\xcf\xfa\xed\xfe", False, _BINARY),
    (b"\xca\xfe\xba\xbe", False, _BINARY),     # fat binary
]

_DEFAULT_EXTENSIONS: dict[str, ResourceClass] = {
    "ttf": FONT_TRUETYPE,
    "ttc": FONT_TRUETYPE,
    "pfb": FONT_TYPE1,
    "pfa": FONT_TYPE1,
    "otf": FONT_OPENTYPE,
    "so": SHARED_LIBRARY,
    "dylib": SHARED_LIBRARY,
    "png": ResourceClass("media", "image"),
    "jpg": ResourceClass("media", "image"),
    "jpeg": ResourceClass("media", "image"),
    "gif": ResourceClass("media", "image"),
    "bmp": ResourceClass("media", "image"),
    "tif": ResourceClass("media", "image"),
    "tiff": ResourceClass("media", "image"),
    "webp": ResourceClass("media", "image"),
    "svg": ResourceClass("media", "image"),
    "mp3": ResourceClass("media", "audio"),
    "wav": ResourceClass("media", "audio"),
    "ogg": ResourceClass("media", "audio"),
    "flac": ResourceClass("media", "audio"),
    "m4a": ResourceClass("media", "audio"),
    "mp4": ResourceClass("media", "video"),
    "mov": ResourceClass("media", "video"),
    "avi": ResourceClass("media", "video"),
    "mkv": ResourceClass("media", "video"),
    "webm": ResourceClass("media", "video"),
}

#: extensions that mean "config" only under an etc-like path segment
_CONFIG_EXTENSIONS = {"conf", "cfg", "ini", "xml"}
_ETC_SEGMENTS = {"etc", "config", ".config"}

_DEFAULT_SEGMENTS: dict[str, ResourceClass] = {
    "fonts": FONT_UNKNOWN,
}

#: versioned shared objects: libfoo.so.3, libbar.so.1.2.3
_SO_VERSIONED = re.compile(r"\.so(\.\d+)+$", re.IGNORECASE)


class Classifier:
    """Data-driven path classifier; rule tables can be extended at runtime."""

    def __init__(
        self,
        magic: list[tuple[bytes, bool, ResourceClass]] | None = None,
        extensions: Mapping[str, ResourceClass] | None = None,
        segments: Mapping[str, ResourceClass] | None = None,
    ):
        self.magic = list(_DEFAULT_MAGIC) if magic is None else magic
        self.extensions = dict(_DEFAULT_EXTENSIONS) if extensions is None else dict(extensions)
        self.segments = dict(_DEFAULT_SEGMENTS) if segments is None else dict(segments)

    def extend_from_text(self, text: str) -> None:
        """Add rules from config text, one rule per line.

        Format: ``<kind> <pattern> <class>`` where kind is one of
        extension, segment, magic (hex byte prefix) or magic-text
        (substring searched anywhere in the sniffed bytes). Added rules
        take priority over the built-in tables. Blank lines and lines
        starting with # are ignored.
        """
        for number, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"rule line {number}: expected 'kind pattern class', got {raw!r}")
            kind, pattern, label = parts
            cls = ResourceClass.parse(label)
            if kind == "extension":
                self.extensions[pattern.lstrip(".").lower()] = cls
            elif kind == "segment":
                self.segments[pattern.lower()] = cls
            elif kind == "magic":
                self.magic.insert(0, (bytes.fromhex(pattern), False, cls))
            elif kind == "magic-text":
                self.magic.insert(0, (pattern.encode(), True, cls))
            else:
                raise ValueError(f"rule line {number}: unknown rule kind {kind!r}")

    def classify(
        self,
        path: str,
        sniffed_prefix: bytes | None = None,
        executed: bool = False,
        directory: bool = False,
    ) -> ResourceClass:
        """Classify one path. Decision order: directory flag, magic bytes,
        extension, path segments, executed fallback, other."""
        if directory:
            return DIRECTORY

        if sniffed_prefix:
            for pattern, anywhere, cls in self.magic:
                hit = pattern in sniffed_prefix if anywhere else sniffed_prefix.startswith(pattern)
                if hit:
                    if cls is _BINARY:
                        return EXECUTABLE if executed else SHARED_LIBRARY
                    return cls

        name = posixpath.basename(path).lower()
        if _SO_VERSIONED.search(name):
            return SHARED_LIBRARY
        ext = name.rpartition(".")[2] if "." in name else ""
        if ext in self.extensions:
            return self.extensions[ext]
        if ext in _CONFIG_EXTENSIONS:
            segments = {seg.lower() for seg in path.split("/") if seg}
            if segments & _ETC_SEGMENTS:
                return CONFIG

        for seg in path.split("/")[:-1]:
            cls = self.segments.get(seg.lower())
            if cls is not None:
                return cls

        if executed:
            return EXECUTABLE
        return OTHER


_DEFAULT_CLASSIFIER = Classifier()


def classify(
    path: str,
    sniffed_prefix: bytes | None = None,
    executed: bool = False,
    directory: bool = False,
) -> ResourceClass:
    """Classify with the built-in rule tables; see Classifier.classify."""
    return _DEFAULT_CLASSIFIER.classify(path, sniffed_prefix, executed, directory)


def fontset(
    paths: Iterable[str],
    sniffs: Mapping[str, bytes | None] | None = None,
    classifier: Classifier | None = None,
) -> list[tuple[str, str]]:
    """The font subset of a path collection as (path, subtype), sorted."""
    sniffs = sniffs or {}
    clf = classifier or _DEFAULT_CLASSIFIER
    out = []
    for path in sorted(set(paths)):
        cls = clf.classify(path, sniffs.get(path))
        if cls.kind == "font":
            out.append((path, cls.subtype))
    return out


# ---------------------------------------------------------------------------
# Missing-resource clustering
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MissingResource:
    """One probably-missing transcluded resource: a basename the traced
    program probed for in one or more places and never got."""

    basename: str
    attempted_paths: tuple[str, ...]
    errno_names: tuple[str, ...]
    pids: tuple[int, ...]


def detect_missing(log: AccessLog) -> list[MissingResource]:
    """Cluster ENOENT open failures by basename.

    A cluster qualifies when the program probed two or more locations, or
    when its basename never appears among successfully opened paths. A
    single probe of a basename that was opened successfully elsewhere in
    the log is ordinary search-path behavior and is dropped.
    """
    groups: dict[str, list] = {}
    for fo in log.failed_opens:
        if fo.errno_name != "ENOENT":
            continue
        groups.setdefault(posixpath.basename(fo.attempted_path), []).append(fo)

    opened_basenames = {
        posixpath.basename(path)
        for path, res in log.resources.items()
        if not path.startswith("<fd:") and not res.mode.statted_only
    }

    out = []
    for basename, fos in groups.items():
        if len(fos) >= 2 or basename not in opened_basenames:
            out.append(MissingResource(
                basename=basename,
                attempted_paths=tuple(f.attempted_path for f in fos),
                errno_names=tuple(sorted({f.errno_name for f in fos})),
                pids=tuple(sorted({f.pid for f in fos})),
            ))
    return out


# ---------------------------------------------------------------------------
# Package enrichment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PackageInfo:
    path: str
    package_name: str
    package_version: str | None
    source: str


class PackageProvider(Protocol):
    """Lookup contract from a dependency path to its providing package."""

    name: str

    def lookup(self, path: str) -> tuple[str, str | None] | None:
        """Return (package name, optional version), or None if unknown."""
        ...


class FilePackageProvider:
    """Provider backed by a JSON mapping file; hermetic, for tests and
    offline analysis. Values may be a bare package name, a [name, version]
    pair, or an object with name/version keys."""

    def __init__(self, mapping_path: str):
        with open(mapping_path, encoding="utf-8") as fh:
            raw = json.load(fh)
        self._table: dict[str, tuple[str, str | None]] = {}
        for path, value in raw.items():
            if isinstance(value, str):
                self._table[path] = (value, None)
            elif isinstance(value, list):
                self._table[path] = (value[0], value[1] if len(value) > 1 else None)
            else:
                self._table[path] = (value["name"], value.get("version"))
        self.name = f"file:{posixpath.basename(mapping_path)}"

    def lookup(self, path: str) -> tuple[str, str | None] | None:
        return self._table.get(path)


def enrich_packages(
    paths: Iterable[str], provider: PackageProvider
) -> tuple[list[PackageInfo], int]:
    """Resolve paths to packages; returns (resolved records, unresolved count).

    A provider failure on one path counts that path as unresolved and
    moves on; enrichment is never fatal.
    """
    infos: list[PackageInfo] = []
    unresolved = 0
    for path in sorted(set(paths)):
        try:
            hit = provider.lookup(path)
        except Exception:
            hit = None
        if hit is None:
            unresolved += 1
        else:
            name, version = hit
            infos.append(PackageInfo(path, name, version, source=provider.name))
    return infos, unresolved

"""Functor resolution and transitive dependency closure.

Required functors resolve against library indexes in a fixed search order:
the local library first, then system libraries, then home libraries; within
a library the first index entry whose condition matches the target engine
wins.  The closure walks every reached home, local, and project file in
turn, so an export can vendor everything an entry file might pull in.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

from .directives import FileFacts, FileRef, FunctorRef, Load, Requirement, extract
from .engines import ALWAYS, PlId, always_true, could_match_any, matches, render_cond
from .errors import ExlibrisError
from .fsio import read_text
from .index import (
    DEFAULT_EXTENSIONS,
    INDEX_FILENAME,
    BUILT_IN_MODULE,
    IndexEntry,
    LibraryIndex,
    mkindex,
    parse_index,
    source_path,
)
from .terms import read_terms

KIND_SYSTEM = "system"
KIND_LOCAL = "local"
KIND_HOME = "home"


def canon(path: Path | str) -> Path:
    """Absolute lexical form; no symlink resolution, so comparisons stay lexical."""
    return Path(os.path.abspath(os.fspath(path)))


@dataclass(frozen=True)
class Library:
    kind: str
    root: Path
    index: LibraryIndex

    @classmethod
    def load(cls, kind: str, root: Path | str, extensions=DEFAULT_EXTENSIONS) -> "Library":
        """Use the on-disk Index.pl when present, otherwise index on the fly."""
        root = canon(root)
        index_path = root / INDEX_FILENAME
        if index_path.is_file():
            index = parse_index(index_path)
        else:
            index = mkindex(root, extensions=extensions)
        return cls(kind, root, index)


@dataclass(frozen=True)
class LibrarySet:
    syslibs: tuple[Library, ...] = ()
    homelibs: tuple[Library, ...] = ()
    loclib: Library | None = None
    extensions: tuple[str, ...] = DEFAULT_EXTENSIONS

    def __post_init__(self):
        roots = [lib.root for lib in self.ordered()]
        if len(set(roots)) != len(roots):
            raise ExlibrisError("library roots must be disjoint")

    def ordered(self) -> list[Library]:
        libs = []
        if self.loclib is not None:
            libs.append(self.loclib)
        libs.extend(self.syslibs)
        libs.extend(self.homelibs)
        return libs

    @classmethod
    def build(
        cls,
        syslibs: Sequence[Path | str] = (),
        homelibs: Sequence[Path | str] = (),
        loclib: Path | str | None = None,
        extensions: Sequence[str] = DEFAULT_EXTENSIONS,
    ) -> "LibrarySet":
        extensions = tuple(extensions)
        return cls(
            syslibs=tuple(Library.load(KIND_SYSTEM, p, extensions) for p in syslibs),
            homelibs=tuple(Library.load(KIND_HOME, p, extensions) for p in homelibs),
            loclib=Library.load(KIND_LOCAL, loclib, extensions) if loclib else None,
            extensions=extensions,
        )


@dataclass(frozen=True)
class BuiltIn:
    """No load needed; `file` is where the declaration lives."""

    kind: str
    root: Path
    file: str


@dataclass(frozen=True)
class LoadFile:
    kind: str
    root: Path
    file: str


@dataclass(frozen=True)
class Unresolved:
    pass


ResolvedTarget = Union[BuiltIn, LoadFile, Unresolved]
UNRESOLVED = Unresolved()


@dataclass(frozen=True)
class UnresolvedRef:
    """A functor or file reference nothing could satisfy."""

    source: str
    subject: str
    engine: PlId | None


@dataclass(frozen=True)
class DepEdge:
    src: str
    dst: str
    label: str


@dataclass
class DepClosure:
    resolution: dict[tuple[FunctorRef, PlId | None], tuple[ResolvedTarget, ...]]
    home_files: frozenset[tuple[str, str]]  # (home root, relative file)
    local_files: frozenset[str]
    project_files: frozenset[str]  # absolute paths of reached non-library files
    unresolved: tuple[UnresolvedRef, ...]
    edges: tuple[DepEdge, ...]


def _resolve_with_entry(
    functor: FunctorRef, engine: PlId, libs: LibrarySet
) -> tuple[ResolvedTarget, IndexEntry | None]:
    for lib in libs.ordered():
        for entry in lib.index.entries:
            if entry.functor != functor or not matches(entry.cond, engine):
                continue
            return _entry_target(entry, lib, libs.extensions), entry
    return UNRESOLVED, None


def resolve_functor(functor: FunctorRef, engine: PlId, libs: LibrarySet) -> ResolvedTarget:
    """First matching index entry in search order, or Unresolved."""
    return _resolve_with_entry(functor, engine, libs)[0]


def _entry_target(entry: IndexEntry, lib: Library, extensions) -> ResolvedTarget:
    if not source_path(lib.root, entry.file, extensions).is_file():
        return UNRESOLVED
    if entry.module == BUILT_IN_MODULE:
        return BuiltIn(lib.kind, lib.root, entry.file)
    return LoadFile(lib.kind, lib.root, entry.file)


def resolve_functor_all(
    functor: FunctorRef, libs: LibrarySet
) -> tuple[tuple[ResolvedTarget, IndexEntry], ...]:
    """Every entry any engine could reach, in search order.

    Walking stops after an always-true condition, since nothing later can
    win for any engine.  Conditions are judged by satisfiability, which
    over-approximates: extra candidates only ever widen an export.
    """
    hits: list[tuple[ResolvedTarget, IndexEntry]] = []
    for lib in libs.ordered():
        for entry in lib.index.entries:
            if entry.functor != functor or not could_match_any(entry.cond):
                continue
            hits.append((_entry_target(entry, lib, libs.extensions), entry))
            if always_true(entry.cond):
                return tuple(hits)
    return tuple(hits)


def resolve_file_ref(
    ref: FileRef, base_dir: Path, libs: LibrarySet
) -> tuple[str, Library | None, Path, str | None] | None:
    """Locate a file reference on disk.

    Library aliases search the library roots in resolution order; relative
    refs resolve against the referring file's directory and are then
    classified by which library root, if any, contains them.  Returns
    (kind, library, absolute path, library-relative file) or None.
    """
    if ref.kind == "library":
        for lib in libs.ordered():
            path = source_path(lib.root, ref.path, libs.extensions)
            if path.is_file():
                return lib.kind, lib, path, ref.path
        return None
    raw = canon(base_dir / ref.path)
    candidates = [raw.parent / (raw.name + ext) for ext in libs.extensions]
    if raw.suffix:
        candidates.insert(0, raw)
    for candidate in candidates:
        if not candidate.is_file():
            continue
        for lib in libs.ordered():
            if candidate.is_relative_to(lib.root):
                rel = candidate.relative_to(lib.root).with_suffix("").as_posix()
                return lib.kind, lib, candidate, rel
        return "project", None, candidate, None
    return None


@dataclass
class _Unit:
    path: Path
    display: str
    lib: Library | None
    rel: str | None


def _read_facts(path: Path) -> FileFacts:
    text = read_text(path)
    return extract(read_terms(text, str(path)), str(path))


def closure(
    entries: Sequence[Path | str],
    libs: LibrarySet,
    targets: Sequence[PlId] | None = None,
) -> DepClosure:
    """Transitive dependency closure from the given entry files.

    With concrete target engines every required functor is resolved per
    engine; with targets=None resolution considers all engines at once.
    Guarded loads are followed when their guard can match a target;
    may_load references are followed unconditionally.  System files are
    recorded but never vendored nor walked.
    """
    resolution: dict[tuple[FunctorRef, PlId | None], tuple[ResolvedTarget, ...]] = {}
    home_files: set[tuple[str, str]] = set()
    local_files: set[str] = set()
    project_files: set[str] = set()
    unresolved: set[UnresolvedRef] = set()
    edges: set[DepEdge] = set()

    queue: deque[_Unit] = deque()
    visited: set[str] = set()

    def enqueue(unit: _Unit):
        key = str(unit.path)
        if key not in visited:
            visited.add(key)
            queue.append(unit)

    def reach(kind: str, lib: Library | None, path: Path, rel: str | None, src: str, label: str):
        """Record one reached target and queue it for walking."""
        if kind == KIND_SYSTEM:
            edges.add(DepEdge(src, f"{kind}:{rel}", label))
            return
        if kind == "project":
            project_files.add(str(path))
            edges.add(DepEdge(src, str(path), label))
            enqueue(_Unit(path, str(path), None, None))
            return
        assert lib is not None and rel is not None
        if kind == KIND_HOME:
            home_files.add((str(lib.root), rel))
        elif kind == KIND_LOCAL:
            local_files.add(rel)
        edges.add(DepEdge(src, f"{kind}:{rel}", label))
        enqueue(_Unit(source_path(lib.root, rel, libs.extensions), f"{kind}:{rel}", lib, rel))

    def handle_target(target: ResolvedTarget, entry: IndexEntry | None, src: str, functor: FunctorRef, engine: PlId | None):
        if isinstance(target, Unresolved):
            unresolved.add(UnresolvedRef(src, str(functor), engine))
            edges.add(DepEdge(src, "unresolved", str(functor)))
            return
        label = f"{functor} {render_cond(entry.cond)}" if entry else str(functor)
        if isinstance(target, BuiltIn):
            label += " built-in"
        lib = _library_for_root(libs, target.root)
        reach(target.kind, lib, source_path(target.root, target.file, libs.extensions), target.file, src, label)

    for raw_entry in entries:
        path = canon(raw_entry)
        enqueue(_Unit(path, str(path), None, None))

    while queue:
        unit = queue.popleft()
        facts = _read_facts(unit.path)
        src = unit.display
        for requirement in facts.requires:
            functor = requirement.functor
            if targets is None:
                hits = resolve_functor_all(functor, libs)
                resolution[(functor, None)] = tuple(t for t, _ in hits) or (UNRESOLVED,)
                if not hits:
                    handle_target(UNRESOLVED, None, src, functor, None)
                for target, entry in hits:
                    handle_target(target, entry, src, functor, None)
            else:
                for engine in targets:
                    target, entry = _resolve_with_entry(functor, engine, libs)
                    resolution[(functor, engine)] = (target,)
                    handle_target(target, entry, src, functor, engine)
        base_dir = unit.path.parent
        for load in facts.loads:
            if targets is None:
                active = could_match_any(load.guard)
            else:
                active = any(matches(load.guard, engine) for engine in targets)
            if not active:
                continue
            _follow_ref(load.ref, base_dir, libs, src, render_cond(load.guard), reach, unresolved, edges)
        for item in facts.may_load:
            _follow_ref(item.ref, base_dir, libs, src, "may_load", reach, unresolved, edges)

    ordered_unresolved = tuple(
        sorted(unresolved, key=lambda u: (u.source, u.subject, str(u.engine)))
    )
    ordered_edges = tuple(sorted(edges, key=lambda e: (e.src, e.dst, e.label)))
    return DepClosure(
        resolution=resolution,
        home_files=frozenset(home_files),
        local_files=frozenset(local_files),
        project_files=frozenset(project_files),
        unresolved=ordered_unresolved,
        edges=ordered_edges,
    )


def _follow_ref(ref, base_dir, libs, src, label, reach, unresolved, edges):
    hit = resolve_file_ref(ref, base_dir, libs)
    if hit is None:
        unresolved.add(UnresolvedRef(src, str(ref), None))
        edges.add(DepEdge(src, "unresolved", str(ref)))
        return
    kind, lib, path, rel = hit
    reach(kind, lib, path, rel, src, label)


def _library_for_root(libs: LibrarySet, root: Path) -> Library | None:
    for lib in libs.ordered():
        if lib.root == root:
            return lib
    return None


def trace(entry: Path | str, engine: PlId, libs: LibrarySet) -> str:
    """Depth-first load report for one entry under one engine.

    One decision per line: load, built-in, skip on a failed guard,
    unresolved, or missing.  Revisited files are noted once and not
    re-entered.  The format is stable for golden comparisons.
    """
    lines: list[str] = []
    visited: set[str] = set()
    entry_path = canon(entry)
    base = entry_path.parent

    def visit(path: Path, depth: int):
        visited.add(str(path))
        facts = _read_facts(path)
        indent = "  " * depth
        events: list[tuple[int, int, object]] = []
        for i, r in enumerate(facts.requires):
            events.append((r.span.start, i, r))
        for i, l in enumerate(facts.loads):
            events.append((l.span.start, i, l))
        for i, m in enumerate(facts.may_load):
            events.append((m.span.start, i, m))
        events.sort(key=lambda e: (e[0], e[1]))
        for _, _, event in events:
            if isinstance(event, Requirement):
                target = resolve_functor(event.functor, engine, libs)
                if isinstance(target, Unresolved):
                    lines.append(f"{indent}{event.functor}: unresolved")
                elif isinstance(target, BuiltIn):
                    lines.append(
                        f"{indent}{event.functor}: built-in ({target.kind} {target.file})"
                    )
                else:
                    _enter(
                        f"{indent}{event.functor}: load {target.kind} {target.file}",
                        target.kind,
                        source_path(target.root, target.file, libs.extensions),
                        depth,
                    )
                continue
            guard = event.guard if isinstance(event, Load) else ALWAYS
            ref = event.ref
            if isinstance(event, Load) and not matches(guard, engine):
                lines.append(f"{indent}{ref}: skip (guard {render_cond(guard)} failed)")
                continue
            hit = resolve_file_ref(ref, path.parent, libs)
            if hit is None:
                lines.append(f"{indent}{ref}: missing")
                continue
            kind, _, hit_path, rel = hit
            if kind == "project":
                shown = os.path.relpath(hit_path, base)
                _enter(f"{indent}{ref}: load file {shown}", kind, hit_path, depth)
            else:
                _enter(f"{indent}{ref}: load {kind} {rel}", kind, hit_path, depth)

    def _enter(line: str, kind: str, path: Path, depth: int):
        if str(path) in visited:
            lines.append(f"{line} (already loaded)")
            return
        lines.append(line)
        if kind != KIND_SYSTEM:
            visit(path, depth + 1)

    visit(entry_path, 0)
    return "\n".join(lines) + "\n"

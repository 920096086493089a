"""Index.pl generation, serialization, and parsing.

An index file maps predicates to the library file that defines them, one
`index/5` fact per line: name, arity, engine condition, module, and the
file path relative to the library root without extension.  The module
value `built_in` marks predicates that need no load on matching engines;
the fact's file field still records where that declaration lives.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .directives import FileFacts, FunctorRef, extract
from .engines import ALWAYS, EngineConditionError, IfPls, cond_to_term, parse_if_pls
from .errors import ExlibrisError
from .fsio import read_text, write_text
from .terms import Atom, Compound, Integer, Term, read_terms, render_clause

logger = logging.getLogger(__name__)

INDEX_FILENAME = "Index.pl"
INDEX_HEADER = "% generated by exlibris mkindex"
BUILT_IN_MODULE = "built_in"
DEFAULT_EXTENSIONS = (".pl",)


@dataclass(frozen=True)
class IndexEntry:
    functor: FunctorRef
    cond: IfPls
    module: str
    file: str  # '/'-separated, relative to the library root, no extension

    def __post_init__(self):
        if "\\" in self.file or self.file.startswith("/") or not self.file:
            raise ValueError(
                f"index file fields are relative, /-separated paths: {self.file!r}"
            )


@dataclass(frozen=True)
class LibraryIndex:
    root: Path
    entries: tuple[IndexEntry, ...]


class IndexGenerationError(ExlibrisError):
    pass


def _scan_sources(root: Path, follow_subdirs: bool, extensions: Sequence[str]) -> list[Path]:
    if follow_subdirs:
        candidates = sorted(p for p in root.rglob("*") if p.is_file())
    else:
        candidates = sorted(p for p in root.iterdir() if p.is_file())
    return [
        p
        for p in candidates
        if p.suffix in extensions and p.name != INDEX_FILENAME
    ]


def _entries_for_file(facts: FileFacts, rel_file: str) -> list[IndexEntry]:
    """Apply the three information sources in strict priority order."""
    if facts.module_decl is not None:
        return [
            IndexEntry(functor, ALWAYS, facts.module_decl.name, rel_file)
            for functor in facts.module_decl.exports
        ]
    if facts.defines:
        module = facts.defines_module or "user"
        return [
            IndexEntry(functor, group.cond, module, rel_file)
            for group in facts.defines
            for functor in group.functors
        ]
    return []


def mkindex(
    root: Path | str,
    *,
    follow_subdirs: bool = True,
    clause_fallback: bool = False,
    extensions: Sequence[str] = DEFAULT_EXTENSIONS,
) -> LibraryIndex:
    """Scan a library directory and assemble its index.

    Per file, entries come from the first applicable source: a module
    declaration (condition `any`, declared module), else `defines`
    directives (their conditions, module `user` unless the file carries a
    `defines_module` override), else, when enabled, the clause heads
    (condition `any`, module `user`).  Files yielding nothing are skipped.
    Output order is a stable sort on (name, arity) over discovery order,
    so an unchanged tree always produces identical bytes.
    """
    root = Path(root)
    discovered: list[IndexEntry] = []
    for source in _scan_sources(root, follow_subdirs, extensions):
        text = read_text(source)
        facts = extract(read_terms(text, str(source)), str(source))
        rel_file = source.relative_to(root).with_suffix("").as_posix()
        entries = _entries_for_file(facts, rel_file)
        if not entries and clause_fallback:
            entries = [
                IndexEntry(functor, ALWAYS, "user", rel_file)
                for functor in facts.clause_heads
            ]
        discovered.extend(entries)
    ordered = sorted(discovered, key=lambda e: (e.functor.name, e.functor.arity))
    index = LibraryIndex(root, tuple(ordered))
    for entry in index.entries:
        if not source_path(index.root, entry.file, extensions).is_file():
            raise IndexGenerationError(
                f"index entry names a missing file: {entry.file} under {root}"
            )
    return index


def source_path(root: Path, rel_file: str, extensions: Sequence[str] = DEFAULT_EXTENSIONS) -> Path:
    """The on-disk path of an extensionless index file field."""
    for ext in extensions:
        candidate = root / (rel_file + ext)
        if candidate.is_file():
            return candidate
    return root / (rel_file + extensions[0])


def entry_to_term(entry: IndexEntry) -> Term:
    return Compound(
        "index",
        (
            Atom(entry.functor.name),
            Integer(entry.functor.arity),
            cond_to_term(entry.cond),
            Atom(entry.module),
            Atom(entry.file),
        ),
    )


def term_to_entry(term: Term) -> IndexEntry | None:
    if not (isinstance(term, Compound) and term.name == "index" and term.arity == 5):
        return None
    name, arity, cond, module, file = term.args
    if not (
        isinstance(name, Atom)
        and isinstance(arity, Integer)
        and arity.value >= 0
        and isinstance(module, Atom)
        and isinstance(file, Atom)
    ):
        return None
    return IndexEntry(
        FunctorRef(name.name, arity.value), parse_if_pls(cond), module.name, file.name
    )


def render_index(entries: Iterable[IndexEntry]) -> str:
    lines = [INDEX_HEADER]
    lines.extend(render_clause(entry_to_term(entry)) for entry in entries)
    return "\n".join(lines) + "\n"


def write_index(index: LibraryIndex) -> Path:
    """Write root/Index.pl and return its path."""
    path = index.root / INDEX_FILENAME
    write_text(path, render_index(index.entries))
    return path


def parse_index_text(text: str, root: Path, path: str | None = None) -> LibraryIndex:
    entries = []
    for st in read_terms(text, path):
        try:
            entry = term_to_entry(st.term)
        except (EngineConditionError, ValueError) as exc:
            logger.warning("%s:%d: skipping index fact: %s", path, st.span.line, exc)
            continue
        if entry is None:
            logger.warning("%s: ignoring non-index term at line %d", path, st.span.line)
            continue
        entries.append(entry)
    return LibraryIndex(root, tuple(entries))


def parse_index(path: Path | str) -> LibraryIndex:
    """Read an Index.pl file; entry order is preserved verbatim."""
    path = Path(path)
    text = read_text(path)
    return parse_index_text(text, path.parent, str(path))

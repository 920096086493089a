"""UTF-8 file I/O without newline translation, so splice edits and golden
comparisons stay byte-exact."""

from __future__ import annotations

from pathlib import Path


def read_text(path: Path | str) -> str:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        return handle.read()


def write_text(path: Path | str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)

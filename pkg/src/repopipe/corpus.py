"""Core data types, language identification, and per-file statistics.

Everything here is immutable and pure so downstream stages can fan out
over files without shared state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import PurePosixPath


@dataclass(frozen=True)
class LanguageMap:
    """Extension/basename lookup table over the closed language set."""

    languages: frozenset[str]
    extensions: dict[str, str]
    basenames: dict[str, str]

    @classmethod
    def from_dict(cls, raw: dict) -> "LanguageMap":
        languages = frozenset(raw["languages"])
        extensions = dict(raw["extensions"])
        basenames = dict(raw["basenames"])
        unknown = {v for v in extensions.values() if v not in languages}
        unknown |= {v for v in basenames.values() if v not in languages}
        if unknown:
            raise ValueError(f"extension map targets unknown languages: {sorted(unknown)}")
        return cls(languages=languages, extensions=extensions, basenames=basenames)

    @classmethod
    def load(cls, path: str | None = None) -> "LanguageMap":
        """Load the bundled table, or an override file with the same schema."""
        if path is None:
            with resources.files("repopipe.data").joinpath("languages.json").open("rb") as fh:
                raw = json.load(fh)
        else:
            with open(path, "rb") as fh:
                raw = json.load(fh)
        return cls.from_dict(raw)


_DEFAULT_MAP: LanguageMap | None = None


def default_language_map() -> LanguageMap:
    global _DEFAULT_MAP
    if _DEFAULT_MAP is None:
        _DEFAULT_MAP = LanguageMap.load()
    return _DEFAULT_MAP


def detect_language(path: str, lang_map: LanguageMap | None = None) -> str | None:
    """Map a repo-relative path to a language name, or None if unrecognized.

    Basenames (Makefile, Dockerfile, ...) take priority over extensions;
    extensions are matched case-insensitively. Pure function of the path.
    """
    if not path:
        raise ValueError("path must be non-empty")
    lang_map = lang_map or default_language_map()
    name = PurePosixPath(path).name
    if name in lang_map.basenames:
        return lang_map.basenames[name]
    suffix = PurePosixPath(path).suffix.lower()
    if suffix:
        return lang_map.extensions.get(suffix)
    return None


@dataclass(frozen=True)
class SourceFile:
    """One file of one repository; the pipeline's atomic input."""

    repo_id: str
    path: str
    language: str | None
    content: str
    byte_size: int

    @classmethod
    def create(
        cls,
        repo_id: str,
        path: str,
        content: str,
        lang_map: LanguageMap | None = None,
    ) -> "SourceFile":
        return cls(
            repo_id=repo_id,
            path=path,
            language=detect_language(path, lang_map),
            content=content,
            byte_size=len(content.encode("utf-8")),
        )


@dataclass(frozen=True)
class FileStats:
    """The quantities the quality filters test."""

    avg_line_len: float
    max_line_len: int
    alphabetic_fraction: float
    char_count: int


def compute_file_stats(content: str) -> FileStats:
    """Line lengths in characters (code points), newlines excluded from
    lines but counted in char_count; alphabetic = Unicode letter category.
    """
    char_count = len(content)
    if char_count == 0:
        return FileStats(0.0, 0, 0.0, 0)
    lines = content.splitlines()
    if lines:
        line_lens = [len(line) for line in lines]
        avg_line_len = sum(line_lens) / len(line_lens)
        max_line_len = max(line_lens)
    else:
        avg_line_len = 0.0
        max_line_len = 0
    alpha = sum(1 for ch in content if ch.isalpha())
    return FileStats(
        avg_line_len=avg_line_len,
        max_line_len=max_line_len,
        alphabetic_fraction=alpha / char_count,
        char_count=char_count,
    )

"""Corpus ingestion from already-downloaded repository trees or JSONL.

Two input shapes are accepted per configured path:

  - a directory: every immediate subdirectory is one repository
    (repo_id = subdirectory name), walked recursively in sorted order;
    dot-directories (.git and friends) are skipped;
  - a *.jsonl file: one object per file with repo_id, path, content.

Files that fail UTF-8 decoding or repeat a path within their repo are
dropped with a counted reason.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

DROP_DECODE_ERROR = "decode_error"
DROP_DUPLICATE_PATH = "duplicate_path"
DROP_BAD_RECORD = "bad_record"


@dataclass
class RawFile:
    path: str
    content: str


@dataclass
class RawRepo:
    repo_id: str
    files: list[RawFile] = field(default_factory=list)


def _walk_repo_dir(root: str) -> list[tuple[str, str]]:
    """(repo-relative posix path, absolute path) pairs, sorted walk."""
    out: list[tuple[str, str]] = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = sorted(d for d in dirnames if not d.startswith("."))
        for name in sorted(filenames):
            if name.startswith("."):
                continue
            abs_path = os.path.join(dirpath, name)
            rel = os.path.relpath(abs_path, root).replace(os.sep, "/")
            out.append((rel, abs_path))
    return out


def load_repos(inputs: list[str], counters: dict[str, int] | None = None) -> list[RawRepo]:
    """Load all configured inputs into per-repo file lists, repos sorted
    by repo_id. Drop reasons accumulate into `counters` when given.
    """
    counters = counters if counters is not None else {}
    repos: dict[str, RawRepo] = {}
    seen_paths: dict[str, set[str]] = {}

    def add_file(repo_id: str, path: str, content: str) -> None:
        repo = repos.setdefault(repo_id, RawRepo(repo_id=repo_id))
        seen = seen_paths.setdefault(repo_id, set())
        if path in seen:
            counters[DROP_DUPLICATE_PATH] = counters.get(DROP_DUPLICATE_PATH, 0) + 1
            return
        seen.add(path)
        repo.files.append(RawFile(path=path, content=content))

    for source in inputs:
        if os.path.isdir(source):
            for entry in sorted(os.listdir(source)):
                repo_root = os.path.join(source, entry)
                if not os.path.isdir(repo_root) or entry.startswith("."):
                    continue
                for rel, abs_path in _walk_repo_dir(repo_root):
                    with open(abs_path, "rb") as fh:
                        raw = fh.read()
                    try:
                        content = raw.decode("utf-8")
                    except UnicodeDecodeError:
                        counters[DROP_DECODE_ERROR] = counters.get(DROP_DECODE_ERROR, 0) + 1
                        continue
                    add_file(entry, rel, content)
        else:
            with open(source, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        obj = json.loads(line)
                        repo_id = obj["repo_id"]
                        path = obj["path"]
                        content = obj["content"]
                    except (json.JSONDecodeError, KeyError, TypeError):
                        counters[DROP_BAD_RECORD] = counters.get(DROP_BAD_RECORD, 0) + 1
                        continue
                    if not isinstance(content, str) or not path:
                        counters[DROP_BAD_RECORD] = counters.get(DROP_BAD_RECORD, 0) + 1
                        continue
                    add_file(str(repo_id), str(path), content)

    return [repos[rid] for rid in sorted(repos)]

"""Benchmark decontamination by token-level n-gram matching.

Test strings of ten or more tokens are indexed by all their sliding
10-grams; strings of three to nine tokens are matched exactly as whole
token sequences; anything shorter is ignored. A sample is excluded
whole on any hit. Normalization collapses whitespace runs and preserves
case, so spacing tricks cannot evade detection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .deps import RepoSample

NGRAM_SIZE = 10
EXACT_MIN_TOKENS = 3


def tokenize(text: str) -> list[str]:
    """Whitespace tokenization; splitting collapses runs implicitly."""
    return text.split()


@dataclass
class ContaminationIndex:
    """Lookup tables built once from benchmark test data, then read-only."""

    ten_gram_set: set[str] = field(default_factory=set)
    exact_set: set[str] = field(default_factory=set)
    source_labels: dict[str, str] = field(default_factory=dict)
    exact_lengths: set[int] = field(default_factory=set)
    skipped_short: int = 0

    def __len__(self) -> int:
        return len(self.ten_gram_set) + len(self.exact_set)


def build_contamination_index(
    test_strings: Iterable[tuple[str, str]],
) -> ContaminationIndex:
    """Index (text, benchmark_label) pairs. The first benchmark to
    contribute an entry owns its label.
    """
    index = ContaminationIndex()
    for text, benchmark in test_strings:
        tokens = tokenize(text)
        if len(tokens) < EXACT_MIN_TOKENS:
            index.skipped_short += 1
            continue
        if len(tokens) >= NGRAM_SIZE:
            for i in range(len(tokens) - NGRAM_SIZE + 1):
                gram = " ".join(tokens[i : i + NGRAM_SIZE])
                index.ten_gram_set.add(gram)
                index.source_labels.setdefault(gram, benchmark)
        else:
            entry = " ".join(tokens)
            index.exact_set.add(entry)
            index.exact_lengths.add(len(tokens))
            index.source_labels.setdefault(entry, benchmark)
    return index


@dataclass(frozen=True)
class ContaminationReport:
    hit: bool
    matched_entries: tuple[str, ...] = ()
    benchmarks: tuple[str, ...] = ()


def scan_text(text: str, index: ContaminationIndex) -> ContaminationReport:
    """All matches found in one pass over the token stream."""
    tokens = tokenize(text)
    matched: list[str] = []
    seen: set[str] = set()
    if index.ten_gram_set and len(tokens) >= NGRAM_SIZE:
        for i in range(len(tokens) - NGRAM_SIZE + 1):
            gram = " ".join(tokens[i : i + NGRAM_SIZE])
            if gram in index.ten_gram_set and gram not in seen:
                seen.add(gram)
                matched.append(gram)
    for n in sorted(index.exact_lengths):
        if len(tokens) < n:
            continue
        for i in range(len(tokens) - n + 1):
            window = " ".join(tokens[i : i + n])
            if window in index.exact_set and window not in seen:
                seen.add(window)
                matched.append(window)
    benchmarks = sorted({index.source_labels[m] for m in matched})
    return ContaminationReport(
        hit=bool(matched),
        matched_entries=tuple(matched),
        benchmarks=tuple(benchmarks),
    )


def is_contaminated(sample: RepoSample, index: ContaminationIndex) -> ContaminationReport:
    """The whole sample is the exclusion unit."""
    return scan_text(sample.text, index)

"""Ear-voice span from word alignments and word timestamps.

The alignment links come from an upstream pipeline (automatic aligner plus a
human pass that marks the correct links); this module only averages them.
One target word aligned to several source words contributes one span per
link.  No linguistic filtering happens here: excluding stop words is the
annotator's job.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import TraceError

VERIFIED_ONLY = "verified-only"
AUTOMATIC = "automatic"
EVS_MODES = (VERIFIED_ONLY, AUTOMATIC)


@dataclass(frozen=True)
class AlignedPair:
    """One (source word, target word) alignment link with start timestamps."""

    src_index: int
    tgt_index: int
    src_start: float  # ms
    tgt_start: float  # ms
    verified: bool = False

    def __post_init__(self) -> None:
        if self.src_index < 1 or self.tgt_index < 1:
            raise TraceError(
                f"alignment indices must be >= 1, got ({self.src_index}, {self.tgt_index})"
            )
        if self.src_start < 0 or self.tgt_start < 0:
            raise TraceError("alignment start times must be non-negative")

    @property
    def span(self) -> float:
        return self.tgt_start - self.src_start


def dedupe_pairs(
    pairs: list[AlignedPair] | tuple[AlignedPair, ...]
) -> tuple[tuple[AlignedPair, ...], int]:
    """Drop exact duplicate links, returning (unique links, duplicate count)."""
    seen = set()
    unique: list[AlignedPair] = []
    for pair in pairs:
        if pair in seen:
            continue
        seen.add(pair)
        unique.append(pair)
    return tuple(unique), len(pairs) - len(unique)


def mean_evs(
    pairs: list[AlignedPair] | tuple[AlignedPair, ...], mode: str = VERIFIED_ONLY
) -> float | None:
    """Mean ear-voice span over alignment links, in milliseconds.

    ``verified-only`` averages only human-confirmed links; ``automatic``
    averages every link, wrong ones included.  Returns None when the selected
    link set is empty (such sentences are dropped from corpus statistics, not
    scored as zero).  Negative spans are averaged as-is.
    """
    if mode not in EVS_MODES:
        raise ValueError(f"unknown EVS mode {mode!r}")
    unique, _ = dedupe_pairs(pairs)
    if mode == VERIFIED_ONLY:
        unique = tuple(p for p in unique if p.verified)
    if not unique:
        return None
    return sum(p.span for p in unique) / len(unique)

"""Wall-clock latency metrics for timed sessions.

ATD works on token *end* times while the offsets use the outermost start/end
pair; this asymmetry is deliberate and matches how the ear-voice-span style
measurements treat speech.  Values are milliseconds and may legitimately be
negative (a system can finish speaking before the input ends).
"""

from __future__ import annotations

import logging
from dataclasses import replace

from .core import CA, NCA, SessionTrace, TraceError
from .metrics_step import corresponding_input_indices

logger = logging.getLogger(__name__)


def _require_timed(s: SessionTrace, what: str) -> None:
    if not s.is_timed:
        raise TraceError(f"{s.id}: {what} needs a timed session, not unit steps")
    if not s.source:
        raise TraceError(f"{s.id}: no input")
    if not s.target:
        raise TraceError(f"{s.id}: no output produced")


def atd_timed(s: SessionTrace) -> float:
    """Average token delay in milliseconds: mean of end-time differences
    between each output token and its matched input token."""
    _require_timed(s, "ATD")
    if s.timeline_kind == CA:
        late = sum(
            1
            for tok, g in zip(s.target, s.reads)
            if tok.start < s.source[g - 1].end
        )
        if late:
            logger.warning(
                "%s: %d target tokens start before their read source token ends "
                "(pipelined output?); scoring as recorded",
                s.id,
                late,
            )
    matches = corresponding_input_indices(s.reads)
    total = 0.0
    for t, token in enumerate(s.target, start=1):
        total += token.end - s.source[matches[t - 1] - 1].end
    return total / len(s.target)


def start_offset(s: SessionTrace) -> float:
    """Time from the start of the source to the start of the output, ms."""
    _require_timed(s, "start offset")
    return s.target[0].start - s.source[0].start


def end_offset(s: SessionTrace) -> float:
    """Time from the end of the source to the end of the output, ms."""
    _require_timed(s, "end offset")
    return s.target[-1].end - s.source[-1].end


def build_nca_timeline(s: SessionTrace) -> SessionTrace:
    """Re-schedule a computation-aware session onto the ideal clock.

    With computation collapsed to zero, each piece of output starts at the
    later of the end of the source prefix that triggered it and the end of
    the previous output (speech synthesis cannot start while still
    speaking); durations are preserved.  The session must carry its
    computation-span annotations, even if the list is empty, as evidence
    that the wall-clock trace declared its computation structure.
    """
    if s.timeline_kind != CA:
        raise TraceError(f"{s.id}: only computation-aware sessions can be re-scheduled")
    if s.spans is None:
        raise TraceError(f"{s.id}: missing computation-span annotations")
    _require_timed(s, "re-scheduling")

    new_target = []
    prev_end = 0.0
    for t, token in enumerate(s.target, start=1):
        trigger = s.source[s.reads[t - 1] - 1].end
        start = max(trigger, prev_end)
        end = start + token.duration
        new_target.append(replace(token, start=start, end=end))
        prev_end = end
    return replace(s, timeline_kind=NCA, target=tuple(new_target), spans=None)

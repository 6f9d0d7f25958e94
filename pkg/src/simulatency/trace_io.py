"""JSONL trace and alignment file formats.

One JSON object per line so large corpora stream.  Trace records look like::

    {"id": "s1", "modality": "speech-to-speech", "timeline": "ca",
     "source": [{"text": "hello", "start": 0, "end": 250}, ...],
     "target": [{"text": "...", "start": 1400, "end": 2000, "g": 2}, ...],
     "reference": "reference translation",
     "spans": [{"kind": "decode", "start": 1000, "end": 1400}],
     "meta": {...}}

Times are integer milliseconds and required unless the timeline is "steps";
``g`` counts source entries read before the target entry was emitted.
``meta`` is accepted and ignored.  Alignment records carry per-sentence
word-alignment links::

    {"id": "s1", "links": [{"src": 1, "tgt": 2, "src_start": 0,
                            "tgt_start": 3300, "verified": true}]}
"""

from __future__ import annotations

import json
from typing import IO, Iterable, Iterator

from .core import (
    STEPS,
    TIMELINES,
    ComputationSpan,
    SessionTrace,
    TimedToken,
    TraceError,
)
from .evs import AlignedPair


class TraceFormatError(TraceError):
    """A trace or alignment file does not match the wire format."""


def _context(lineno: int | None) -> str:
    return f"line {lineno}: " if lineno is not None else ""


def _require(obj: dict, key: str, lineno: int | None):
    if key not in obj:
        raise TraceFormatError(f"{_context(lineno)}missing field {key!r}")
    return obj[key]


def _int_ms(value, what: str, lineno: int | None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TraceFormatError(f"{_context(lineno)}{what} must be a number, got {value!r}")
    if isinstance(value, float) and not value.is_integer():
        raise TraceFormatError(f"{_context(lineno)}{what} must be integer milliseconds")
    if value < 0:
        raise TraceFormatError(f"{_context(lineno)}{what} must be non-negative")
    return float(value)


def _parse_token(obj, index: int, timed: bool, what: str, lineno: int | None) -> TimedToken:
    if not isinstance(obj, dict):
        raise TraceFormatError(f"{_context(lineno)}{what} entry must be an object")
    text = obj.get("text")
    if text is not None and not isinstance(text, str):
        raise TraceFormatError(f"{_context(lineno)}{what} text must be a string")
    start = obj.get("start")
    end = obj.get("end")
    if timed or (start is not None or end is not None):
        start = _int_ms(_require(obj, "start", lineno) if timed else start, f"{what} start", lineno)
        end = _int_ms(_require(obj, "end", lineno) if timed else end, f"{what} end", lineno)
    return TimedToken(index=index, text=text, start=start, end=end)


def record_to_session(record: dict, lineno: int | None = None) -> SessionTrace:
    """Build a validated session from one decoded trace record."""
    if not isinstance(record, dict):
        raise TraceFormatError(f"{_context(lineno)}record must be a JSON object")
    session_id = _require(record, "id", lineno)
    if not isinstance(session_id, str) or not session_id:
        raise TraceFormatError(f"{_context(lineno)}id must be a non-empty string")
    modality = _require(record, "modality", lineno)
    timeline = _require(record, "timeline", lineno)
    if timeline not in TIMELINES:
        raise TraceFormatError(f"{_context(lineno)}unknown timeline {timeline!r}")
    timed = timeline != STEPS

    source = [
        _parse_token(obj, i, timed, "source", lineno)
        for i, obj in enumerate(_require(record, "source", lineno), start=1)
    ]
    target = []
    reads = []
    for i, obj in enumerate(_require(record, "target", lineno), start=1):
        token = _parse_token(obj, i, timed, "target", lineno)
        g = _require(obj, "g", lineno) if isinstance(obj, dict) else None
        if isinstance(g, bool) or not isinstance(g, int):
            raise TraceFormatError(f"{_context(lineno)}target g must be an integer")
        target.append(token)
        reads.append(g)

    reference = record.get("reference")
    if reference is not None and not isinstance(reference, str):
        raise TraceFormatError(f"{_context(lineno)}reference must be a string")

    spans = None
    if "spans" in record:
        spans = tuple(
            ComputationSpan(
                kind=str(span.get("kind", "compute")),
                start=_int_ms(_require(span, "start", lineno), "span start", lineno),
                end=_int_ms(_require(span, "end", lineno), "span end", lineno),
            )
            for span in record["spans"]
        )

    try:
        return SessionTrace(
            id=session_id,
            modality=modality,
            timeline_kind=timeline,
            source=tuple(source),
            target=tuple(target),
            reads=tuple(reads),
            reference=reference,
            spans=spans,
        )
    except TraceError as exc:
        raise TraceFormatError(f"{_context(lineno)}{exc}") from exc


def session_to_record(s: SessionTrace) -> dict:
    """Serialize a session back to its wire form."""

    def token_obj(token: TimedToken, g: int | None = None) -> dict:
        obj: dict = {}
        if token.text is not None:
            obj["text"] = token.text
        if token.timed:
            obj["start"] = int(token.start)
            obj["end"] = int(token.end)
        if g is not None:
            obj["g"] = g
        return obj

    record: dict = {
        "id": s.id,
        "modality": s.modality,
        "timeline": s.timeline_kind,
        "source": [token_obj(t) for t in s.source],
        "target": [token_obj(t, g) for t, g in zip(s.target, s.reads)],
    }
    if s.reference is not None:
        record["reference"] = s.reference
    if s.spans is not None:
        record["spans"] = [
            {"kind": sp.kind, "start": int(sp.start), "end": int(sp.end)} for sp in s.spans
        ]
    return record


def _iter_json_lines(fp: IO[str]) -> Iterator[tuple[int, dict]]:
    for lineno, line in enumerate(fp, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            yield lineno, json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"line {lineno}: malformed JSON ({exc.msg})") from exc


def read_sessions(path: str) -> list[SessionTrace]:
    with open(path, "r", encoding="utf-8") as fp:
        return [record_to_session(record, lineno) for lineno, record in _iter_json_lines(fp)]


def write_sessions(path: str, sessions: Iterable[SessionTrace]) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        for session in sessions:
            fp.write(json.dumps(session_to_record(session), ensure_ascii=False) + "\n")


def record_to_alignment(record: dict, lineno: int | None = None) -> tuple[str, tuple[AlignedPair, ...]]:
    if not isinstance(record, dict):
        raise TraceFormatError(f"{_context(lineno)}record must be a JSON object")
    sentence_id = _require(record, "id", lineno)
    if not isinstance(sentence_id, str) or not sentence_id:
        raise TraceFormatError(f"{_context(lineno)}id must be a non-empty string")
    links = []
    for obj in _require(record, "links", lineno):
        verified = obj.get("verified", False)
        if not isinstance(verified, bool):
            raise TraceFormatError(f"{_context(lineno)}verified must be a boolean")
        try:
            links.append(
                AlignedPair(
                    src_index=int(_require(obj, "src", lineno)),
                    tgt_index=int(_require(obj, "tgt", lineno)),
                    src_start=_int_ms(_require(obj, "src_start", lineno), "src_start", lineno),
                    tgt_start=_int_ms(_require(obj, "tgt_start", lineno), "tgt_start", lineno),
                    verified=verified,
                )
            )
        except TraceError as exc:
            raise TraceFormatError(f"{_context(lineno)}{exc}") from exc
    return sentence_id, tuple(links)


def read_alignments(path: str) -> list[tuple[str, tuple[AlignedPair, ...]]]:
    with open(path, "r", encoding="utf-8") as fp:
        return [record_to_alignment(record, lineno) for lineno, record in _iter_json_lines(fp)]


def write_alignments(
    path: str, alignments: Iterable[tuple[str, Iterable[AlignedPair]]]
) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        for sentence_id, links in alignments:
            record = {
                "id": sentence_id,
                "links": [
                    {
                        "src": link.src_index,
                        "tgt": link.tgt_index,
                        "src_start": int(link.src_start),
                        "tgt_start": int(link.tgt_start),
                        "verified": link.verified,
                    }
                    for link in links
                ],
            }
            fp.write(json.dumps(record, ensure_ascii=False) + "\n")

"""Command-line interface.

Subcommands: ``eval`` scores trace files and emits CSV/JSON reports,
``simulate`` generates synthetic schedules, ``evs`` averages alignment
files, ``correlate`` runs Spearman's rho between report columns, and
``concat`` joins adjacent sessions into streaming-style traces.

Exit codes: 0 on success, 1 for usage errors, 2 for data errors (and for
warnings escalated by ``--strict``).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from typing import Sequence

from .core import (
    CA,
    NCA,
    STEPS,
    SPEECH_TO_SPEECH,
    SPEECH_TO_TEXT,
    SessionTrace,
    SubSegmentConfig,
    TokenGranularity,
    TraceError,
    WORD,
    chunk_ends_from_reads,
    concat_sessions,
    regroup_tokens,
    subsegment_session,
)
from .evs import EVS_MODES, VERIFIED_ONLY, dedupe_pairs, mean_evs
from .metrics_step import (
    RATIO_HYPOTHESIS,
    RATIO_LENGTH_ADAPTIVE,
    RATIO_REFERENCE,
    StepMetricInput,
    atd_steps,
    average_lagging,
    average_proportion,
    consecutive_wait,
    differentiable_average_lagging,
)
from .metrics_time import atd_timed, build_nca_timeline, end_offset, start_offset
from .sim import gen_chunk_k, gen_two_segment, gen_wait_k
from .stats import StatsError, spearman
from .trace_io import (
    TraceFormatError,
    read_alignments,
    read_sessions,
    session_to_record,
    write_sessions,
)

logger = logging.getLogger("simulatency")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

STEP_METRICS = ("al", "al_ref", "laal", "dal", "ap", "cw")
TIMED_METRICS = ("start_offset", "end_offset")
ALL_METRICS = ("al", "al_ref", "laal", "dal", "ap", "cw", "atd", "start_offset", "end_offset")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


class _WarningCounter(logging.Handler):
    def __init__(self) -> None:
        super().__init__(level=logging.WARNING)
        self.count = 0

    def emit(self, record: logging.LogRecord) -> None:
        self.count += 1


def _parse_int_spec(spec: str) -> list[int]:
    """Parse "3", "1..20" or "1,5,9" into a list of ints."""
    values: list[int] = []
    for part in spec.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            values.extend(range(int(lo), int(hi) + 1))
        else:
            values.append(int(part))
    if not values:
        raise ValueError("empty range")
    return values


def _open_out(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

def _reference_length(reference: str | None, gran: TokenGranularity) -> int | None:
    if reference is None:
        return None
    if gran.unit == WORD:
        n = len(reference.split())
    else:
        n = math.ceil(len("".join(reference.split())) / gran.group_size)
    return n or None


def _step_input(session: SessionTrace, gran: TokenGranularity) -> StepMetricInput:
    target, reads = regroup_tokens(
        session.target, session.reads, gran, chunk_ends_from_reads(session.reads)
    )
    return StepMetricInput(
        reads=reads,
        src_len=session.src_len,
        tgt_len=len(target),
        ref_len=_reference_length(session.reference, gran),
    )


def _prepare_timed(session: SessionTrace, timeline: str | None) -> SessionTrace | str:
    """The session to use for timed metrics, or a reason string for skipping."""
    if session.timeline_kind == STEPS:
        return "unit-step session has no timed metrics"
    if timeline is None or timeline == session.timeline_kind:
        return session
    if timeline == STEPS:
        return "timed metrics disabled by --timeline steps"
    if timeline == NCA and session.timeline_kind == CA:
        try:
            return build_nca_timeline(session)
        except TraceError as exc:
            return str(exc)
    return f"cannot realize {timeline!r} timeline from {session.timeline_kind!r} trace"


def _default_metrics(session: SessionTrace, timeline: str | None) -> list[str]:
    effective = timeline or session.timeline_kind
    if effective == STEPS or session.timeline_kind == STEPS:
        names = ["al", "al_ref", "laal", "dal", "ap", "cw", "atd"]
        if session.reference is None:
            names = [n for n in names if n not in ("al_ref", "laal")]
        return names
    return ["atd", "start_offset", "end_offset"]


def _eval_session(
    session: SessionTrace,
    metrics: list[str] | None,
    timeline: str | None,
    gran: TokenGranularity,
    subseg: SubSegmentConfig,
) -> dict[str, float]:
    names = metrics if metrics is not None else _default_metrics(session, timeline)
    values: dict[str, float] = {}
    step_inp: StepMetricInput | None = None
    timed: SessionTrace | str | None = None
    atd_session: SessionTrace | None = None

    for name in names:
        try:
            if name in STEP_METRICS or (
                name == "atd"
                and (session.timeline_kind == STEPS or timeline == STEPS)
            ):
                if step_inp is None:
                    step_inp = _step_input(session, gran)
                if name == "al":
                    values[name] = average_lagging(step_inp, RATIO_HYPOTHESIS)
                elif name == "al_ref":
                    values[name] = average_lagging(step_inp, RATIO_REFERENCE)
                elif name == "laal":
                    values[name] = average_lagging(step_inp, RATIO_LENGTH_ADAPTIVE)
                elif name == "dal":
                    values[name] = differentiable_average_lagging(step_inp)
                elif name == "ap":
                    values[name] = average_proportion(step_inp)
                elif name == "cw":
                    values[name] = consecutive_wait(step_inp)
                else:
                    values[name] = atd_steps(step_inp)
                continue

            if timed is None:
                timed = _prepare_timed(session, timeline)
            if isinstance(timed, str):
                logger.warning("%s: skipping %s (%s)", session.id, name, timed)
                continue
            if name == "start_offset":
                values[name] = start_offset(timed)
            elif name == "end_offset":
                values[name] = end_offset(timed)
            elif name == "atd":
                if atd_session is None:
                    atd_session = timed
                    if timed.modality in (SPEECH_TO_TEXT, SPEECH_TO_SPEECH):
                        atd_session = subsegment_session(timed, subseg)
                values[name] = atd_timed(atd_session)
            else:
                logger.warning("%s: unknown metric %s", session.id, name)
        except TraceError as exc:
            logger.warning("%s: skipping %s (%s)", session.id, name, exc)
    return values


def _format_value(name: str, value: float, timed_ms: bool) -> str:
    if name in TIMED_METRICS or (name == "atd" and timed_ms):
        return f"{value:.1f}"
    return repr(value)


def cmd_eval(args: argparse.Namespace) -> int:
    sessions = read_sessions(args.traces)
    if not sessions:
        raise TraceError(f"{args.traces}: no sessions")
    gran = TokenGranularity.from_spec(args.granularity)
    subseg = SubSegmentConfig(tau=args.tau)
    metrics = args.metrics.split(",") if args.metrics else None
    if metrics is not None:
        unknown = [m for m in metrics if m not in ALL_METRICS]
        if unknown:
            raise SystemExit(_usage_error(args, f"unknown metrics: {', '.join(unknown)}"))

    rows = []
    for session in sessions:
        values = _eval_session(session, metrics, args.timeline, gran, subseg)
        rows.append((session, values))

    if metrics is not None:
        columns = [m for m in ALL_METRICS if m in metrics]
    else:
        columns = [m for m in ALL_METRICS if any(m in values for _, values in rows)]
    out, close = _open_out(args.output)
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["id", "modality", "timeline", "src_len", "tgt_len", *columns])
        for session, values in rows:
            timed_ms = session.timeline_kind != STEPS and args.timeline != STEPS
            writer.writerow(
                [
                    session.id,
                    session.modality,
                    session.timeline_kind,
                    session.src_len,
                    session.tgt_len,
                ]
                + [
                    _format_value(m, values[m], timed_ms) if m in values else ""
                    for m in columns
                ]
            )
        corpus = {}
        for m in columns:
            present = [values[m] for _, values in rows if m in values]
            if present:
                corpus[m] = sum(present) / len(present)
        all_timed = all(
            session.timeline_kind != STEPS for session, _ in rows
        ) and args.timeline != STEPS
        writer.writerow(
            ["corpus", "", "", "", ""]
            + [
                _format_value(m, corpus[m], all_timed) if m in corpus else ""
                for m in columns
            ]
        )
    finally:
        if close:
            out.close()

    if args.json:
        report = {
            "sessions": [
                {
                    "id": session.id,
                    "modality": session.modality,
                    "timeline": session.timeline_kind,
                    "src_len": session.src_len,
                    "tgt_len": session.tgt_len,
                    "metrics": values,
                }
                for session, values in rows
            ],
            "corpus": {"n_sessions": len(rows), "metrics": corpus},
        }
        with open(args.json, "w", encoding="utf-8") as fp:
            json.dump(report, fp, ensure_ascii=False, indent=2)
            fp.write("\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(args: argparse.Namespace) -> int:
    if args.strategy == "two-segment":
        if not args.first_len:
            raise SystemExit(_usage_error(args, "two-segment requires --first-len"))
        sessions = [gen_two_segment(n) for n in _parse_int_spec(args.first_len)]
    else:
        if not args.k:
            raise SystemExit(_usage_error(args, f"{args.strategy} requires --k"))
        gen = gen_wait_k if args.strategy == "wait-k" else gen_chunk_k
        sessions = [gen(k, args.src_len, args.tgt_len) for k in _parse_int_spec(args.k)]

    if args.output and args.output != "-":
        write_sessions(args.output, sessions)
    else:
        for session in sessions:
            print(json.dumps(session_to_record(session), ensure_ascii=False))
    return EXIT_OK


# ---------------------------------------------------------------------------
# evs
# ---------------------------------------------------------------------------

def cmd_evs(args: argparse.Namespace) -> int:
    alignments = read_alignments(args.alignments)
    if not alignments:
        raise TraceError(f"{args.alignments}: no sentences")
    out, close = _open_out(args.output)
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["id", "n_links", "n_used", "mean_evs"])
        means = []
        for sentence_id, links in alignments:
            unique, dupes = dedupe_pairs(links)
            if dupes:
                logger.warning("%s: %d duplicate links dropped", sentence_id, dupes)
            used = (
                len([p for p in unique if p.verified])
                if args.mode == VERIFIED_ONLY
                else len(unique)
            )
            value = mean_evs(unique, args.mode)
            if value is not None:
                means.append(value)
            writer.writerow(
                [
                    sentence_id,
                    len(links),
                    used,
                    f"{value:.1f}" if value is not None else "",
                ]
            )
        corpus = f"{sum(means) / len(means):.1f}" if means else ""
        writer.writerow(["corpus", "", "", corpus])
    finally:
        if close:
            out.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# correlate
# ---------------------------------------------------------------------------

def _read_csv_columns(path: str) -> list[dict]:
    with open(path, "r", encoding="utf-8") as fp:
        return [row for row in csv.DictReader(fp) if row.get("id") != "corpus"]


def _as_float(text: str | None) -> float | None:
    if text is None or text == "":
        return None
    try:
        return float(text)
    except ValueError:
        return None


def cmd_correlate(args: argparse.Namespace) -> int:
    rows = _read_csv_columns(args.report)
    if args.join:
        joined = {row.get("id"): row for row in _read_csv_columns(args.join)}
        rows = [
            {**row, **joined[row.get("id")]} for row in rows if row.get("id") in joined
        ]
    col_a = [_as_float(row.get(args.col_a)) for row in rows]
    col_b = [_as_float(row.get(args.col_b)) for row in rows]
    result = spearman(col_a, col_b)
    print(f"rho={result.rho:.6f} p={result.pvalue:.6f} n={result.n}")
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fp:
            writer = csv.writer(fp, lineterminator="\n")
            writer.writerow(["col_a", "col_b", "rho", "p", "n"])
            writer.writerow(
                [args.col_a, args.col_b, repr(result.rho), repr(result.pvalue), result.n]
            )
    return EXIT_OK


# ---------------------------------------------------------------------------
# concat
# ---------------------------------------------------------------------------

def cmd_concat(args: argparse.Namespace) -> int:
    sessions = read_sessions(args.traces)
    if len(sessions) < 2:
        raise TraceError(f"{args.traces}: need at least two sessions to concatenate")
    if args.pairing == "adjacent":
        pairs = list(zip(sessions[0::2], sessions[1::2]))
        if len(sessions) % 2:
            logger.warning("odd session count: %s left unpaired", sessions[-1].id)
    else:
        pairs = list(zip(sessions, sessions[1:]))
    joined = [concat_sessions(a, b, mode=args.shift) for a, b in pairs]
    if args.output and args.output != "-":
        write_sessions(args.output, joined)
    else:
        for session in joined:
            print(json.dumps(session_to_record(session), ensure_ascii=False))
    return EXIT_OK


# ---------------------------------------------------------------------------
# wiring
# ---------------------------------------------------------------------------

def _usage_error(args: argparse.Namespace, message: str) -> int:
    print(f"simulatency {args.command}: error: {message}", file=sys.stderr)
    return EXIT_USAGE


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="simulatency", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="score a JSONL trace file")
    p_eval.add_argument("traces", help="JSONL trace file")
    p_eval.add_argument("--metrics", help=f"comma-separated subset of: {','.join(ALL_METRICS)}")
    p_eval.add_argument("--tau", type=float, default=300.0, help="sub-segment length in ms (default 300)")
    p_eval.add_argument("--granularity", default="word", help="word or char:N (default word)")
    p_eval.add_argument("--timeline", choices=[CA, NCA, STEPS], help="evaluate on this timeline instead of each record's own")
    p_eval.add_argument("--strict", action="store_true", help="treat warnings as errors")
    p_eval.add_argument("--output", "-o", help="CSV report path (default stdout)")
    p_eval.add_argument("--json", help="also write a JSON report to this path")
    p_eval.set_defaults(func=cmd_eval)

    p_sim = sub.add_parser("simulate", help="generate synthetic schedules")
    p_sim.add_argument("--strategy", required=True, choices=["wait-k", "chunk-k", "two-segment"])
    p_sim.add_argument("--k", help='k values: "3", "1..20" or "1,5,9"')
    p_sim.add_argument("--first-len", help="first output chunk lengths for two-segment, same syntax")
    p_sim.add_argument("--src-len", type=int, default=20)
    p_sim.add_argument("--tgt-len", type=int, default=20)
    p_sim.add_argument("--output", "-o", help="JSONL path (default stdout)")
    p_sim.set_defaults(func=cmd_simulate)

    p_evs = sub.add_parser("evs", help="mean ear-voice span from alignment files")
    p_evs.add_argument("alignments", help="JSONL alignment file")
    p_evs.add_argument("--mode", choices=list(EVS_MODES), default=VERIFIED_ONLY)
    p_evs.add_argument("--strict", action="store_true", help="treat warnings as errors")
    p_evs.add_argument("--output", "-o", help="CSV path (default stdout)")
    p_evs.set_defaults(func=cmd_evs)

    p_corr = sub.add_parser("correlate", help="Spearman's rho between report columns")
    p_corr.add_argument("report", help="CSV report")
    p_corr.add_argument("--col-a", required=True)
    p_corr.add_argument("--col-b", required=True)
    p_corr.add_argument("--join", help="second CSV joined on the id column")
    p_corr.add_argument("--output", "-o", help="write the result as CSV")
    p_corr.set_defaults(func=cmd_correlate)

    p_cat = sub.add_parser("concat", help="concatenate session pairs")
    p_cat.add_argument("traces", help="JSONL trace file")
    p_cat.add_argument("--pairing", choices=["adjacent", "sliding"], default="adjacent")
    p_cat.add_argument("--shift", choices=["relative", "absolute"], default="relative")
    p_cat.add_argument("--strict", action="store_true", help="treat warnings as errors")
    p_cat.add_argument("--output", "-o", help="JSONL path (default stdout)")
    p_cat.set_defaults(func=cmd_concat)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    counter = _WarningCounter()
    root = logging.getLogger()
    root.addHandler(counter)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        code = args.func(args)
    except (TraceFormatError, TraceError, StatsError, OSError) as exc:
        print(f"simulatency: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:  # bad flag values (granularity, tau, ranges)
        print(f"simulatency: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    finally:
        root.removeHandler(counter)
    if code == EXIT_OK and getattr(args, "strict", False) and counter.count:
        print(
            f"simulatency: error: {counter.count} warnings escalated by --strict",
            file=sys.stderr,
        )
        return EXIT_DATA
    return code


if __name__ == "__main__":
    sys.exit(main())

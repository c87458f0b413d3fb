"""Command-line entry point: ``isomt validate|synth|align|eval|dub``.

Exit codes: 0 success, 1 bad input data (details on stderr, 1-based line
numbers or record ids), 2 usage errors. Outputs are written atomically.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Sequence

from . import __version__
from .align import COSTS, project_pauses, source_proportions
from .errors import CountMismatch, FileFormatError, IsomtError, LengthMismatch, TooFewTokens
from .lc import QUANTIZE_MODES, bucket_trace
from .metrics import CHRF_BETA, CHRF_ORDER, PHRASE_LC_TOLERANCE, evaluate, ordered_map
from .synth import PhraseLengthDistribution, RngState, fit_length_distribution, synthesize_corpus
from .textmodel import (
    PAUSE_MARKER,
    PAUSE_THRESHOLD,
    Corpus,
    PauseMarkedSentence,
    format_pause_marked,
    read_lines,
    read_pause_marked,
    read_timed_jsonl,
    serialize,
)
from .timing import MIN_PAUSE, SMOOTHNESS_TAU, build_plan, relax, smoothness


class DataError(Exception):
    """Input data problem; reported on stderr with exit code 1."""

    def __init__(self, lines: list[str]):
        self.lines = lines
        super().__init__("\n".join(lines))


# ---------------------------------------------------------------------------
# argument types (validated before any file is read)
# ---------------------------------------------------------------------------


def _number(kind, lo=None, hi=None, lo_open=False):
    def parse(text: str):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {kind.__name__}, got {text!r}") from None
        if kind is float and v != v:
            raise argparse.ArgumentTypeError("NaN is not allowed")
        if lo is not None and (v < lo or (lo_open and v == lo)):
            raise argparse.ArgumentTypeError(f"must be {'>' if lo_open else '>='} {lo}, got {v}")
        if hi is not None and v > hi:
            raise argparse.ArgumentTypeError(f"must be <= {hi}, got {v}")
        return v
    return parse


def _lc_trace(text: str) -> tuple[int, list[int]]:
    try:
        total, _, steps = text.partition(":")
        total_i = int(total)
        steps_l = [int(s) for s in steps.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected TOTAL:LEN,LEN,... (e.g. 20:5,5,10), got {text!r}") from None
    if total_i < 1 or any(s < 0 for s in steps_l):
        raise argparse.ArgumentTypeError("total must be >= 1 and step lengths >= 0")
    return total_i, steps_l


# ---------------------------------------------------------------------------
# io helpers
# ---------------------------------------------------------------------------


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to a temp file next to ``path`` and rename it into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _problems(exc: FileFormatError) -> list[str]:
    return [f"{exc.path}:{where}: {msg}" for where, msg in exc.problems]


def _load_marked(path: str, marker: str) -> list[PauseMarkedSentence]:
    return read_pause_marked(path, marker)


def _same_length(named: dict[str, Sequence]) -> None:
    sizes = {name: len(v) for name, v in named.items()}
    if len(set(sizes.values())) > 1:
        raise DataError(["line counts differ: " + ", ".join(f"{k}={v}" for k, v in sizes.items())])


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_validate(args) -> int:
    problems: list[str] = []
    counts = {}
    for path in args.files:
        fmt = args.format
        if fmt == "auto":
            fmt = "timed" if str(path).endswith(".jsonl") else "text"
        try:
            if fmt == "timed":
                counts[path] = len(read_timed_jsonl(path, args.pause_threshold))
            else:
                counts[path] = len(read_pause_marked(path, args.marker))
        except FileFormatError as exc:
            problems.extend(_problems(exc))
    if args.parallel and len(set(counts.values())) > 1:
        problems.append("line counts differ: " + ", ".join(f"{k}={v}" for k, v in counts.items()))
    for line in problems:
        print(line, file=sys.stderr)
    if not problems:
        for path, n in counts.items():
            print(f"{path}: {n} sentences ok")
    return 1 if problems else 0


def _load_source_side(args) -> tuple[list[str], list[PauseMarkedSentence], list | None]:
    """Source sentences and optional timings; ids come from the timed file if given."""
    timings = None
    if args.timed:
        records = read_timed_jsonl(args.timed, args.pause_threshold)
        ids = [rid for rid, _ in records]
        timings = [ts for _, ts in records]
        if args.src:
            sources = _load_marked(args.src, args.marker)
            _same_length({args.timed: timings, args.src: sources})
        else:
            sources = [PauseMarkedSentence(ts.texts) for ts in timings]
    elif args.src:
        sources = _load_marked(args.src, args.marker)
        ids = [str(k + 1) for k in range(len(sources))]
    else:
        raise DataError(["need --src or --timed"])
    return ids, sources, timings


def _corpus(ids, sources, targets, timings) -> Corpus:
    try:
        return Corpus.from_sentences(sources, targets, ids=ids, timings=timings)
    except IsomtError as exc:
        raise DataError([str(exc)]) from None


def cmd_eval(args) -> int:
    if args.dump_lc_trace is not None:
        total, steps = args.dump_lc_trace
        trace = bucket_trace(total, steps, args.lc_mode)
        print(json.dumps({"total": total, "steps": steps, "buckets": trace,
                          "stopped": sum(steps) >= total}))
        return 0
    if not args.ref or not args.hyp:
        print("isomt eval: --ref and --hyp are required (unless --dump-lc-trace)", file=sys.stderr)
        return 2
    ids, sources, timings = _load_source_side(args)
    refs = _load_marked(args.ref, args.marker)
    hyps = _load_marked(args.hyp, args.marker)
    _same_length({"source": sources, args.ref: refs, args.hyp: hyps})
    corpus = _corpus(ids, sources, refs, timings)

    smooth = None
    if timings is not None:
        plans, skipped = [], []
        for rid, ts, hyp in zip(ids, timings, hyps):
            try:
                plan = build_plan(ts, hyp)
            except CountMismatch:
                skipped.append(rid)
                continue
            plans.append(relax(plan, args.min_pause) if args.relax else plan)
        if skipped:
            print(f"smoothness: skipped {len(skipped)} sentence(s) with mismatched phrase counts",
                  file=sys.stderr)
        if plans:
            smooth = smoothness(plans, args.tau)

    report = evaluate(corpus, hyps, tolerance=args.tolerance, chrf_order=args.chrf_order,
                      chrf_beta=args.chrf_beta, macro_chrf=args.macro_chrf,
                      smoothness=smooth, threads=args.threads)
    print(report.summary())
    if args.json:
        write_atomic(args.json, report.to_json())
    return 0


def cmd_align(args) -> int:
    ids, sources, timings = _load_source_side(args)
    targets = read_lines(args.tgt)
    _same_length({"source": sources, args.tgt: targets})

    def work(k: int) -> PauseMarkedSentence | None:
        props = source_proportions(sources[k], None if timings is None else timings[k])
        try:
            return project_pauses(targets[k], props, cost=args.cost)[1]
        except TooFewTokens:
            return None

    results = ordered_map(work, range(len(targets)), args.threads)
    failed = [k for k, r in enumerate(results) if r is None]
    lines = []
    for k, r in enumerate(results):
        if r is None:
            text = " ".join(targets[k].split())
            lines.append((text or "") + "\n")
        else:
            lines.append(serialize(r, args.marker) + "\n")
    write_atomic(args.out, "".join(lines))
    if failed:
        print(f"{len(failed)} target(s) have too few tokens for the source phrase count; "
              "written unsegmented:", file=sys.stderr)
        for k in failed:
            print(f"{args.tgt}:{k + 1}: id {ids[k]}: {len(targets[k].split())} tokens for "
                  f"{len(sources[k])} phrases", file=sys.stderr)
        return 1
    return 0


def cmd_synth(args) -> int:
    if args.dist:
        try:
            dist = PhraseLengthDistribution.from_json(Path(args.dist).read_text(encoding="utf-8"))
        except (ValueError, KeyError, TypeError, AttributeError) as exc:
            raise DataError([f"{args.dist}: bad distribution file: {exc}"]) from None
    else:
        annotated = _load_marked(args.annotated, args.marker)
        try:
            dist = fit_length_distribution(annotated)
        except IsomtError as exc:
            raise DataError([f"{args.annotated}: {exc}"]) from None
    if args.dump_dist:
        write_atomic(args.dump_dist, dist.to_json())
    if not (args.src or args.tgt):
        return 0
    if not (args.src and args.tgt and args.out and args.seed is not None):
        print("isomt synth: generating needs --src, --tgt, --seed and --out", file=sys.stderr)
        return 2
    sources = read_lines(args.src)
    targets = read_lines(args.tgt)
    _same_length({args.src: sources, args.tgt: targets})
    bad = []
    marker_tok = args.marker
    for k, s in enumerate(sources):
        if not s.strip():
            bad.append(f"{args.src}:{k + 1}: empty source sentence")
        elif marker_tok in s.split():
            bad.append(f"{args.src}:{k + 1}: source already contains {marker_tok!r}")
    if bad:
        raise DataError(bad)
    result = synthesize_corpus(sources, targets, dist, RngState(args.seed),
                               cost=args.cost, threads=args.threads)
    prefix = args.out
    write_atomic(f"{prefix}.src", format_pause_marked(result.corpus.sources, args.marker))
    write_atomic(f"{prefix}.tgt", format_pause_marked(result.corpus.targets, args.marker))
    write_atomic(f"{prefix}.rejects", "".join(r + "\n" for r in result.rejects))
    print(f"synthesized {len(result.corpus)} pairs, rejected {len(result.rejects)}")
    return 0


def cmd_dub(args) -> int:
    records = read_timed_jsonl(args.timed, args.pause_threshold)
    hyps = _load_marked(args.hyp, args.marker)
    _same_length({args.timed: records, args.hyp: hyps})

    def work(k: int):
        rid, ts = records[k]
        try:
            plan = build_plan(ts, hyps[k])
        except CountMismatch as exc:
            return rid, None, str(exc)
        if args.relax:
            plan = relax(plan, args.min_pause, args.max_iters)
        return rid, plan, None

    results = ordered_map(work, range(len(records)), args.threads)
    errors = [f"{args.hyp}:{k + 1}: id {rid}: {err}"
              for k, (rid, plan, err) in enumerate(results) if err]
    plans = [(rid, plan) for rid, plan, err in results if plan is not None]
    write_atomic(args.out, "".join(plan.to_json(rid) + "\n" for rid, plan in plans))
    if plans:
        score = smoothness([p for _, p in plans], args.tau)
        print(f"smoothness {score:.1f} tau={args.tau} plans={len(plans)}"
              f"{' relaxed' if args.relax else ''}")
    if errors:
        raise DataError(errors)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="isomt", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--marker", default=PAUSE_MARKER, help="pause token (default %(default)s)")
    common.add_argument("--pause-threshold", type=_number(float, 0, lo_open=True),
                        default=PAUSE_THRESHOLD, help="minimum silence for a pause, seconds")
    common.add_argument("--threads", type=_number(int, 1), default=1)

    p = sub.add_parser("validate", parents=[common], help="check pause-marked or timed files")
    p.add_argument("files", nargs="+")
    p.add_argument("--format", choices=("auto", "text", "timed"), default="auto")
    p.add_argument("--parallel", action="store_true", help="also require equal sentence counts")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("eval", parents=[common], help="score hypotheses")
    p.add_argument("--src", help="pause-marked source file")
    p.add_argument("--ref", help="pause-marked reference file")
    p.add_argument("--hyp", help="pause-marked hypothesis file")
    p.add_argument("--timed", help="timed source JSONL; enables smoothness")
    p.add_argument("--json", help="write the full-precision report here")
    p.add_argument("--tolerance", type=_number(float, 0, 1), default=PHRASE_LC_TOLERANCE)
    p.add_argument("--chrf-order", type=_number(int, 1, 20), default=CHRF_ORDER)
    p.add_argument("--chrf-beta", type=_number(float, 0, lo_open=True), default=CHRF_BETA)
    p.add_argument("--macro-chrf", action="store_true", help="average per-phrase ChrF")
    p.add_argument("--tau", type=_number(float, 0), default=SMOOTHNESS_TAU)
    p.add_argument("--relax", action="store_true")
    p.add_argument("--min-pause", type=_number(float, 0), default=MIN_PAUSE)
    p.add_argument("--dump-lc-trace", type=_lc_trace, metavar="TOTAL:LEN,LEN,...",
                   help="print the length-control bucket sequence and exit")
    p.add_argument("--lc-mode", choices=QUANTIZE_MODES, default="floor")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("align", parents=[common], help="project source pauses onto targets")
    p.add_argument("--src", help="pause-marked source file")
    p.add_argument("--timed", help="timed source JSONL (duration proportions)")
    p.add_argument("--tgt", required=True, help="plain target file")
    p.add_argument("--out", required=True)
    p.add_argument("--cost", choices=COSTS, default="l1")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("synth", parents=[common], help="synthesize pause-annotated bitext")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--annotated", help="pause-marked file to fit phrase lengths on")
    g.add_argument("--dist", help="histogram JSON from --dump-dist")
    p.add_argument("--dump-dist", help="write the fitted histogram JSON here")
    p.add_argument("--src", help="raw source sentences")
    p.add_argument("--tgt", help="raw target sentences")
    p.add_argument("--seed", type=_number(int, 0, 2**64 - 1))
    p.add_argument("--out", help="output prefix for .src/.tgt/.rejects")
    p.add_argument("--cost", choices=COSTS, default="l1")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("dub", parents=[common], help="build dubbing plans and smoothness")
    p.add_argument("--timed", required=True, help="timed source JSONL")
    p.add_argument("--hyp", required=True, help="pause-marked target file")
    p.add_argument("--out", required=True, help="plan JSONL")
    p.add_argument("--relax", action="store_true")
    p.add_argument("--min-pause", type=_number(float, 0), default=MIN_PAUSE)
    p.add_argument("--max-iters", type=_number(int, 0), default=100)
    p.add_argument("--tau", type=_number(float, 0), default=SMOOTHNESS_TAU)
    p.set_defaults(func=cmd_dub)
    return ap


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FileFormatError as exc:
        lines = _problems(exc)
    except DataError as exc:
        lines = exc.lines
    except (IsomtError, LengthMismatch) as exc:
        lines = [str(exc)]
    except OSError as exc:
        lines = [f"{exc.filename or ''}: {exc.strerror or exc}"]
    for line in lines:
        print(line, file=sys.stderr)
    return 1


def main() -> None:
    sys.exit(run())

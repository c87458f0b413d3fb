"""Pause-marked sentences, timed segments, and the on-disk corpus formats.

A sentence is a list of phrases; the pauses between them are implicit. On
disk the pauses are written as a whitespace-delimited ``[pause]`` token::

    But [pause] whose side are you on

Timed source sentences are stored as JSON Lines, one record per sentence::

    {"id": "12", "segments": [{"text": "But", "start": 0.0, "end": 0.4}, ...]}
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (
    ContainsMarker,
    DuplicateId,
    EmptyLine,
    EmptyPhrase,
    FileFormatError,
    InvalidTiming,
    LengthMismatch,
)

PAUSE_MARKER = "[pause]"
PAUSE_THRESHOLD = 0.3  # seconds of silence that make a pause

# Slack for float comparisons on timestamps; 0.7 - 0.4 is not >= 0.3 in IEEE.
TIME_EPS = 1e-9


def _marker_pattern(marker: str) -> re.Pattern[str]:
    # Literal marker, only when it stands alone as a whitespace-delimited token.
    return re.compile(r"(?<!\S)" + re.escape(marker) + r"(?!\S)")


_DEFAULT_PATTERN = _marker_pattern(PAUSE_MARKER)


def _pattern(marker: str) -> re.Pattern[str]:
    return _DEFAULT_PATTERN if marker == PAUSE_MARKER else _marker_pattern(marker)


@dataclass(frozen=True)
class PauseMarkedSentence:
    """An ordered, non-empty sequence of phrases separated by pauses."""

    phrases: tuple[str, ...]

    def __init__(self, phrases: Iterable[str]):
        cleaned = tuple(p.strip() for p in phrases)
        if not cleaned:
            raise EmptyPhrase("a sentence needs at least one phrase")
        for i, p in enumerate(cleaned):
            if not p:
                raise EmptyPhrase(f"phrase {i} is empty")
            if _DEFAULT_PATTERN.search(p):
                raise ContainsMarker(f"phrase {i} contains the pause marker: {p!r}")
        object.__setattr__(self, "phrases", cleaned)

    @property
    def num_pauses(self) -> int:
        return len(self.phrases) - 1

    def __len__(self) -> int:
        return len(self.phrases)

    def plain(self) -> str:
        """The sentence without pause markers, phrases joined by one space."""
        return " ".join(self.phrases)

    def char_lengths(self) -> list[int]:
        return [char_length(p) for p in self.phrases]


@dataclass(frozen=True)
class Segment:
    text: str
    start: float
    end: float

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class TimedSentence:
    """Phrases with absolute times in seconds; gaps between them are pauses.

    Every gap must be at least ``pause_threshold``: shorter gaps are not
    pauses and should have been merged by the caller (see
    :func:`segments_from_word_timings`).
    """

    segments: tuple[Segment, ...]
    pause_threshold: float = field(default=PAUSE_THRESHOLD, compare=False)

    def __init__(self, segments: Iterable[Segment | tuple[str, float, float]],
                 pause_threshold: float = PAUSE_THRESHOLD):
        segs = tuple(s if isinstance(s, Segment) else Segment(*s) for s in segments)
        if not segs:
            raise InvalidTiming("a timed sentence needs at least one segment")
        for i, s in enumerate(segs):
            if not s.text.strip():
                raise InvalidTiming(f"segment {i} has empty text")
            if not s.end > s.start:
                raise InvalidTiming(f"segment {i} ends at {s.end} before it starts at {s.start}")
        for i in range(len(segs) - 1):
            gap = segs[i + 1].start - segs[i].end
            if gap < 0:
                raise InvalidTiming(f"segments {i} and {i + 1} overlap")
            if gap < pause_threshold - TIME_EPS:
                raise InvalidTiming(
                    f"gap of {gap:.3f}s between segments {i} and {i + 1} "
                    f"is below the pause threshold {pause_threshold}s")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "pause_threshold", pause_threshold)

    @property
    def texts(self) -> list[str]:
        return [s.text for s in self.segments]

    @property
    def durations(self) -> list[float]:
        return [s.duration for s in self.segments]

    @property
    def pauses(self) -> list[float]:
        return [b.start - a.end for a, b in zip(self.segments, self.segments[1:])]

    def __len__(self) -> int:
        return len(self.segments)


@dataclass(frozen=True)
class BitextPair:
    id: str
    source: PauseMarkedSentence
    target: PauseMarkedSentence
    source_timing: TimedSentence | None = None

    def __post_init__(self):
        t = self.source_timing
        if t is None:
            return
        if len(t) != len(self.source):
            raise InvalidTiming(
                f"pair {self.id}: {len(t)} timed segments for {len(self.source)} source phrases")
        for i, (seg, phrase) in enumerate(zip(t.segments, self.source.phrases)):
            if seg.text.strip() != phrase:
                raise InvalidTiming(
                    f"pair {self.id}: segment {i} text {seg.text!r} != source phrase {phrase!r}")


@dataclass(frozen=True)
class Corpus:
    pairs: tuple[BitextPair, ...]

    def __init__(self, pairs: Iterable[BitextPair]):
        pairs = tuple(pairs)
        seen: set[str] = set()
        for p in pairs:
            if p.id in seen:
                raise DuplicateId(f"duplicate pair id {p.id!r}")
            seen.add(p.id)
        object.__setattr__(self, "pairs", pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    @property
    def sources(self) -> list[PauseMarkedSentence]:
        return [p.source for p in self.pairs]

    @property
    def targets(self) -> list[PauseMarkedSentence]:
        return [p.target for p in self.pairs]

    @classmethod
    def from_sentences(cls, sources: Sequence[PauseMarkedSentence],
                       targets: Sequence[PauseMarkedSentence],
                       ids: Sequence[str] | None = None,
                       timings: Sequence[TimedSentence] | None = None) -> "Corpus":
        """Zip parallel sentence lists; ids default to 1-based line numbers."""
        if len(sources) != len(targets):
            raise LengthMismatch(f"{len(sources)} sources vs {len(targets)} targets")
        if ids is None:
            ids = [str(i + 1) for i in range(len(sources))]
        if timings is not None and len(timings) != len(sources):
            raise LengthMismatch(f"{len(timings)} timings vs {len(sources)} sources")
        return cls(
            BitextPair(id=i, source=s, target=t,
                       source_timing=None if timings is None else timings[k])
            for k, (i, s, t) in enumerate(zip(ids, sources, targets)))


def parse_pause_marked(line: str, marker: str = PAUSE_MARKER) -> PauseMarkedSentence:
    """Split ``line`` at every standalone ``marker`` token.

    >>> parse_pause_marked("But [pause] whose side are you on").phrases
    ('But', 'whose side are you on')
    """
    if not line.strip():
        raise EmptyLine("line is empty")
    pieces = [p.strip() for p in _pattern(marker).split(line)]
    for i, p in enumerate(pieces):
        if not p:
            where = "start" if i == 0 else "end" if i == len(pieces) - 1 else "middle"
            raise EmptyPhrase(f"empty phrase at the {where} of the line (stray {marker!r})")
    if marker != PAUSE_MARKER:
        for p in pieces:
            if _DEFAULT_PATTERN.search(p):
                raise ContainsMarker(f"phrase contains {PAUSE_MARKER!r}: {p!r}")
    return PauseMarkedSentence(pieces)


def serialize(sentence: PauseMarkedSentence, marker: str = PAUSE_MARKER) -> str:
    return f" {marker} ".join(sentence.phrases)


def char_length(phrase: str) -> int:
    """Number of Unicode scalar values in ``phrase``, spaces included."""
    return len(phrase)


def segments_from_word_timings(words: Sequence[tuple[str, float, float]],
                               pause_threshold: float = PAUSE_THRESHOLD) -> TimedSentence:
    """Merge word timings into phrases split at silences >= ``pause_threshold``."""
    if not words:
        raise InvalidTiming("no words")
    groups: list[list[tuple[str, float, float]]] = []
    prev_end = None
    for i, (text, start, end) in enumerate(words):
        if not end > start:
            raise InvalidTiming(f"word {i} ({text!r}) has end {end} <= start {start}")
        if not text.strip():
            raise InvalidTiming(f"word {i} has empty text")
        if prev_end is not None and start < prev_end:
            raise InvalidTiming(f"word {i} ({text!r}) starts at {start} before previous end {prev_end}")
        if prev_end is None or start - prev_end >= pause_threshold - TIME_EPS:
            groups.append([])
        groups[-1].append((text.strip(), start, end))
        prev_end = end
    return TimedSentence(
        [Segment(" ".join(w[0] for w in g), g[0][1], g[-1][2]) for g in groups],
        pause_threshold=pause_threshold)


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------


def read_lines(path: str | os.PathLike) -> list[str]:
    """Read a UTF-8, LF-separated text file; a final newline is optional."""
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = raw[:exc.start].count(b"\n") + 1
        raise FileFormatError(str(path), [(line, f"invalid UTF-8: {exc.reason}")]) from None
    if not text:
        return []
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    return lines


def read_pause_marked(path: str | os.PathLike, marker: str = PAUSE_MARKER) -> list[PauseMarkedSentence]:
    """Parse every line of a pause-marked file, collecting all bad lines."""
    out = []
    problems: list[tuple[int | str, str]] = []
    for lineno, line in enumerate(read_lines(path), start=1):
        try:
            out.append(parse_pause_marked(line, marker))
        except (EmptyLine, EmptyPhrase, ContainsMarker) as exc:
            problems.append((lineno, str(exc)))
    if problems:
        raise FileFormatError(str(path), problems)
    return out


def format_pause_marked(sentences: Iterable[PauseMarkedSentence], marker: str = PAUSE_MARKER) -> str:
    return "".join(serialize(s, marker) + "\n" for s in sentences)


def parse_timed_record(line: str, pause_threshold: float = PAUSE_THRESHOLD) -> tuple[str, TimedSentence]:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise InvalidTiming(f"not valid JSON: {exc.msg}") from None
    if not isinstance(rec, dict):
        raise InvalidTiming("record must be a JSON object")
    rid = rec.get("id")
    if not isinstance(rid, str) or not rid:
        raise InvalidTiming("record needs a non-empty string 'id'")
    segs = rec.get("segments")
    if not isinstance(segs, list):
        raise InvalidTiming(f"record {rid}: 'segments' must be a list")
    parsed = []
    for k, s in enumerate(segs):
        if not isinstance(s, dict):
            raise InvalidTiming(f"record {rid}: segment {k} must be an object")
        text, start, end = s.get("text"), s.get("start"), s.get("end")
        if not isinstance(text, str):
            raise InvalidTiming(f"record {rid}: segment {k} needs string 'text'")
        for name, v in (("start", start), ("end", end)):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise InvalidTiming(f"record {rid}: segment {k} needs numeric '{name}'")
        parsed.append(Segment(text.strip(), float(start), float(end)))
    try:
        return rid, TimedSentence(parsed, pause_threshold)
    except InvalidTiming as exc:
        raise InvalidTiming(f"record {rid}: {exc}") from None


def read_timed_jsonl(path: str | os.PathLike,
                     pause_threshold: float = PAUSE_THRESHOLD) -> list[tuple[str, TimedSentence]]:
    out = []
    problems: list[tuple[int | str, str]] = []
    seen: set[str] = set()
    for lineno, line in enumerate(read_lines(path), start=1):
        if not line.strip():
            problems.append((lineno, "blank line"))
            continue
        try:
            rid, ts = parse_timed_record(line, pause_threshold)
        except InvalidTiming as exc:
            problems.append((lineno, str(exc)))
            continue
        if rid in seen:
            problems.append((lineno, f"duplicate id {rid!r}"))
            continue
        seen.add(rid)
        out.append((rid, ts))
    if problems:
        raise FileFormatError(str(path), problems)
    return out


def timed_record(rid: str, ts: TimedSentence) -> str:
    return json.dumps(
        {"id": rid,
         "segments": [{"text": s.text, "start": s.start, "end": s.end} for s in ts.segments]},
        ensure_ascii=False)

"""Dubbing-side timing: speaking rates, smoothness, and pause relaxation.

A dubbing plan places each target phrase in the time slot of the matching
source phrase. Its speaking rate is characters per second of the slot.
Smoothness is the share of adjacent phrase pairs whose rates differ by at
most ``tau`` relative to the earlier phrase:

    |r[i+1] / r[i] - 1| <= tau

Relaxation lends pause time to the faster of two neighbouring phrases to
even out rates. A move is only accepted when the sorted list of adjacent
rate deviations gets elementwise no larger, which keeps smoothness from
dropping for every choice of ``tau``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import CountMismatch, InvalidPlan, ZeroDuration
from .textmodel import TIME_EPS, PauseMarkedSentence, TimedSentence, char_length

SMOOTHNESS_TAU = 0.2
MIN_PAUSE = 0.3

_DEV_EPS = 1e-12


@dataclass(frozen=True)
class PlanItem:
    text: str
    start: float
    end: float

    @property
    def duration(self) -> float:
        return self.end - self.start

    @property
    def rate(self) -> float:
        """Characters per second."""
        d = self.duration
        if d <= 0:
            raise ZeroDuration(f"item {self.text!r} has duration {d}")
        return char_length(self.text) / d


@dataclass(frozen=True)
class DubbingPlan:
    items: tuple[PlanItem, ...]

    def __init__(self, items: Iterable[PlanItem | tuple[str, float, float]]):
        its = tuple(i if isinstance(i, PlanItem) else PlanItem(*i) for i in items)
        if not its:
            raise InvalidPlan("plan has no items")
        for k, it in enumerate(its):
            if not it.text.strip():
                raise InvalidPlan(f"item {k} has no text")
            if not (math.isfinite(it.start) and math.isfinite(it.end)) or not it.end > it.start:
                raise InvalidPlan(f"item {k} has end {it.end} <= start {it.start}")
        for k in range(len(its) - 1):
            if its[k + 1].start < its[k].end:
                raise InvalidPlan(f"items {k} and {k + 1} overlap")
        object.__setattr__(self, "items", its)

    def __len__(self) -> int:
        return len(self.items)

    @property
    def rates(self) -> list[float]:
        return [it.rate for it in self.items]

    @property
    def pauses(self) -> list[float]:
        return [b.start - a.end for a, b in zip(self.items, self.items[1:])]

    @property
    def span(self) -> tuple[float, float]:
        return self.items[0].start, self.items[-1].end

    def to_record(self, rid: str) -> dict:
        return {"id": rid,
                "items": [{"text": it.text, "start": it.start, "end": it.end, "rate": it.rate}
                          for it in self.items]}

    def to_json(self, rid: str) -> str:
        return json.dumps(self.to_record(rid), ensure_ascii=False)


def build_plan(source_timing: TimedSentence, target: PauseMarkedSentence) -> DubbingPlan:
    """Give each target phrase the slot of the corresponding source segment."""
    if len(source_timing) != len(target):
        raise CountMismatch(
            f"{len(target)} target phrases for {len(source_timing)} source segments")
    return DubbingPlan(PlanItem(text, seg.start, seg.end)
                       for text, seg in zip(target.phrases, source_timing.segments))


def rate_deviation(prev_rate: float, next_rate: float) -> float:
    return abs(next_rate / prev_rate - 1.0)


def deviations(plan: DubbingPlan) -> list[float]:
    r = plan.rates
    return [rate_deviation(a, b) for a, b in zip(r, r[1:])]


def smooth_pair_counts(plans: Sequence[DubbingPlan], tau: float = SMOOTHNESS_TAU) -> tuple[int, int]:
    """(smooth pairs, total pairs) over all plans."""
    good = total = 0
    for plan in plans:
        for it in plan.items:
            if it.duration <= 0:
                raise ZeroDuration(f"item {it.text!r} has duration {it.duration}")
        for d in deviations(plan):
            total += 1
            good += d <= tau + _DEV_EPS
    return good, total


def smoothness(plans: Sequence[DubbingPlan], tau: float = SMOOTHNESS_TAU) -> float:
    """Percentage of adjacent phrase pairs with rate deviation <= ``tau``.

    Plans with a single item contribute no pairs; with no pairs at all the
    result is 100.
    """
    if not plans:
        raise InvalidPlan("no plans to score")
    good, total = smooth_pair_counts(plans, tau)
    return 100.0 if total == 0 else 100.0 * good / total


def _dominates(new: list[float], old: list[float]) -> bool:
    """Sorted ``new`` is elementwise <= sorted ``old`` and strictly better somewhere."""
    a, b = sorted(new), sorted(old)
    if any(x > y for x, y in zip(a, b)):
        return False
    return any(y - x > _DEV_EPS for x, y in zip(a, b))


def _candidate_shifts(items: list[PlanItem], q: int, slack: float) -> list[float]:
    dur = items[q].duration
    chars = char_length(items[q].text)
    base = {slack}
    for m in (q - 1, q + 1):
        if 0 <= m < len(items):
            delta = chars / items[m].rate - dur  # makes q as slow as m
            if delta > 0:
                base.add(min(delta, slack))
    out = set()
    for d in base:
        for k in range(5):
            out.add(d / 2**k)
    return sorted(out, reverse=True)


def _shifted(items: list[PlanItem], p: int, q: int, delta: float, min_pause: float) -> PlanItem | None:
    """Item ``q`` extended by ``delta`` into pause ``p``, never leaving less than min_pause."""
    left, right = items[p], items[p + 1]
    if q == p:
        end = min(left.end + delta, right.start - min_pause)
        while right.start - end < min_pause:
            end = math.nextafter(end, -math.inf)
        return PlanItem(left.text, left.start, end) if end > left.end else None
    start = max(right.start - delta, left.end + min_pause)
    while start - left.end < min_pause:
        start = math.nextafter(start, math.inf)
    return PlanItem(right.text, start, right.end) if start < right.start else None


def relax(plan: DubbingPlan, min_pause: float = MIN_PAUSE, max_iters: int = 100) -> DubbingPlan:
    """Shorten pauses (down to ``min_pause``) to even out speaking rates.

    Each iteration considers every pause with slack and hands some of it to
    the faster adjacent phrase, trying the amount that would match that
    phrase's rate to either neighbour, all of the slack, and halvings of
    those. The move whose sorted deviations are smallest (largest first) is
    applied, provided it dominates the current deviations. The first start
    and last end never move.
    """
    if min_pause < 0:
        raise InvalidPlan(f"min_pause must be >= 0, got {min_pause}")
    for k, g in enumerate(plan.pauses):
        if g < min_pause - TIME_EPS:
            raise InvalidPlan(f"pause {k} is {g:.6f}s, below min_pause {min_pause}s")
    items = list(plan.items)
    if len(items) < 2:
        return plan
    devs = deviations(plan)
    for _ in range(max_iters):
        best = None
        for p in range(len(items) - 1):
            slack = items[p + 1].start - items[p].end - min_pause
            if slack <= 0:
                continue
            q = p if items[p].rate > items[p + 1].rate else p + 1
            for delta in _candidate_shifts(items, q, slack):
                moved = _shifted(items, p, q, delta, min_pause)
                if moved is None:
                    continue
                trial = items.copy()
                trial[q] = moved
                r = [it.rate for it in trial]
                new = [rate_deviation(a, b) for a, b in zip(r, r[1:])]
                if not _dominates(new, devs):
                    continue
                key = sorted(new, reverse=True)
                if best is None or key < best[0]:
                    best = (key, trial, new)
        if best is None:
            break
        _, items, devs = best
    return DubbingPlan(items)

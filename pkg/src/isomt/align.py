"""Pause projection: split a target sentence into N phrases sized like the source.

Given source phrase proportions p_1..p_N (character shares, or duration
shares when source timing is known) the target is cut at token boundaries
into phrases with character counts c_1..c_N minimising

    L1:  sum_i |c_i / C - p_i|        L2:  sum_i (c_i / C - p_i) ** 2

where C = sum_i c_i. :func:`project_pauses` solves this by dynamic
programming; :func:`brute_force_project` enumerates every split and serves
as its test oracle. Ties go to the lexicographically smallest breakpoint
vector.

The DP scores candidates with exact integers (floats are dyadic rationals,
so every term can be put over one common denominator); comparisons and
tie-breaks therefore never depend on summation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .errors import LengthMismatch, OutOfRange, TooFewTokens, TooLarge, ZeroTotal
from .textmodel import PauseMarkedSentence, TimedSentence, char_length

COSTS = ("l1", "l2")
BRUTE_FORCE_LIMIT = 10**6


@dataclass(frozen=True)
class Segmentation:
    """Break after token ``b`` for every ``b`` in ``breakpoints`` (1-based counts)."""

    breakpoints: tuple[int, ...]
    cost: float

    def phrases(self, tokens: Sequence[str]) -> list[str]:
        bounds = (0, *self.breakpoints, len(tokens))
        return [" ".join(tokens[a:b]) for a, b in zip(bounds, bounds[1:])]


def check_proportions(proportions: Sequence[float]) -> None:
    if not proportions:
        raise OutOfRange("need at least one proportion")
    for p in proportions:
        if not (math.isfinite(p) and p > 0):
            raise OutOfRange(f"proportions must be positive and finite, got {p}")
    if abs(math.fsum(proportions) - 1.0) >= 1e-9:
        raise OutOfRange(f"proportions sum to {math.fsum(proportions)}, not 1")


def proportions_from_lengths(lengths: Sequence[float]) -> list[float]:
    total = math.fsum(lengths)
    if total <= 0:
        raise ZeroTotal("lengths sum to zero")
    return [x / total for x in lengths]


def source_proportions(source: PauseMarkedSentence, timing: TimedSentence | None = None) -> list[float]:
    """Duration shares when timing is given, character shares otherwise."""
    if timing is not None:
        return proportions_from_lengths(timing.durations)
    return proportions_from_lengths(source.char_lengths())


def _check_cost(cost: str) -> None:
    if cost not in COSTS:
        raise ValueError(f"unknown cost {cost!r}; expected one of {COSTS}")


def segmentation_cost(phrase_char_lengths: Sequence[int], proportions: Sequence[float],
                      cost: str = "l1") -> float:
    """Deviation of the phrase character shares from ``proportions``.

    >>> round(segmentation_cost([2, 5], [0.3, 0.7]), 4)
    0.0286
    """
    _check_cost(cost)
    if len(phrase_char_lengths) != len(proportions):
        raise LengthMismatch(f"{len(phrase_char_lengths)} lengths for {len(proportions)} proportions")
    total = sum(phrase_char_lengths)
    if total <= 0:
        raise ZeroTotal("phrases have no characters")
    dev = [Fraction(c, total) - Fraction(p) for c, p in zip(phrase_char_lengths, proportions)]
    exact = sum(abs(d) for d in dev) if cost == "l1" else sum(d * d for d in dev)
    return float(exact)


def _tokens_for(target_text: str, n: int) -> list[str]:
    tokens = target_text.split()
    if len(tokens) < n:
        raise TooFewTokens(f"{len(tokens)} tokens cannot form {n} non-empty phrases")
    return tokens


def project_pauses(target_text: str, proportions: Sequence[float], n: int | None = None,
                   cost: str = "l1") -> tuple[Segmentation, PauseMarkedSentence]:
    """Cut ``target_text`` into ``len(proportions)`` phrases at minimum cost."""
    check_proportions(proportions)
    _check_cost(cost)
    N = len(proportions)
    if n is not None and n != N:
        raise LengthMismatch(f"n={n} but {N} proportions given")
    tokens = _tokens_for(target_text, N)
    T = len(tokens)
    prefix = [0]
    for tok in tokens:
        prefix.append(prefix[-1] + char_length(tok))
    C = prefix[T] + T - N  # joining spaces inside phrases

    # p_k = P[k] / D exactly; a phrase of c chars deviates by (c*D - P[k]*C) / (C*D).
    fracs = [Fraction(p) for p in proportions]
    D = max(f.denominator for f in fracs)
    P = [f.numerator * (D // f.denominator) for f in fracs]

    def term(k: int, i: int, j: int) -> int:
        d = (prefix[j] - prefix[i] + j - i - 1) * D - P[k] * C
        return abs(d) if cost == "l1" else d * d

    # best[k][i]: optimal cost of phrases k..N-1 over tokens i..T-1.
    best: list[list[int | None]] = [[None] * (T + 1) for _ in range(N)]
    choice = [[0] * (T + 1) for _ in range(N)]
    for i in range(N - 1, T):
        best[N - 1][i] = term(N - 1, i, T)
    for k in range(N - 2, -1, -1):
        for i in range(k, T - (N - 1 - k)):
            top, arg = None, 0
            for j in range(i + 1, T - (N - 2 - k)):
                v = term(k, i, j) + best[k + 1][j]
                if top is None or v < top:  # strict: earliest j wins ties
                    top, arg = v, j
            best[k][i], choice[k][i] = top, arg

    breaks, i = [], 0
    for k in range(N - 1):
        i = choice[k][i]
        breaks.append(i)
    denom = C * D if cost == "l1" else (C * D) ** 2
    seg = Segmentation(tuple(breaks), best[0][0] / denom)
    return seg, PauseMarkedSentence(seg.phrases(tokens))


def brute_force_project(target_text: str, proportions: Sequence[float], n: int | None = None,
                        cost: str = "l1") -> Segmentation:
    """Exhaustive search over every breakpoint vector (test oracle)."""
    check_proportions(proportions)
    N = len(proportions)
    if n is not None and n != N:
        raise LengthMismatch(f"n={n} but {N} proportions given")
    tokens = _tokens_for(target_text, N)
    T = len(tokens)
    if math.comb(T - 1, N - 1) > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"C({T - 1}, {N - 1}) candidate splits exceeds {BRUTE_FORCE_LIMIT}")
    best_key, best_breaks = None, ()
    # combinations() yields in lexicographic order, so the first minimum wins ties.
    for breaks in combinations(range(1, T), N - 1):
        bounds = (0, *breaks, T)
        lengths = [len(" ".join(tokens[a:b])) for a, b in zip(bounds, bounds[1:])]
        total = sum(lengths)
        dev = [Fraction(c, total) - Fraction(p) for c, p in zip(lengths, proportions)]
        key = sum(abs(d) for d in dev) if cost == "l1" else sum(d * d for d in dev)
        if best_key is None or key < best_key:
            best_key, best_breaks = key, breaks
    return Segmentation(tuple(best_breaks), float(best_key))

"""Length-control arithmetic for phrase-level verbosity control.

A decoder tracks how many characters of the current phrase it has produced
against a budget (the reference phrase length in training, the source
phrase length at inference). The remaining-character ratio is quantized
into 11 buckets, 10 meaning "nothing generated yet", and generation of the
phrase stops once the ratio reaches exactly zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .errors import OutOfRange, ZeroTotal

NUM_BUCKETS = 11
QUANTIZE_MODES = ("floor", "round")

# Keeps ratios like 1 - 0.7 == 0.29999999999999993 in bucket 3.
_QUANT_EPS = 1e-9


@dataclass(frozen=True)
class LcState:
    total_chars: int
    generated_chars: int = 0

    def __post_init__(self):
        if self.total_chars < 1:
            raise ZeroTotal(f"total_chars must be >= 1, got {self.total_chars}")
        if self.generated_chars < 0:
            raise OutOfRange(f"generated_chars must be >= 0, got {self.generated_chars}")

    def advance(self, chars: int) -> "LcState":
        return LcState(self.total_chars, self.generated_chars + chars)


def remaining_ratio(state: LcState) -> float:
    """``1 - generated/total``, clamped at 0 when generation overshoots."""
    if state.total_chars < 1:
        raise ZeroTotal("total_chars must be >= 1")
    return max(0.0, 1.0 - state.generated_chars / state.total_chars)


def quantize_ratio(ratio: float, mode: str = "floor") -> int:
    """Map a ratio in [0, 1] to a bucket 0..10.

    ``floor`` uses buckets [k/10, (k+1)/10) with 1.0 in bucket 10;
    ``round`` rounds half up to the nearest tenth.
    """
    if mode not in QUANTIZE_MODES:
        raise ValueError(f"unknown quantize mode {mode!r}")
    if not (0.0 <= ratio <= 1.0):
        raise OutOfRange(f"ratio must lie in [0, 1], got {ratio}")
    offset = 0.5 if mode == "round" else 0.0
    return min(NUM_BUCKETS - 1, math.floor(ratio * 10 + offset + _QUANT_EPS))


def bucket(state: LcState, mode: str = "floor") -> int:
    """Bucket of ``state`` computed in exact integer arithmetic."""
    left = max(0, state.total_chars - state.generated_chars)
    num = 10 * left * 2 + (state.total_chars if mode == "round" else 0)
    return min(NUM_BUCKETS - 1, num // (2 * state.total_chars))


def should_stop(state: LcState) -> bool:
    return state.generated_chars >= state.total_chars


def bucket_trace(total_chars: int, step_lengths: Iterable[int], mode: str = "floor") -> list[int]:
    """Bucket before the first step and after each step, for decoder debugging.

    >>> bucket_trace(20, [5, 5, 5, 5])
    [10, 7, 5, 2, 0]
    """
    state = LcState(total_chars)
    trace = [bucket(state, mode)]
    for n in step_lengths:
        if n < 0:
            raise OutOfRange(f"step length must be >= 0, got {n}")
        state = state.advance(n)
        trace.append(bucket(state, mode))
    return trace

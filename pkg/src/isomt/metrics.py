"""Evaluation suite for pause-marked translations.

Corpus BLEU and ChrF measure translation quality; ChrF-Phrase applies ChrF
to order-wise aligned phrase pairs. Segmentation accuracy (SA) and PhraseLC
check the pause structure and per-phrase length compliance against the
source, and Acceptability combines ChrF-Phrase with PhraseLC.

All corpus-level scores are reduced from integer n-gram counts in corpus
order, so results are bit-identical however the per-sentence work is
scheduled.
"""

from __future__ import annotations

import json
import math
import unicodedata
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import zip_longest
from typing import Callable, Iterable, Sequence, Sized, TypeVar

from .errors import EmptyCorpus, LengthMismatch, OutOfRange
from .textmodel import Corpus, PauseMarkedSentence, char_length

BLEU_ORDER = 4
CHRF_ORDER = 6
CHRF_BETA = 2.0
PHRASE_LC_TOLERANCE = 0.10

T = TypeVar("T")
R = TypeVar("R")


@dataclass
class NgramStats:
    """Per-order n-gram bookkeeping.

    ``matches[k]``, ``hyp[k]`` and ``ref[k]`` count (k+1)-grams: clipped
    matches, hypothesis n-grams and reference n-grams. ``hyp_len`` and
    ``ref_len`` are token lengths, used by BLEU's brevity penalty only.
    """

    matches: list[int]
    hyp: list[int]
    ref: list[int]
    hyp_len: int = 0
    ref_len: int = 0

    @classmethod
    def zeros(cls, order: int) -> "NgramStats":
        return cls([0] * order, [0] * order, [0] * order)

    @property
    def order(self) -> int:
        return len(self.matches)

    def __add__(self, other: "NgramStats") -> "NgramStats":
        if other.order != self.order:
            raise ValueError("cannot add n-gram stats of different orders")
        return NgramStats(
            [a + b for a, b in zip(self.matches, other.matches)],
            [a + b for a, b in zip(self.hyp, other.hyp)],
            [a + b for a, b in zip(self.ref, other.ref)],
            self.hyp_len + other.hyp_len,
            self.ref_len + other.ref_len,
        )


def _count_matches(hyp: Sequence, ref: Sequence, n: int) -> tuple[int, int, int]:
    h = Counter([hyp[i:i + n] for i in range(len(hyp) - n + 1)])
    r = Counter([ref[i:i + n] for i in range(len(ref) - n + 1)])
    if len(h) > len(r):
        h, r = r, h
    m = sum(min(c, r[g]) for g, c in h.items() if g in r)
    return m, max(len(hyp) - n + 1, 0), max(len(ref) - n + 1, 0)


def _stats(hyp: Sequence, ref: Sequence, order: int) -> NgramStats:
    st = NgramStats.zeros(order)
    m = 1
    for n in range(1, order + 1):
        if m:
            m, h, r = _count_matches(hyp, ref, n)
        else:
            # No (n-1)-gram matched, so no n-gram can.
            h, r = max(len(hyp) - n + 1, 0), max(len(ref) - n + 1, 0)
        st.matches[n - 1], st.hyp[n - 1], st.ref[n - 1] = m, h, r
    st.hyp_len, st.ref_len = len(hyp), len(ref)
    return st


def _reduce(stats: Iterable[NgramStats], order: int) -> NgramStats:
    total = NgramStats.zeros(order)
    for s in stats:
        total = total + s
    return total


# ---------------------------------------------------------------------------
# BLEU
# ---------------------------------------------------------------------------

_PUNCT_CACHE: dict[str, bool] = {}


def _is_punct(ch: str) -> bool:
    v = _PUNCT_CACHE.get(ch)
    if v is None:
        v = _PUNCT_CACHE[ch] = unicodedata.category(ch).startswith("P")
    return v


def tokenize_bleu(text: str) -> list[str]:
    """Split Unicode punctuation (category P) off as tokens, then split on whitespace."""
    if text.isalnum():
        return [text]
    return "".join(f" {c} " if not c.isalnum() and _is_punct(c) else c for c in text).split()


def bleu_stats(hypothesis: str, reference: str, order: int = BLEU_ORDER) -> NgramStats:
    return _stats(tuple(tokenize_bleu(hypothesis)), tuple(tokenize_bleu(reference)), order)


def bleu_from_stats(st: NgramStats) -> float:
    """BLEU from pooled counts.

    Orders where neither side has any n-gram are left out of the geometric
    mean (so an all-short identity corpus still scores 100); any remaining
    order with zero matches gives 0.
    """
    logs = []
    for m, h, r in zip(st.matches, st.hyp, st.ref):
        if h == 0 and r == 0:
            continue
        if m == 0:
            return 0.0
        logs.append(math.log(m / h))
    if not logs:
        return 100.0
    c, r = st.hyp_len, st.ref_len
    bp = 1.0 if c >= r else math.exp(1.0 - r / c)
    return 100.0 * bp * math.exp(sum(logs) / len(logs))


def _check_aligned(a: Sized, b: Sized, what: str = "hypotheses") -> None:
    if len(a) != len(b):
        raise LengthMismatch(f"{len(a)} {what} for {len(b)} references")
    if not a:
        raise EmptyCorpus("nothing to score")


def corpus_bleu(hypotheses: Sequence[str], references: Sequence[str]) -> float:
    _check_aligned(hypotheses, references)
    return bleu_from_stats(_reduce((bleu_stats(h, r) for h, r in zip(hypotheses, references)),
                                   BLEU_ORDER))


# ---------------------------------------------------------------------------
# ChrF
# ---------------------------------------------------------------------------


def _strip_ws(text: str) -> str:
    return "".join(text.split())


def chrf_stats(hypothesis: str, reference: str, max_order: int = CHRF_ORDER) -> NgramStats:
    return _stats(_strip_ws(hypothesis), _strip_ws(reference), max_order)


def chrf_from_stats(st: NgramStats, beta: float = CHRF_BETA) -> float:
    """F-beta over order-averaged character n-gram precision and recall.

    An order contributes only when both sides have n-grams of that length.
    With no contributing order the score is 100 if both sides are empty and
    0 otherwise.
    """
    precs, recs = [], []
    for m, h, r in zip(st.matches, st.hyp, st.ref):
        if h == 0 or r == 0:
            continue
        precs.append(m / h)
        recs.append(m / r)
    if not precs:
        return 100.0 if st.hyp[0] == 0 and st.ref[0] == 0 else 0.0
    p = sum(precs) / len(precs)
    r = sum(recs) / len(recs)
    b2 = beta * beta
    denom = b2 * p + r
    if denom == 0:
        return 0.0
    return 100.0 * (1 + b2) * p * r / denom


def chrf(hypothesis: str, reference: str, max_order: int = CHRF_ORDER,
         beta: float = CHRF_BETA) -> float:
    return chrf_from_stats(chrf_stats(hypothesis, reference, max_order), beta)


def phrase_pairs(hypothesis: PauseMarkedSentence, reference: PauseMarkedSentence) -> list[tuple[str, str]]:
    """Order-wise phrase pairs; surplus phrases on either side meet ``""``."""
    return list(zip_longest(hypothesis.phrases, reference.phrases, fillvalue=""))


def _pair_chrf_stats(hyp: PauseMarkedSentence, ref: PauseMarkedSentence, max_order: int) -> NgramStats:
    return _reduce((chrf_stats(h, r, max_order) for h, r in phrase_pairs(hyp, ref)), max_order)


def chrf_phrase(corpus: Corpus, hypotheses: Sequence[PauseMarkedSentence],
                max_order: int = CHRF_ORDER, beta: float = CHRF_BETA,
                macro: bool = False) -> float:
    """ChrF over aligned phrase pairs of the whole corpus.

    By default n-gram counts are pooled over every phrase pair and one score
    is computed (micro). ``macro=True`` averages per-phrase-pair scores.
    """
    _check_aligned(hypotheses, corpus.pairs)
    if macro:
        scores = [chrf(h, r, max_order, beta)
                  for hyp, pair in zip(hypotheses, corpus.pairs)
                  for h, r in phrase_pairs(hyp, pair.target)]
        return sum(scores) / len(scores)
    st = _reduce((_pair_chrf_stats(h, p.target, max_order) for h, p in zip(hypotheses, corpus.pairs)),
                 max_order)
    return chrf_from_stats(st, beta)


# ---------------------------------------------------------------------------
# Structure and length compliance
# ---------------------------------------------------------------------------


def _segments_match(hyp: PauseMarkedSentence, src: PauseMarkedSentence) -> bool:
    return len(hyp) == len(src)


def _tolerance_bounds(tolerance: float) -> tuple[Fraction, Fraction]:
    # Decimal reading of the float so 0.1 means exactly one tenth.
    t = Fraction(repr(float(tolerance)))
    return 1 - t, 1 + t


def phrase_compliant(hyp: PauseMarkedSentence, src: PauseMarkedSentence,
                     tolerance: float = PHRASE_LC_TOLERANCE) -> bool:
    """True when phrase counts agree and every phrase length is within tolerance."""
    if not _segments_match(hyp, src):
        return False
    lo, hi = _tolerance_bounds(tolerance)
    for h, s in zip(hyp.phrases, src.phrases):
        L, n = char_length(s), char_length(h)
        if not lo * L <= n <= hi * L:
            return False
    return True


def segmentation_accuracy(corpus: Corpus, hypotheses: Sequence[PauseMarkedSentence]) -> float:
    _check_aligned(hypotheses, corpus.pairs)
    hits = sum(_segments_match(h, p.source) for h, p in zip(hypotheses, corpus.pairs))
    return 100.0 * hits / len(hypotheses)


def phrase_lc(corpus: Corpus, hypotheses: Sequence[PauseMarkedSentence],
              tolerance: float = PHRASE_LC_TOLERANCE) -> float:
    _check_aligned(hypotheses, corpus.pairs)
    if not 0 <= tolerance:
        raise OutOfRange(f"tolerance must be >= 0, got {tolerance}")
    hits = sum(phrase_compliant(h, p.source, tolerance) for h, p in zip(hypotheses, corpus.pairs))
    return 100.0 * hits / len(hypotheses)


def acceptability(chrf_phrase: float, phrase_lc: float) -> float:
    """ChrF-Phrase times PhraseLC, on the 0-100 scale.

    >>> round(acceptability(59.5, 19.7), 1)
    11.7
    """
    for name, v in (("chrf_phrase", chrf_phrase), ("phrase_lc", phrase_lc)):
        if not 0.0 <= v <= 100.0:
            raise OutOfRange(f"{name} must lie in [0, 100], got {v}")
    # The product can exceed a factor by one ulp when the other is 100.
    return min(chrf_phrase * phrase_lc / 100.0, chrf_phrase, phrase_lc)


# ---------------------------------------------------------------------------
# Full report
# ---------------------------------------------------------------------------


@dataclass
class MetricReport:
    bleu: float
    chrf_phrase: float
    sa: float
    phrase_lc: float
    acceptability: float
    sentence_count: int
    smoothness: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "MetricReport":
        return cls(**{k: d.get(k) for k in cls.__dataclass_fields__})

    def summary(self) -> str:
        """One-decimal table, the way scores are usually reported."""
        rows = [("BLEU", self.bleu), ("ChrF-Phrase", self.chrf_phrase), ("SA", self.sa),
                ("PhraseLC", self.phrase_lc), ("Acceptability", self.acceptability)]
        if self.smoothness is not None:
            rows.append(("Smoothness", self.smoothness))
        lines = [f"{name:<14}{value:6.1f}" for name, value in rows]
        lines.append(f"{'Sentences':<14}{self.sentence_count:6d}")
        return "\n".join(lines)


@dataclass
class _PairResult:
    bleu: NgramStats
    chrf: NgramStats | None
    chrf_scores: list[float] = field(default_factory=list)
    seg_match: bool = False
    compliant: bool = False


def ordered_map(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> list[R]:
    """``map`` that keeps input order; runs on a thread pool when threads > 1."""
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (threads * 4))))


def evaluate(corpus: Corpus, hypotheses: Sequence[PauseMarkedSentence], *,
             tolerance: float = PHRASE_LC_TOLERANCE, chrf_order: int = CHRF_ORDER,
             chrf_beta: float = CHRF_BETA, macro_chrf: bool = False,
             smoothness: float | None = None, threads: int = 1) -> MetricReport:
    """Score ``hypotheses`` against the corpus targets (and sources, for SA/PhraseLC).

    BLEU is computed on marker-free sentences with phrases joined by one
    space. ``smoothness`` is passed through untouched; see
    :mod:`isomt.timing` for computing it.
    """
    _check_aligned(hypotheses, corpus.pairs)

    def work(k: int) -> _PairResult:
        hyp, pair = hypotheses[k], corpus.pairs[k]
        pairs = phrase_pairs(hyp, pair.target)
        if macro_chrf:
            cst, scores = None, [chrf(h, r, chrf_order, chrf_beta) for h, r in pairs]
        else:
            cst, scores = _reduce((chrf_stats(h, r, chrf_order) for h, r in pairs), chrf_order), []
        return _PairResult(
            bleu=bleu_stats(hyp.plain(), pair.target.plain()),
            chrf=cst,
            chrf_scores=scores,
            seg_match=_segments_match(hyp, pair.source),
            compliant=phrase_compliant(hyp, pair.source, tolerance),
        )

    results = ordered_map(work, range(len(hypotheses)), threads)

    bleu = bleu_from_stats(_reduce((r.bleu for r in results), BLEU_ORDER))
    if macro_chrf:
        scores = [s for r in results for s in r.chrf_scores]
        cp = sum(scores) / len(scores)
    else:
        cp = chrf_from_stats(_reduce((r.chrf for r in results), chrf_order), chrf_beta)
    n = len(results)
    sa = 100.0 * sum(r.seg_match for r in results) / n
    lc = 100.0 * sum(r.compliant for r in results) / n
    return MetricReport(bleu=bleu, chrf_phrase=cp, sa=sa, phrase_lc=lc,
                        acceptability=acceptability(cp, lc), sentence_count=n,
                        smoothness=smoothness)

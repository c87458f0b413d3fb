"""Synthetic pause annotation of parallel corpora.

Phrase lengths observed in a small annotated set are turned into a
histogram; pause structures are then sampled into raw source sentences
by drawing phrase lengths from it, and each target is segmented to match
with :func:`isomt.align.project_pauses`.

Randomness comes from numpy's PCG64 seeded through ``SeedSequence``, with
one independent stream per sentence index. Only raw 64-bit outputs are
consumed and mapped to bins with integer arithmetic, so a seed reproduces
the same corpus on every platform and numpy version.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .align import project_pauses, proportions_from_lengths
from .errors import ContainsMarker, EmptyInput, EmptyPhrase, LengthMismatch, OutOfRange, TooFewTokens
from .metrics import ordered_map
from .textmodel import PAUSE_MARKER, BitextPair, Corpus, PauseMarkedSentence, _pattern, char_length

RNG_ALGORITHM = "pcg64-seedsequence"
_U64 = 1 << 64


@dataclass(frozen=True)
class RngState:
    """Seed plus spawn path naming one reproducible random stream."""

    seed: int
    path: tuple[int, ...] = ()
    algorithm: str = field(default=RNG_ALGORITHM, init=False)

    def __post_init__(self):
        if not 0 <= self.seed < _U64:
            raise OutOfRange(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def spawn(self, index: int) -> "RngState":
        return RngState(self.seed, self.path + (index,))

    def bit_generator(self) -> np.random.PCG64:
        return np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=self.path))


def _uniform_below(bits: np.random.PCG64, n: int) -> int:
    """Unbiased integer in [0, n) from raw 64-bit draws (rejection sampling)."""
    limit = _U64 - (_U64 % n)
    while True:
        x = int(bits.random_raw())
        if x < limit:
            return x % n


@dataclass(frozen=True)
class PhraseLengthDistribution:
    """Histogram of phrase character lengths."""

    histogram: Mapping[int, int]
    total: int = field(init=False)

    def __post_init__(self):
        hist = {int(k): int(v) for k, v in sorted(self.histogram.items())}
        if any(k < 1 for k in hist):
            raise OutOfRange("phrase lengths must be >= 1")
        if any(v < 0 for v in hist.values()):
            raise OutOfRange("histogram counts must be >= 0")
        hist = {k: v for k, v in hist.items() if v > 0}
        if not hist:
            raise EmptyInput("histogram has no non-zero bin")
        object.__setattr__(self, "histogram", hist)
        object.__setattr__(self, "total", sum(hist.values()))
        object.__setattr__(self, "_lengths", list(hist))
        cum, acc = [], 0
        for v in hist.values():
            acc += v
            cum.append(acc)
        object.__setattr__(self, "_cumulative", cum)

    @property
    def min_length(self) -> int:
        return self._lengths[0]

    def probabilities(self) -> dict[int, float]:
        return {k: v / self.total for k, v in self.histogram.items()}

    def draw(self, bits: np.random.PCG64) -> int:
        u = _uniform_below(bits, self.total)
        return self._lengths[bisect.bisect_right(self._cumulative, u)]

    def sample(self, rng: RngState, n: int) -> list[int]:
        bits = rng.bit_generator()
        return [self.draw(bits) for _ in range(n)]

    def to_json(self) -> str:
        return json.dumps({"bins": {str(k): v for k, v in self.histogram.items()},
                           "total": self.total}, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "PhraseLengthDistribution":
        data = json.loads(text)
        dist = cls({int(k): v for k, v in data["bins"].items()})
        if "total" in data and data["total"] != dist.total:
            raise OutOfRange(f"total {data['total']} does not match bin sum {dist.total}")
        return dist


def fit_length_distribution(annotated: Iterable[PauseMarkedSentence]) -> PhraseLengthDistribution:
    hist: dict[int, int] = {}
    for sent in annotated:
        for phrase in sent.phrases:
            n = char_length(phrase)
            hist[n] = hist.get(n, 0) + 1
    if not hist:
        raise EmptyInput("no annotated sentences to fit")
    return PhraseLengthDistribution(hist)


def sample_pause_structure(raw_sentence: str, dist: PhraseLengthDistribution,
                           rng: RngState) -> PauseMarkedSentence:
    """Insert pauses into ``raw_sentence`` at sampled phrase lengths.

    Each phrase draws a target length L and ends at the token boundary whose
    phrase length is nearest to L (the shorter one on an exact tie). If the
    text left after a cut would be shorter than the smallest histogram bin
    it is kept in the current phrase instead. Whitespace in the input is
    normalised to single spaces.
    """
    if _pattern(PAUSE_MARKER).search(raw_sentence):
        raise ContainsMarker("raw sentence already contains pause markers")
    tokens = raw_sentence.split()
    if not tokens:
        raise EmptyPhrase("raw sentence is empty")
    bits = rng.bit_generator()
    lens = [char_length(t) for t in tokens]
    T = len(tokens)
    phrases = []
    start = 0
    while start < T:
        target = dist.draw(bits)
        end, length = start + 1, lens[start]
        # Extend while the next boundary is strictly closer to the target.
        while end < T and abs(length + 1 + lens[end] - target) < abs(length - target):
            length += 1 + lens[end]
            end += 1
        if end < T:
            rest = sum(lens[end:]) + (T - end - 1)
            if rest < dist.min_length:
                end = T
        phrases.append(" ".join(tokens[start:end]))
        start = end
    return PauseMarkedSentence(phrases)


@dataclass
class SynthResult:
    corpus: Corpus
    rejects: list[str]


def synthesize_corpus(sources: Sequence[str], targets: Sequence[str],
                      dist: PhraseLengthDistribution, rng: RngState,
                      ids: Sequence[str] | None = None, cost: str = "l1",
                      threads: int = 1) -> SynthResult:
    """Sample source pause structures and project them onto the targets.

    Pairs whose target has fewer tokens than the sampled phrase count are
    reported in ``rejects`` (by id) rather than emitted. Sentence ``k`` uses
    the stream ``rng.spawn(k)``, so output does not depend on ``threads``.
    """
    if len(sources) != len(targets):
        raise LengthMismatch(f"{len(sources)} sources vs {len(targets)} targets")
    if ids is None:
        ids = [str(k + 1) for k in range(len(sources))]
    elif len(ids) != len(sources):
        raise LengthMismatch(f"{len(ids)} ids for {len(sources)} sources")

    def work(k: int) -> BitextPair | None:
        src = sample_pause_structure(sources[k], dist, rng.spawn(k))
        try:
            _, tgt = project_pauses(targets[k], proportions_from_lengths(src.char_lengths()),
                                    cost=cost)
        except TooFewTokens:
            return None
        return BitextPair(id=ids[k], source=src, target=tgt)

    results = ordered_map(work, range(len(sources)), threads)
    rejects = [ids[k] for k, r in enumerate(results) if r is None]
    return SynthResult(Corpus(r for r in results if r is not None), rejects)

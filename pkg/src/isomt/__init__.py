"""Tooling for isochrony-aware machine translation.

Pause-marked bitext handling, pause projection, synthetic pause annotation,
the phrase-level evaluation suite, and dubbing timing analysis.
"""

__version__ = "0.1.0"

from .align import brute_force_project, project_pauses, segmentation_cost
from .errors import IsomtError
from .lc import LcState, quantize_ratio, remaining_ratio, should_stop
from .metrics import (
    MetricReport,
    acceptability,
    chrf,
    chrf_phrase,
    corpus_bleu,
    evaluate,
    phrase_lc,
    segmentation_accuracy,
)
from .synth import (
    PhraseLengthDistribution,
    RngState,
    fit_length_distribution,
    sample_pause_structure,
    synthesize_corpus,
)
from .textmodel import (
    BitextPair,
    Corpus,
    PauseMarkedSentence,
    TimedSentence,
    char_length,
    parse_pause_marked,
    segments_from_word_timings,
    serialize,
)
from .timing import DubbingPlan, build_plan, relax, smoothness

__all__ = [
    "BitextPair", "Corpus", "DubbingPlan", "IsomtError", "LcState", "MetricReport",
    "PauseMarkedSentence", "PhraseLengthDistribution", "RngState", "TimedSentence",
    "acceptability", "brute_force_project", "build_plan", "char_length", "chrf", "chrf_phrase",
    "corpus_bleu", "evaluate", "fit_length_distribution", "parse_pause_marked", "phrase_lc",
    "project_pauses", "quantize_ratio", "relax", "remaining_ratio", "sample_pause_structure",
    "segmentation_accuracy", "segmentation_cost", "segments_from_word_timings", "serialize",
    "should_stop", "smoothness", "synthesize_corpus",
]

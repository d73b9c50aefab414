"""Multi-span answer annotation, decoding and evaluation toolkit."""

__version__ = "0.1.0"

from .annotator import (
    PROFILES,
    AnnotatedExample,
    AnnotatorConfig,
    PackedSequence,
    Span,
    annotate,
    edit_distance,
    kmp_find,
    pack,
    prune,
    reconstruct,
    tokenize,
)
from .decoder import DecodedAnswer, SpanProbabilities, apply_conditional_mask, decode_spans, join_spans, span_nll
from .kernels import BACKEND
from .metrics import bleu1, mean_average_precision, mean_reciprocal_rank, normalize_eval_text, rouge_l
from .ranking import RankedCandidateSet, dynamic_sample, normalize_relevance, rank, ranker_nll
from .treebank import ParseTree, TreeParseError, dfs_subtrees, leaves, parse_bracketed, serialize

"""Answer-quality metrics (BLEU-1, ROUGE-L) and ranking metrics (MAP, MRR).

Text normalisation, applied to predictions and references alike:

    tokens = re.sub(r"([^\\w\\s])", r" \\1 ", text.lower()).split()

i.e. lowercase, isolate every character that is neither a word character
nor whitespace, then split on whitespace.
"""

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Optional

from . import kernels

_PUNCT_RE = re.compile(r"([^\w\s])")

ROUGE_BETA = 1.2


def normalize_eval_text(text):
    return _PUNCT_RE.sub(r" \1 ", text.lower()).split()


@dataclass
class EvalReport:
    bleu1: float
    rouge_l: float
    n_examples: int
    per_example: Optional[list] = None

    def to_dict(self, digits=4):
        d = {
            "bleu1": round(self.bleu1, digits),
            "rouge_l": round(self.rouge_l, digits),
            "n_examples": self.n_examples,
        }
        if self.per_example is not None:
            d["per_example"] = [[eid, round(v, digits)] for eid, v in self.per_example]
        return d


@dataclass
class RankingReport:
    map: float
    mrr: float
    n_queries: int

    def to_dict(self, digits=4):
        return {"map": round(self.map, digits), "mrr": round(self.mrr, digits), "n_queries": self.n_queries}


def bleu1(pairs):
    """Corpus BLEU-1 over ``(candidate, [reference, ...])`` pairs.

    Clipped unigram precision times the brevity penalty; the effective
    reference length is the closest reference length per example (shorter
    wins a tie).
    """
    if not pairs:
        raise ValueError("empty candidate corpus")
    matched = cand_len = ref_len = 0
    for candidate, references in pairs:
        if not references:
            raise ValueError("every candidate needs at least one reference")
        cand = normalize_eval_text(candidate)
        refs = [normalize_eval_text(r) for r in references]
        max_ref = Counter()
        for ref in refs:
            max_ref |= Counter(ref)
        counts = Counter(cand)
        matched += sum(min(c, max_ref[tok]) for tok, c in counts.items())
        cand_len += len(cand)
        ref_len += min((abs(len(r) - len(cand)), len(r)) for r in refs)[1]
    if cand_len == 0 or matched == 0:
        return 0.0
    bp = 1.0 if cand_len >= ref_len else math.exp(1.0 - ref_len / cand_len)
    return bp * matched / cand_len


def lcs(a, b):
    """Longest common subsequence length of two token lists."""
    vocab = {}
    return kernels.lcs_length(kernels.encode(a, vocab), kernels.encode(b, vocab))


def rouge_l(candidate, reference, beta=ROUGE_BETA):
    cand = normalize_eval_text(candidate)
    ref = normalize_eval_text(reference)
    if not cand or not ref:
        return 0.0
    m = lcs(cand, ref)
    if m == 0:
        return 0.0
    p = m / len(cand)
    r = m / len(ref)
    return (1 + beta**2) * p * r / (r + beta**2 * p)


def rouge_l_multi(candidate, references, beta=ROUGE_BETA):
    return max((rouge_l(candidate, ref, beta) for ref in references), default=0.0)


def evaluate(examples, beta=ROUGE_BETA, per_example=False):
    """``examples``: iterable of ``(example_id, candidate, [references])``."""
    examples = list(examples)
    if not examples:
        raise ValueError("no examples to evaluate")
    scores = [(eid, rouge_l_multi(cand, refs, beta)) for eid, cand, refs in examples]
    return EvalReport(
        bleu1=bleu1([(cand, refs) for _, cand, refs in examples]),
        rouge_l=math.fsum(s for _, s in scores) / len(scores),
        n_examples=len(examples),
        per_example=scores if per_example else None,
    )


def _check(rankings):
    rankings = list(rankings)
    if not rankings:
        raise ValueError("no queries")
    for _, relevant in rankings:
        if not relevant:
            raise ValueError("every query needs at least one relevant id")
    return rankings


def average_precision(ranking, relevant):
    relevant = set(relevant)
    hits = 0
    total = 0.0
    for i, pid in enumerate(ranking, 1):
        if pid in relevant:
            hits += 1
            total += hits / i
    return total / len(relevant)


def mean_average_precision(rankings):
    rankings = _check(rankings)
    return math.fsum(average_precision(r, rel) for r, rel in rankings) / len(rankings)


def reciprocal_rank(ranking, relevant):
    for i, pid in enumerate(ranking, 1):
        if pid in relevant:
            return 1.0 / i
    return 0.0


def mean_reciprocal_rank(rankings):
    rankings = _check(rankings)
    return math.fsum(reciprocal_rank(r, set(rel)) for r, rel in rankings) / len(rankings)


def ranking_report(rankings):
    rankings = _check(rankings)
    return RankingReport(mean_average_precision(rankings), mean_reciprocal_rank(rankings), len(rankings))

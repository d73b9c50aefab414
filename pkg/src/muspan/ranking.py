"""Passage ranking helpers: cross-passage normalisation, ordering, dynamic
negative sampling and the ranker loss.

Relevance/unrelevance scores are produced elsewhere and read from files.
"""

import hashlib
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

MASK64 = (1 << 64) - 1


class Candidate(NamedTuple):
    passage_id: object
    r: float
    u: float
    is_selected: bool = False


@dataclass
class RankedCandidateSet:
    question_id: str
    candidates: list
    normalized: Optional[np.ndarray] = None

    def __post_init__(self):
        self.candidates = [Candidate(*c) for c in self.candidates]
        for c in self.candidates:
            if c.r < 0 or c.u < 0 or abs(c.r + c.u - 1.0) > 1e-6:
                raise ValueError(f"{self.question_id}/{c.passage_id}: r and u must be a 2-way softmax")

    @classmethod
    def from_dict(cls, d):
        return cls(
            question_id=str(d["question_id"]),
            candidates=[
                Candidate(c["passage_id"], float(c["r"]), float(c["u"]), bool(c.get("is_selected", False)))
                for c in d["candidates"]
            ],
        )

    def normalize(self):
        self.normalized = normalize_relevance([c.r for c in self.candidates])
        return self.normalized


def normalize_relevance(scores):
    """Softmax of the relevance scores across one question's candidates."""
    x = np.asarray(scores, dtype=np.float64)
    if x.size == 0:
        raise ValueError("no scores to normalise")
    if not np.all(np.isfinite(x)):
        raise ValueError("scores must be finite")
    e = np.exp(x - x.max())
    return e / e.sum()


def rank(cset: RankedCandidateSet):
    """Passage ids by descending normalised relevance, ties by ascending id."""
    scores = cset.normalized if cset.normalized is not None else cset.normalize()
    order = sorted(range(len(cset.candidates)), key=lambda i: (-scores[i], cset.candidates[i].passage_id))
    return [cset.candidates[i].passage_id for i in order]


def splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def question_seed(base_seed, epoch, question_id):
    """64-bit seed from (base_seed, epoch, question_id).

    splitmix64 is chained over the three inputs; the question id enters as
    the first 8 bytes of its BLAKE2b digest so it is stable across runs.
    """
    qid = int.from_bytes(hashlib.blake2b(str(question_id).encode("utf-8"), digest_size=8).digest(), "little")
    h = splitmix64(base_seed & MASK64)
    h = splitmix64(h ^ (epoch & MASK64))
    return splitmix64(h ^ qid)


class SamplePair(NamedTuple):
    question_id: str
    positive: object
    negative: object


@dataclass
class SamplingEpochPlan:
    epoch: int
    base_seed: int
    pairs: list = field(default_factory=list)
    skipped: list = field(default_factory=list)


def dynamic_sample(corpus, epoch, base_seed):
    """Draw one negative per positive passage for this epoch.

    ``corpus`` yields records with ``query_id`` and ``passages`` (objects
    with ``is_selected``); passage ids are positions within the question.
    Questions without both a selected and an unselected passage go to
    ``plan.skipped``.
    """
    plan = SamplingEpochPlan(epoch=epoch, base_seed=base_seed)
    for rec in corpus:
        pos = [i for i, p in enumerate(rec.passages) if p.is_selected]
        neg = [i for i, p in enumerate(rec.passages) if not p.is_selected]
        if not pos or not neg:
            plan.skipped.append(rec.query_id)
            continue
        rng = np.random.Generator(np.random.PCG64(question_seed(base_seed, epoch, rec.query_id)))
        for p in pos:
            plan.pairs.append(SamplePair(rec.query_id, p, neg[int(rng.integers(len(neg)))]))
    return plan


def ranker_nll(pairs):
    """Mean of -(log r(Q, P+) + log u(Q, P-)); ``math.inf`` on a zero score."""
    if not pairs:
        raise ValueError("no pairs")
    ll = 0.0
    for r_pos, u_neg in pairs:
        if not (0.0 <= r_pos <= 1.0 and 0.0 <= u_neg <= 1.0):
            raise ValueError(f"scores must lie in [0, 1], got {(r_pos, u_neg)}")
        if r_pos == 0.0 or u_neg == 0.0:
            return math.inf
        ll += math.log(r_pos) + math.log(u_neg)
    return 0.0 - ll / len(pairs)

"""Greedy multi-span decoding from per-step start/end distributions.

Each step j carries two distributions over ``n + 1`` positions; position ``n``
is the virtual stop span. The stop pair ``(n, n)`` competes in the same
argmax as the real pairs, and tokens covered by earlier predictions are
masked out of later steps.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .annotator import Span, reconstruct

PROB_TOL = 1e-6


@dataclass
class SpanProbabilities:
    n: int
    steps: list

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")
        if not self.steps:
            raise ValueError("at least one decoding step is required")
        steps = []
        for j, (start, end) in enumerate(self.steps):
            start = np.asarray(start, dtype=np.float64)
            end = np.asarray(end, dtype=np.float64)
            for name, dist in (("start", start), ("end", end)):
                if dist.shape != (self.n + 1,):
                    raise ValueError(f"step {j} {name}: expected length {self.n + 1}, got {dist.shape}")
                if not np.all(np.isfinite(dist)) or np.any(dist < 0):
                    raise ValueError(f"step {j} {name}: entries must be finite and non-negative")
                if abs(dist.sum() - 1.0) > PROB_TOL:
                    raise ValueError(f"step {j} {name}: sums to {dist.sum():.8f}, not 1")
            steps.append((start, end))
        self.steps = steps

    @property
    def stop(self):
        return self.n

    @classmethod
    def from_dict(cls, d):
        return cls(n=int(d["n"]), steps=[(s["start"], s["end"]) for s in d["steps"]])

    def to_dict(self):
        return {
            "n": self.n,
            "steps": [{"start": s.tolist(), "end": e.tolist()} for s, e in self.steps],
        }


@dataclass
class DecodedAnswer:
    spans: list = field(default_factory=list)
    stopped: bool = False


def apply_conditional_mask(dist, masked):
    """Copy of ``dist`` with the masked token positions zeroed.

    No renormalisation: only the argmax over what is left matters. The stop
    position (last entry) cannot be masked.
    """
    out = np.array(dist, dtype=np.float64)
    n = len(out) - 1
    for i in masked:
        if not 0 <= i < n:
            raise ValueError(f"cannot mask index {i}; maskable range is [0, {n - 1}]")
        out[i] = 0.0
    return out


def decode_spans(probs: SpanProbabilities, allow_equal=False, max_spans=None) -> DecodedAnswer:
    n = probs.n
    masked = set()
    blocked = np.zeros(n, dtype=np.uint8)
    spans = []
    for start, end in probs.steps:
        if max_spans is not None and len(spans) >= max_spans:
            break
        start = apply_conditional_mask(start, masked)
        end = apply_conditional_mask(end, masked)
        k, l, score = kernels.best_pair(start, end, n, blocked, allow_equal)
        # a real pair wins a tie with the stop pair: its k is smaller
        if k < 0 or start[n] * end[n] > score:
            return DecodedAnswer(spans, stopped=True)
        spans.append(Span(k, l))
        masked.update(range(k, l + 1))
        blocked[k : l + 1] = 1
    return DecodedAnswer(spans, stopped=False)


def join_spans(spans, sequence) -> str:
    return reconstruct(spans, sequence)


def span_nll(probs: SpanProbabilities, gold) -> float:
    """Negative log-likelihood of the gold spans, stop span included.

    Returns ``math.inf`` when a gold position has zero probability.
    """
    gold = [Span(*g) for g in gold]
    if not gold or gold[-1] != (probs.n, probs.n):
        raise ValueError("gold spans must end with the stop span (n, n)")
    if len(gold) > len(probs.steps):
        raise ValueError(f"{len(gold)} gold spans but only {len(probs.steps)} steps")
    ll = 0.0
    for (start, end), (s, e) in zip(probs.steps, gold):
        ps, pe = start[s], end[e]
        if ps <= 0.0 or pe <= 0.0:
            return math.inf
        ll += math.log(ps) + math.log(pe)
    return 0.0 - ll

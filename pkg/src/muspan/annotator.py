"""Syntactic multi-span answer annotation.

The gold answer's constituency tree is walked depth first. A subtree whose
lowercased leaves occur contiguously in the packed question+passage sequence
becomes a span and its descendants are skipped; otherwise its children are
tried. The spans are joined back into a string, checked against the answer
with a character-level edit distance, and adjacent spans are merged.
"""

import re
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional

from . import kernels
from .treebank import dfs_subtrees, leaves

_TOKEN_RE = re.compile(
    r"""
    \w+(?=n't\b)            # "would" of "wouldn't"
  | n't\b
  | '(?:s|re|ve|ll|d|m)\b   # clitics
  | \d+(?:[.,]\d+)+         # 1,000 and 2.5
  | (?:[a-z]\.){2,}         # U.S.
  | \w+(?:-\w+)*            # words, hyphenated compounds
  | [^\w\s]                 # any other symbol on its own
    """,
    re.VERBOSE | re.IGNORECASE,
)


def tokenize(text):
    """Split raw text into PTB-like word tokens.

    Punctuation becomes separate tokens and English clitics are split off
    (``wouldn't`` -> ``would n't``) so passages line up with parser leaves.
    """
    return _TOKEN_RE.findall(text)


class Span(NamedTuple):
    """Inclusive token interval."""

    start: int
    end: int


@dataclass(frozen=True)
class PackedSequence:
    tokens: tuple
    match_keys: tuple
    boundary: int

    def __post_init__(self):
        if len(self.tokens) != len(self.match_keys):
            raise ValueError("tokens and match_keys differ in length")
        if not 0 <= self.boundary <= len(self.tokens):
            raise ValueError(f"boundary {self.boundary} outside [0, {len(self.tokens)}]")

    def __len__(self):
        return len(self.tokens)

    @cached_property
    def vocab(self):
        return {}

    @cached_property
    def ids(self):
        return kernels.encode(self.match_keys, self.vocab)

    def check_span(self, span):
        s, e = span
        if not 0 <= s <= e < len(self.tokens):
            raise ValueError(f"span {tuple(span)} out of range for length {len(self.tokens)}")


def pack(question_tokens, passage_tokens):
    tokens = tuple(question_tokens) + tuple(passage_tokens)
    return PackedSequence(
        tokens=tokens,
        match_keys=tuple(t.lower() for t in tokens),
        boundary=len(question_tokens),
    )


def kmp_find(pattern, sequence: PackedSequence) -> Optional[int]:
    """Start of the first occurrence of ``pattern`` (match keys) that lies
    wholly inside the question or wholly inside the passage."""
    if not pattern:
        raise ValueError("empty pattern")
    text = sequence.ids  # fills sequence.vocab
    ids = kernels.lookup(pattern, sequence.vocab)
    if ids is None:
        return None
    idx = kernels.kmp_find(ids, text, sequence.boundary)
    return None if idx < 0 else idx


def edit_distance(a: str, b: str) -> int:
    return kernels.levenshtein(a, b)


def reconstruct(spans, sequence: PackedSequence) -> str:
    """Lowercased span tokens joined by single spaces, in list order."""
    words = []
    for span in spans:
        sequence.check_span(span)
        words.extend(sequence.match_keys[span[0] : span[1] + 1])
    return " ".join(words)


def prune(spans, boundary=None, strict=True):
    """Merge list-adjacent spans that are contiguous in the source text.

    ``boundary`` keeps merges from joining a question span to a passage span.
    With ``strict`` overlapping input raises; the annotator disables it
    because first-occurrence matching can hit the same tokens twice.
    """
    spans = [Span(*s) for s in spans]
    if strict:
        ordered = sorted(spans)
        for a, b in zip(ordered, ordered[1:]):
            if b.start <= a.end:
                raise ValueError(f"overlapping spans {tuple(a)} and {tuple(b)}")
    out = []
    for span in spans:
        if out and span.start == out[-1].end + 1 and span.start != boundary:
            out[-1] = Span(out[-1].start, span.end)
        else:
            out.append(span)
    return out


@dataclass(frozen=True)
class AnnotatorConfig:
    d_max: int = 32
    max_spans: int = 9

    def __post_init__(self):
        if self.d_max < 0:
            raise ValueError("d_max must be >= 0")
        if self.max_spans < 1:
            raise ValueError("max_spans must be >= 1")


PROFILES = {
    "nlg": AnnotatorConfig(d_max=32, max_spans=9),
    "qa": AnnotatorConfig(d_max=8, max_spans=5),
}


@dataclass
class AnnotatedExample:
    example_id: str
    spans: list = field(default_factory=list)
    reconstructed: str = ""
    edit_distance: int = 0
    accepted: bool = False
    boundary: int = 0
    passage_index: Optional[int] = None

    def to_dict(self):
        d = asdict(self)
        d["spans"] = [list(s) for s in self.spans]
        if self.passage_index is None:
            del d["passage_index"]
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(
            example_id=str(d["example_id"]),
            spans=[Span(*s) for s in d["spans"]],
            reconstructed=d.get("reconstructed", ""),
            edit_distance=int(d["edit_distance"]),
            accepted=bool(d["accepted"]),
            boundary=int(d.get("boundary", 0)),
            passage_index=d.get("passage_index"),
        )


def match_subtrees(tree, sequence):
    """Depth-first span matching; returns spans in traversal order."""
    found = []
    walk = dfs_subtrees(tree)
    for sub in walk:
        keys = [t.lower() for t in leaves(sub)]
        s = kmp_find(keys, sequence)
        if s is None:
            walk.reject()
        else:
            found.append(Span(s, s + len(keys) - 1))
            walk.accept()
    return found


def annotate(question_tokens, passage_tokens, answer_tree, config=None, example_id=""):
    config = config or AnnotatorConfig()
    seq = pack(question_tokens, passage_tokens)
    answer = " ".join(t.lower() for t in leaves(answer_tree))
    found = match_subtrees(answer_tree, seq)
    d = edit_distance(answer, reconstruct(found, seq))
    if d > config.d_max:
        found = []
    spans = prune(found, boundary=seq.boundary, strict=False)
    return AnnotatedExample(
        example_id=example_id,
        spans=spans,
        reconstructed=reconstruct(spans, seq),
        edit_distance=d,
        accepted=d <= config.d_max and 1 <= len(spans) <= config.max_spans,
        boundary=seq.boundary,
    )

"""MS MARCO v2.1 records, corpus annotation and span statistics."""

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

from .annotator import AnnotatedExample, AnnotatorConfig, annotate, tokenize
from .treebank import flat_tree

log = logging.getLogger(__name__)

NO_ANSWER = "No Answer Present."
HISTOGRAM_OVERFLOW = 10  # bucket for every span count above 9


class CorpusError(ValueError):
    def __init__(self, path, lineno, message):
        self.path = path
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


class Passage(NamedTuple):
    text: str
    is_selected: bool


@dataclass
class CorpusRecord:
    query_id: str
    query: str
    passages: list
    answers: list = field(default_factory=list)
    well_formed_answers: list = field(default_factory=list)

    @classmethod
    def from_dict(cls, d):
        """Build from MS MARCO field names; raises ValueError/KeyError on bad input.

        A record may give a single ``passage`` string instead of ``passages``;
        it is treated as the selected passage.
        """
        query = d["query"]
        if not isinstance(query, str) or not query.strip():
            raise ValueError("empty query")
        if "passages" not in d and isinstance(d.get("passage"), str):
            passages = [Passage(d["passage"], True)]
        else:
            passages = [Passage(p["passage_text"], bool(p.get("is_selected", 0))) for p in d["passages"]]
        if not passages:
            raise ValueError("no passages")
        return cls(
            query_id=str(d["query_id"]),
            query=query,
            passages=passages,
            answers=_text_list(d.get("answers")),
            well_formed_answers=_text_list(d.get("wellFormedAnswers", d.get("well_formed_answers"))),
        )

    @property
    def selected(self):
        return [i for i, p in enumerate(self.passages) if p.is_selected]

    def answer(self, prefer_well_formed=True):
        """The answer to annotate, or None for an unanswerable record."""
        if prefer_well_formed and self.well_formed_answers:
            return self.well_formed_answers[0]
        for a in self.answers:
            if a.strip() and a != NO_ANSWER:
                return a
        return None

    def is_answerable(self, prefer_well_formed=True):
        return bool(self.selected) and self.answer(prefer_well_formed) is not None


def _text_list(value):
    # the official dump stores an absent wellFormedAnswers as the string "[]"
    if value is None or value == "[]":
        return []
    if isinstance(value, str):
        return [value]
    return [str(v) for v in value]


def _columnar(obj):
    """Rows of the official column-oriented JSON dump."""
    for key in obj["query"]:
        yield {col: values.get(key) for col, values in obj.items() if isinstance(values, dict)}


def load_corpus(path, lenient=False, errors=None):
    """Stream :class:`CorpusRecord` values from a JSONL file.

    A malformed line raises :class:`CorpusError`; with ``lenient`` it is
    logged, appended to ``errors`` (when given) and skipped. The official
    column-oriented JSON dump is accepted as well.
    """
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if lineno == 1 and isinstance(obj, dict) and isinstance(obj.get("query"), dict):
                    yield from (CorpusRecord.from_dict(row) for row in _columnar(obj))
                    return
                rec = CorpusRecord.from_dict(obj)
            except (ValueError, KeyError, TypeError, AttributeError) as exc:
                err = CorpusError(path, lineno, f"{type(exc).__name__}: {exc}")
                if not lenient:
                    raise err from exc
                log.warning("skipping %s", err)
                if errors is not None:
                    errors.append(err)
                continue
            yield rec


def annotate_record(record, tree=None, config=None, prefer_well_formed=True):
    """Annotate against every selected passage and keep the best.

    Best means smallest edit distance, ties to the lowest passage index.
    Without ``tree`` a flat tree over the tokenised answer is used.
    Returns None for unanswerable records.
    """
    config = config or AnnotatorConfig()
    answer = record.answer(prefer_well_formed)
    if not record.selected or answer is None:
        return None
    if tree is None:
        tokens = tokenize(answer)
        if not tokens:
            return None
        tree = flat_tree(tokens)
    question = tokenize(record.query)
    best = None
    for idx in record.selected:
        ex = annotate(question, tokenize(record.passages[idx].text), tree, config, record.query_id)
        ex.passage_index = idx
        if best is None or ex.edit_distance < best.edit_distance:
            best = ex
    return best


def _annotate_job(job):
    record, tree, config, prefer_well_formed = job
    return annotate_record(record, tree, config, prefer_well_formed)


def annotate_corpus(records, trees=None, config=None, prefer_well_formed=True, workers=1, flat_fallback=False):
    """Yield annotations in input order, skipping unanswerable records and
    (unless ``flat_fallback``) records without a tree."""

    def jobs():
        for rec in records:
            tree = trees.get(rec.query_id) if trees is not None else None
            if tree is None and not flat_fallback:
                if rec.is_answerable(prefer_well_formed):
                    log.warning("no parse tree for %s; skipped", rec.query_id)
                continue
            yield rec, tree, config, prefer_well_formed

    if workers <= 1:
        results = map(_annotate_job, jobs())
        yield from (r for r in results if r is not None)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for r in pool.map(_annotate_job, jobs(), chunksize=64):
            if r is not None:
                yield r


def read_annotations(path):
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield AnnotatedExample.from_dict(json.loads(line))


def span_histogram(annotations, edit_distance_cap):
    """Annotated examples per span count, for edit distance below the cap.

    Counts above 9 share the ``HISTOGRAM_OVERFLOW`` bucket.
    """
    hist = {}
    for ex in annotations:
        if ex.spans and ex.edit_distance < edit_distance_cap:
            key = min(len(ex.spans), HISTOGRAM_OVERFLOW)
            hist[key] = hist.get(key, 0) + 1
    return dict(sorted(hist.items()))


def coverage_rate(annotations, max_spans=math.inf, d_max=math.inf):
    """Share of examples that would be kept under (max_spans, d_max)."""
    total = kept = 0
    for ex in annotations:
        total += 1
        if ex.edit_distance <= d_max and 1 <= len(ex.spans) <= max_spans:
            kept += 1
    return kept / total if total else 0.0


def single_span_rate(annotations):
    """Share of examples whose answer is one exact span of the passage."""
    total = hits = 0
    for ex in annotations:
        total += 1
        if len(ex.spans) == 1 and ex.edit_distance == 0 and ex.spans[0][0] >= ex.boundary:
            hits += 1
    return hits / total if total else 0.0


@dataclass
class CorpusStats:
    n_records: int
    single_span_rate: float
    span_histogram: dict
    coverage_by_max_spans: dict
    edit_distance_cap: int
    d_max: float

    def lines(self):
        yield f"n_records\t{self.n_records}"
        yield f"single_span_rate\t{self.single_span_rate:.4f}"
        yield f"edit_distance_cap\t{self.edit_distance_cap}"
        for k, v in self.span_histogram.items():
            label = f">{HISTOGRAM_OVERFLOW - 1}" if k == HISTOGRAM_OVERFLOW else str(k)
            yield f"span_histogram.{label}\t{v}"
        yield f"d_max\t{self.d_max}"
        for k, v in self.coverage_by_max_spans.items():
            yield f"coverage.max_spans={k}\t{v:.4f}"


def compute_stats(annotations, edit_distance_cap=4, d_max=math.inf, caps=range(1, 13)):
    annotations = list(annotations)
    return CorpusStats(
        n_records=len(annotations),
        single_span_rate=single_span_rate(annotations),
        span_histogram=span_histogram(annotations, edit_distance_cap),
        coverage_by_max_spans={c: coverage_rate(annotations, c, d_max) for c in caps},
        edit_distance_cap=edit_distance_cap,
        d_max=d_max,
    )


def write_stats(path, stats):
    with open(path, "w", encoding="utf-8") as fh:
        for line in stats.lines():
            fh.write(line + "\n")

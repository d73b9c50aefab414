import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from muspan.annotator import pack
from muspan.decoder import (
    DecodedAnswer,
    SpanProbabilities,
    apply_conditional_mask,
    decode_spans,
    join_spans,
    span_nll,
)
from muspan.annotator import reconstruct
from oracles import exhaustive_decode

STOP = [0.05, 0.05, 0.05, 0.05, 0.8]
STEP0 = ([0.1, 0.6, 0.1, 0.1, 0.1], [0.1, 0.1, 0.6, 0.1, 0.1])


def test_single_span_then_stop(backend):
    out = decode_spans(SpanProbabilities(4, [STEP0, (STOP, STOP)]))
    assert out == DecodedAnswer([(1, 2)], stopped=True)
    assert exhaustive_decode(4, [STEP0, (STOP, STOP)]) == ([(1, 2)], True)


def test_stop_first_gives_empty_answer(backend):
    assert decode_spans(SpanProbabilities(4, [(STOP, STOP)])) == DecodedAnswer([], stopped=True)


def test_masked_interior_is_not_a_candidate(backend):
    # after (1, 2) every real pair either starts/ends inside it or spans it,
    # so the stop pair is the only candidate left
    step1 = ([0.05, 0.5, 0.2, 0.2, 0.05], [0.05, 0.1, 0.35, 0.3, 0.2])
    probs = SpanProbabilities(4, [STEP0, step1])
    assert decode_spans(probs) == DecodedAnswer([(1, 2)], stopped=True)
    assert exhaustive_decode(4, probs.steps) == ([(1, 2)], True)
    # single-token spans make (3, 3) available: 0.2 * 0.3 > 0.05 * 0.2
    assert decode_spans(probs, allow_equal=True) == DecodedAnswer([(1, 2), (3, 3)], stopped=False)


def test_exhausted_steps_not_stopped(backend):
    out = decode_spans(SpanProbabilities(4, [STEP0]))
    assert out == DecodedAnswer([(1, 2)], stopped=False)


def test_max_spans_truncates(backend):
    probs = SpanProbabilities(4, [STEP0, STEP0, (STOP, STOP)])
    assert decode_spans(probs, max_spans=1) == DecodedAnswer([(1, 2)], stopped=False)


def test_real_pair_wins_tie_with_stop(backend):
    start = [0.5, 0.0, 0.5]
    end = [0.0, 0.5, 0.5]
    assert decode_spans(SpanProbabilities(2, [(start, end)])).spans == [(0, 1)]


def test_mask():
    dist = [0.1, 0.6, 0.2, 0.1]
    assert np.array_equal(apply_conditional_mask(dist, set()), dist)
    assert np.allclose(apply_conditional_mask(dist, {1, 2}), [0.1, 0.0, 0.0, 0.1])
    with pytest.raises(ValueError):
        apply_conditional_mask(dist, {3})
    with pytest.raises(ValueError):
        apply_conditional_mask(dist, {-1})


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=2, max_size=10), st.data())
def test_mask_argmax_avoids_masked(values, data):
    masked = data.draw(st.sets(st.integers(0, len(values) - 2)))
    out = apply_conditional_mask(values, masked)
    if out.max() > 0:
        assert int(np.argmax(out)) not in masked


def test_probability_validation():
    with pytest.raises(ValueError):
        SpanProbabilities(2, [])
    with pytest.raises(ValueError):
        SpanProbabilities(2, [([0.5, 0.5], [0.5, 0.5])])
    with pytest.raises(ValueError):
        SpanProbabilities(1, [([0.7, 0.7], [0.5, 0.5])])
    with pytest.raises(ValueError):
        SpanProbabilities(1, [([1.5, -0.5], [0.5, 0.5])])
    SpanProbabilities(1, [([0.5, 0.5 + 5e-7], [1.0, 0.0])])


def test_probability_dict_roundtrip():
    probs = SpanProbabilities(4, [STEP0, (STOP, STOP)])
    again = SpanProbabilities.from_dict(probs.to_dict())
    assert again.n == 4
    assert all(np.array_equal(a, b) for x, y in zip(probs.steps, again.steps) for a, b in zip(x, y))


def test_join_spans():
    seq = pack(["a", "dog"], ["big", "runs"])
    assert join_spans([], seq) == ""
    assert join_spans([(0, 1), (3, 3)], seq) == "a dog runs"
    assert join_spans([(3, 3), (0, 1)], seq) == reconstruct([(3, 3), (0, 1)], seq)
    with pytest.raises(ValueError):
        join_spans([(0, 4)], seq)


def random_probs(rng, n, steps):
    out = []
    for _ in range(steps):
        s = rng.dirichlet(np.ones(n + 1))
        e = rng.dirichlet(np.ones(n + 1))
        out.append((s, e))
    return SpanProbabilities(n, out)


@pytest.mark.parametrize("allow_equal", [False, True])
def test_decode_matches_oracle(backend, allow_equal):
    rng = np.random.default_rng(11)
    for _ in range(150):
        probs = random_probs(rng, int(rng.integers(1, 9)), int(rng.integers(1, 5)))
        out = decode_spans(probs, allow_equal=allow_equal)
        spans, stopped = exhaustive_decode(probs.n, probs.steps, allow_equal)
        assert (out.spans, out.stopped) == (spans, stopped)


def test_decode_sharp_distributions(backend):
    # peaked distributions keep the stop pair from winning early
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(2, 9))
        steps = []
        for _ in range(int(rng.integers(1, 5))):
            s = rng.dirichlet(np.full(n + 1, 0.2))
            e = rng.dirichlet(np.full(n + 1, 0.2))
            steps.append((s, e))
        probs = SpanProbabilities(n, steps)
        out = decode_spans(probs)
        covered = [i for s, e in out.spans for i in range(s, e + 1)]
        assert len(covered) == len(set(covered))
        assert len(out.spans) <= len(steps)
        assert (out.spans, out.stopped) == exhaustive_decode(n, probs.steps)


def test_nll_uniform():
    for n, m in [(1, 1), (4, 2), (9, 5)]:
        u = np.full(n + 1, 1.0 / (n + 1))
        probs = SpanProbabilities(n, [(u, u)] * m)
        gold = [(0, 0)] * (m - 1) + [(n, n)]
        assert abs(span_nll(probs, gold) - 2 * m * math.log(n + 1)) < 1e-9


def test_nll_one_hot_is_zero():
    hot = lambda i: np.eye(5)[i]  # noqa: E731
    probs = SpanProbabilities(4, [(hot(1), hot(2)), (hot(4), hot(4))])
    assert span_nll(probs, [(1, 2), (4, 4)]) == 0.0


def test_nll_arithmetic():
    probs = SpanProbabilities(2, [([0.5, 0.25, 0.25], [0.25, 0.5, 0.25]), ([0.0, 0.0, 1.0], [0.0, 0.0, 1.0])])
    assert span_nll(probs, [(0, 1), (2, 2)]) == pytest.approx(-(math.log(0.5) + math.log(0.5)), abs=1e-12)
    assert span_nll(probs, [(0, 1), (2, 2)]) == pytest.approx(1.3863, abs=1e-4)


def test_nll_zero_probability_is_infinite():
    probs = SpanProbabilities(2, [([1.0, 0.0, 0.0], [0.0, 0.0, 1.0])])
    assert span_nll(probs, [(2, 2)]) == math.inf


def test_nll_requires_stop_and_enough_steps():
    u = np.full(3, 1 / 3)
    probs = SpanProbabilities(2, [(u, u)])
    with pytest.raises(ValueError):
        span_nll(probs, [(0, 1)])
    with pytest.raises(ValueError):
        span_nll(probs, [(0, 1), (2, 2)])


def test_nll_invariant_to_non_gold_permutation():
    rng = np.random.default_rng(2)
    s, e = rng.dirichlet(np.ones(6)), rng.dirichlet(np.ones(6))
    gold = [(5, 5)]
    base = span_nll(SpanProbabilities(5, [(s, e)]), gold)
    perm = np.concatenate([rng.permutation(s[:5]), s[5:]])
    assert span_nll(SpanProbabilities(5, [(perm, e)]), gold) == base

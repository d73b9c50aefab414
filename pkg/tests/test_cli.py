import json
import os

import pytest

from muspan.annotator import pack, tokenize
from muspan.cli import run
from muspan.corpus import load_corpus


def one_hot(n, i):
    v = [0.0] * (n + 1)
    v[i] = 1.0
    return v


@pytest.fixture
def corpus(data_dir):
    return os.path.join(data_dir, "corpus.jsonl")


@pytest.fixture
def trees(data_dir):
    return os.path.join(data_dir, "trees.tsv")


def annotate(corpus, trees, out, *extra):
    return run(["annotate", "--corpus", corpus, "--trees", trees, "--profile", "nlg", "--out", str(out), *extra])


def test_unknown_subcommand():
    assert run(["bogus"]) == 2


def test_missing_required_flag(tmp_path, corpus):
    assert run(["annotate", "--corpus", corpus]) == 2
    assert run(["decode", "--out", str(tmp_path / "x")]) == 2


def test_missing_input_file(tmp_path):
    assert run(["annotate", "--corpus", str(tmp_path / "nope.jsonl"), "--flat-trees", "--out", str(tmp_path / "o")]) == 1


def test_annotate_matches_golden(tmp_path, corpus, trees, data_dir):
    out = tmp_path / "ann.jsonl"
    assert annotate(corpus, trees, out) == 0
    golden = open(os.path.join(data_dir, "golden_annotations.jsonl"), "rb").read()
    assert out.read_bytes() == golden
    cfg = json.loads((tmp_path / "ann.jsonl.config.json").read_text())
    assert cfg["d_max"] == 32 and cfg["max_spans"] == 9 and cfg["answer_source"] == "well_formed"


def test_annotate_is_deterministic_and_parallel_safe(tmp_path, corpus, trees):
    a, b, c = (tmp_path / f"{x}.jsonl" for x in "abc")
    assert annotate(corpus, trees, a) == 0
    assert annotate(corpus, trees, b) == 0
    assert annotate(corpus, trees, c, "--workers", "2") == 0
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_config_replay(tmp_path, corpus, trees):
    first = tmp_path / "first.jsonl"
    assert annotate(corpus, trees, first, "--profile", "qa") == 0
    replay = tmp_path / "replay.jsonl"
    assert run(["annotate", "--config", str(first) + ".config.json", "--out", str(replay)]) == 0
    assert first.read_bytes() == replay.read_bytes()
    cfg = json.loads((tmp_path / "replay.jsonl.config.json").read_text())
    assert cfg["profile"] == "qa" and cfg["d_max"] == 8


def test_decode_one_hot(tmp_path, corpus):
    rec = next(r for r in load_corpus(corpus) if r.query_id == "2")
    n = len(pack(tokenize(rec.query), tokenize(rec.passages[1].text)))
    probs = tmp_path / "probs.jsonl"
    steps = [{"start": one_hot(n, 6), "end": one_hot(n, 6)}, {"start": one_hot(n, n), "end": one_hot(n, n)}]
    probs.write_text(json.dumps({"example_id": "2", "passage_index": 1, "n": n, "steps": steps}) + "\n")
    out = tmp_path / "dec.jsonl"
    assert run(["decode", "--probs", str(probs), "--corpus", corpus, "--allow-equal", "--out", str(out)]) == 0
    row = json.loads(out.read_text())
    assert row == {"example_id": "2", "spans": [[6, 6]], "stopped": True, "answer": "paris"}


def test_decode_length_mismatch(tmp_path, corpus):
    probs = tmp_path / "probs.jsonl"
    probs.write_text(json.dumps({"example_id": "2", "n": 1, "steps": [{"start": [0, 1], "end": [0, 1]}]}) + "\n")
    assert run(["decode", "--probs", str(probs), "--corpus", corpus, "--out", str(tmp_path / "o")]) == 1


def test_eval(tmp_path):
    preds = tmp_path / "p.jsonl"
    refs = tmp_path / "r.jsonl"
    preds.write_text(json.dumps({"example_id": "a", "answer": "the cat sat"}) + "\n")
    refs.write_text(json.dumps({"example_id": "a", "answers": ["the cat sat"]}) + "\n")
    out = tmp_path / "report.json"
    assert run(["eval", "--predictions", str(preds), "--references", str(refs), "--out", str(out), "--per-example"]) == 0
    report = json.loads(out.read_text())
    assert report["bleu1"] == 1.0 and report["rouge_l"] == 1.0
    assert report["per_example"] == [["a", 1.0]]
    assert report["config"]["beta"] == 1.2


def test_rank_with_report(tmp_path):
    scores = tmp_path / "s.jsonl"
    cands = [
        {"passage_id": 0, "r": 0.2, "u": 0.8},
        {"passage_id": 1, "r": 0.9, "u": 0.1, "is_selected": True},
        {"passage_id": 2, "r": 0.9, "u": 0.1},
    ]
    scores.write_text(json.dumps({"question_id": "q", "candidates": cands}) + "\n")
    out, report = tmp_path / "rank.jsonl", tmp_path / "rank.json"
    assert run(["rank", "--scores", str(scores), "--out", str(out), "--report", str(report)]) == 0
    row = json.loads(out.read_text())
    assert row["ranking"] == [1, 2, 0]
    assert sum(row["normalized"]) == pytest.approx(1.0)
    assert json.loads(report.read_text()) == {"map": 1.0, "mrr": 1.0, "n_queries": 1}


def test_sample(tmp_path, corpus):
    a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
    assert run(["sample", "--corpus", corpus, "--epoch", "3", "--seed", "11", "--out", str(a)]) == 0
    assert run(["sample", "--corpus", corpus, "--epoch", "3", "--seed", "11", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "question_id\tpositive\tnegative"
    assert len(lines) > 1


def test_stats_from_annotations(tmp_path, data_dir, capsys):
    golden = os.path.join(data_dir, "golden_annotations.jsonl")
    assert run(["stats", "--annotations", golden, "--cap", "4"]) == 0
    text = capsys.readouterr().out
    assert "single_span_rate\t0.2500" in text
    assert "span_histogram.6\t1" in text


def test_stats_from_corpus_without_trees(tmp_path, corpus):
    out = tmp_path / "stats.txt"
    assert run(["stats", "--corpus", corpus, "--out", str(out)]) == 0
    assert out.read_text().startswith("n_records\t")
    assert (tmp_path / "stats.txt.config.json").exists()

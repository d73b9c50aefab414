"""``muspan`` command line.

Every subcommand that writes ``--out PATH`` also writes ``PATH.config.json``
holding its effective settings; ``--config PATH.config.json`` replays them.
Log verbosity comes from the ``MUSPAN_LOG`` environment variable.
"""

import argparse
import json
import logging
import math
import os
import sys

from . import __version__
from .annotator import PROFILES, AnnotatorConfig, pack, tokenize
from .corpus import CorpusError, annotate_corpus, compute_stats, load_corpus, read_annotations
from .decoder import SpanProbabilities, decode_spans, join_spans
from .metrics import ROUGE_BETA, evaluate, ranking_report
from .ranking import RankedCandidateSet, dynamic_sample, rank
from .treebank import read_tree_file

log = logging.getLogger("muspan")

REQUIRED = {
    "annotate": ["corpus", "out"],
    "decode": ["probs", "corpus", "out"],
    "eval": ["predictions", "references", "out"],
    "rank": ["scores", "out"],
    "sample": ["corpus", "out"],
    "stats": [],
}


def _dump(obj):
    return json.dumps(obj, ensure_ascii=False)


def _read_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                try:
                    yield json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusError(path, lineno, str(exc)) from exc


def _write_config(args):
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("config", "func")}
    with open(args.out + ".config.json", "w", encoding="utf-8") as fh:
        json.dump(cfg, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _resolve_profile(args):
    profile = PROFILES[args.profile]
    if args.d_max is None:
        args.d_max = profile.d_max
    if args.max_spans is None:
        args.max_spans = profile.max_spans
    if args.answer_source is None:
        args.answer_source = "well_formed" if args.profile == "nlg" else "answers"


def cmd_annotate(args):
    _resolve_profile(args)
    config = AnnotatorConfig(d_max=args.d_max, max_spans=args.max_spans)
    if args.trees is None and not args.flat_trees:
        raise SystemExit("muspan annotate: --trees is required unless --flat-trees is given")
    trees = read_tree_file(args.trees) if args.trees else None
    records = load_corpus(args.corpus, lenient=args.lenient)
    n = 0
    with open(args.out, "w", encoding="utf-8") as fh:
        for ex in annotate_corpus(
            records,
            trees,
            config,
            prefer_well_formed=args.answer_source == "well_formed",
            workers=args.workers,
            flat_fallback=args.flat_trees,
        ):
            fh.write(_dump(ex.to_dict()) + "\n")
            n += 1
    _write_config(args)
    log.info("annotated %d examples", n)


def _passage_for(record, probs_rec):
    idx = probs_rec.get("passage_index")
    if idx is None:
        idx = record.selected[0] if record.selected else 0
    return record.passages[idx].text


def cmd_decode(args):
    records = {r.query_id: r for r in load_corpus(args.corpus, lenient=args.lenient)}
    with open(args.out, "w", encoding="utf-8") as fh:
        for d in _read_jsonl(args.probs):
            eid = str(d.get("example_id", d.get("query_id")))
            if eid not in records:
                raise ValueError(f"no corpus record for example {eid}")
            rec = records[eid]
            seq = pack(tokenize(rec.query), tokenize(_passage_for(rec, d)))
            probs = SpanProbabilities.from_dict(d)
            if probs.n != len(seq):
                raise ValueError(f"example {eid}: n={probs.n} but the packed sequence has {len(seq)} tokens")
            out = decode_spans(probs, allow_equal=args.allow_equal, max_spans=args.max_spans)
            row = {
                "example_id": eid,
                "spans": [list(s) for s in out.spans],
                "stopped": out.stopped,
                "answer": join_spans(out.spans, seq),
            }
            fh.write(_dump(row) + "\n")
    _write_config(args)


def _references(d, well_formed):
    refs = []
    if well_formed:
        wfa = d.get("wellFormedAnswers", d.get("well_formed_answers"))
        if isinstance(wfa, list):
            refs = wfa
    return refs or d.get("answers") or []


def cmd_eval(args):
    refs = {str(d.get("example_id", d.get("query_id"))): _references(d, args.well_formed) for d in _read_jsonl(args.references)}
    examples = []
    for d in _read_jsonl(args.predictions):
        eid = str(d.get("example_id", d.get("query_id")))
        if eid not in refs:
            raise ValueError(f"prediction {eid} has no reference")
        answer = d.get("answer")
        if answer is None:
            answer = (d.get("answers") or [""])[0]
        examples.append((eid, answer, refs[eid]))
    report = evaluate(examples, beta=args.beta, per_example=args.per_example).to_dict()
    report["config"] = {k: v for k, v in sorted(vars(args).items()) if k not in ("config", "func")}
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_config(args)


def cmd_rank(args):
    judged = []
    with open(args.out, "w", encoding="utf-8") as fh:
        for d in _read_jsonl(args.scores):
            cset = RankedCandidateSet.from_dict(d)
            order = rank(cset)
            row = {
                "question_id": cset.question_id,
                "ranking": order,
                "normalized": [float(x) for x in cset.normalized],
            }
            fh.write(_dump(row) + "\n")
            relevant = {c.passage_id for c in cset.candidates if c.is_selected}
            if relevant:
                judged.append((order, relevant))
    if args.report:
        if not judged:
            raise ValueError("no candidate carries is_selected; cannot compute MAP/MRR")
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(ranking_report(judged).to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    _write_config(args)


def cmd_sample(args):
    plan = dynamic_sample(load_corpus(args.corpus, lenient=args.lenient), args.epoch, args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("question_id\tpositive\tnegative\n")
        for p in plan.pairs:
            fh.write(f"{p.question_id}\t{p.positive}\t{p.negative}\n")
    if plan.skipped:
        log.warning("skipped %d questions without both positive and negative passages", len(plan.skipped))
    _write_config(args)


def cmd_stats(args):
    if args.annotations:
        annotations = read_annotations(args.annotations)
    elif args.corpus:
        _resolve_profile(args)
        trees = read_tree_file(args.trees) if args.trees else None
        annotations = annotate_corpus(
            load_corpus(args.corpus, lenient=args.lenient),
            trees,
            AnnotatorConfig(d_max=args.d_max, max_spans=args.max_spans),
            prefer_well_formed=args.answer_source == "well_formed",
            workers=args.workers,
            flat_fallback=True,
        )
    else:
        raise SystemExit("muspan stats: give --annotations or --corpus")
    d_max = math.inf if args.coverage_d_max is None else args.coverage_d_max
    stats = compute_stats(annotations, edit_distance_cap=args.cap, d_max=d_max)
    text = "".join(line + "\n" for line in stats.lines())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        _write_config(args)
    else:
        sys.stdout.write(text)


def _annotation_options(p):
    p.add_argument("--profile", choices=sorted(PROFILES), default="nlg", help="preset d_max/max_spans (nlg: 32/9, qa: 8/5)")
    p.add_argument("--d-max", type=int, help="edit distance threshold (characters)")
    p.add_argument("--max-spans", type=int, help="maximum span count after pruning")
    p.add_argument("--answer-source", choices=["well_formed", "answers"], help="answer field to annotate")
    p.add_argument("--trees", help="sidecar TSV of <example_id>\\t<bracketed tree>")


def build_parser():
    parser = argparse.ArgumentParser(prog="muspan", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    parser.subcommands = {}

    def add(name, func, help):
        p = parser.subcommands[name] = sub.add_parser(name, help=help)
        p.set_defaults(func=func)
        p.add_argument("--config", help="JSON file of option defaults (e.g. a previous run's .config.json)")
        p.add_argument("--out", help="output path")
        return p

    p = add("annotate", cmd_annotate, "multi-span annotation of a corpus")
    p.add_argument("--corpus", help="MS MARCO JSONL")
    _annotation_options(p)
    p.add_argument("--flat-trees", action="store_true", help="use a flat tree when an example has no parse")
    p.add_argument("--lenient", action="store_true", help="skip malformed corpus lines")
    p.add_argument("--workers", type=int, default=1)

    p = add("decode", cmd_decode, "decode spans from probability files")
    p.add_argument("--probs", help="JSONL of {example_id, n, steps}")
    p.add_argument("--corpus", help="JSONL records supplying the question and passage")
    p.add_argument("--max-spans", type=int, default=None)
    p.add_argument("--allow-equal", action="store_true", help="allow single-token spans (k == l)")
    p.add_argument("--lenient", action="store_true")

    p = add("eval", cmd_eval, "BLEU-1 / ROUGE-L report")
    p.add_argument("--predictions", help="JSONL of {example_id, answer}")
    p.add_argument("--references", help="JSONL of {example_id, answers}")
    p.add_argument("--beta", type=float, default=ROUGE_BETA)
    p.add_argument("--well-formed", action="store_true", help="score against wellFormedAnswers when present")
    p.add_argument("--per-example", action="store_true")

    p = add("rank", cmd_rank, "normalise and rank candidate passages")
    p.add_argument("--scores", help="JSONL of {question_id, candidates: [{passage_id, r, u}]}")
    p.add_argument("--report", help="write MAP/MRR here (needs is_selected labels)")

    p = add("sample", cmd_sample, "dynamic negative sampling plan for one epoch")
    p.add_argument("--corpus")
    p.add_argument("--epoch", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lenient", action="store_true")

    p = add("stats", cmd_stats, "span-count histogram, single-span and coverage rates")
    p.add_argument("--annotations", help="annotation JSONL from 'muspan annotate'")
    p.add_argument("--corpus", help="annotate this corpus on the fly instead")
    _annotation_options(p)
    p.add_argument("--cap", type=int, default=4, help="histogram keeps edit distance < cap")
    p.add_argument("--coverage-d-max", type=int, default=None, help="d_max for coverage rates (default: no limit)")
    p.add_argument("--lenient", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    return parser


def _setup_logging():
    level = os.environ.get("MUSPAN_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            saved = json.load(fh)
        saved.pop("command", None)
        parser.subcommands[args.command].set_defaults(**saved)
        args = parser.parse_args(argv)
    missing = [name for name in REQUIRED[args.command] if getattr(args, name, None) is None]
    if missing:
        parser.error(f"{args.command}: missing " + ", ".join("--" + m.replace("_", "-") for m in missing))
    return args


def run(argv=None):
    _setup_logging()
    try:
        args = parse(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        args.func(args)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return 2
        return exc.code or 0
    except (OSError, ValueError) as exc:
        print(f"muspan {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

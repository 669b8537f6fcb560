"""``qadisc`` command line: extract, validate, score, stats, iaa, merge, train, parse, convert."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections import OrderedDict
from typing import Iterable, List, Optional, Sequence, Tuple

from . import __version__
from .baseline import (DEFAULT_TAU, Pipeline, PrefixModel, build_examples, load_compat_table,
                       parse_sentence, train_prefix_classifier)
from .dataset import (DatasetError, DatasetRecord, FormatDescriptor, MissingVerdict,
                      dataset_stats, format_records, group_sets, merge_records, read_dataset,
                      read_tagged)
from .metrics import InsufficientWorkers, compute_iaa, compute_iaa_samples, score_sets
from .model import GOLD, AnnotationSet, Source
from .targets import ConnectiveLexicon, extract_targets, segment_sentence, segment_text

log = logging.getLogger("qadiscourse")


class CommandError(Exception):
    """Reported on stderr; the command exits with status 1."""


def _fmt_value(v):
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def render_rows(rows: Iterable[Tuple[str, object]], report: str) -> str:
    if report == "machine":
        return "".join(json.dumps({"metric": k, "value": v}, sort_keys=True) + "\n" for k, v in rows)
    return "".join(f"{k}: {_fmt_value(v)}\n" for k, v in rows)


def _emit(text: str, output: Optional[str]):
    if output:
        with open(output, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _fmt(args) -> Optional[FormatDescriptor]:
    return FormatDescriptor.load(args.format) if args.format else None


def _read(path, args) -> List[DatasetRecord]:
    return read_dataset(path, _fmt(args))


def _lexicon(args) -> ConnectiveLexicon:
    return ConnectiveLexicon.from_env(args.lexicon)


def _figure_path(args, name):
    return os.path.join(args.figures, name) if args.figures else None


# -- commands -------------------------------------------------------------------------

def cmd_extract(args) -> int:
    lexicon = _lexicon(args)
    rows = read_tagged(args.input)
    out = []
    for row in rows:
        s = row.sentence
        segments = segment_sentence(s, lexicon)
        targets = sorted(extract_targets(s, lexicon))
        if args.report == "machine":
            out.append(json.dumps({
                "sentence_id": s.id,
                "segments": [{"span": [g.start, g.end], "connective": g.connective,
                              "text": segment_text(s, g)} for g in segments],
                "targets": targets,
                "target_words": [s.tokens[t].surface for t in targets],
            }, sort_keys=True, ensure_ascii=False) + "\n")
        else:
            out.append("\t".join([
                s.id,
                " ".join(f"{g.start}-{g.end}" for g in segments),
                " ".join(f"[{segment_text(s, g)}]" for g in segments),
                ",".join(map(str, targets)),
                " ".join(s.tokens[t].surface for t in targets),
            ]) + "\n")
    _emit("".join(out), args.output)
    return 0


def cmd_validate(args) -> int:
    errors: List[DatasetError] = []
    records = read_dataset(args.input, _fmt(args), errors)
    for e in errors:
        print(f"error: {args.input}: {e}", file=sys.stderr)
    _emit(render_rows([("valid_records", len(records)), ("invalid_rows", len(errors))],
                      args.report), args.output)
    return 1 if errors else 0


def _by_sentence(records: Sequence[DatasetRecord]) -> "OrderedDict[str, AnnotationSet]":
    grouped: "OrderedDict[str, list]" = OrderedDict()
    for r in sorted(records, key=lambda r: r.sort_key):
        grouped.setdefault(r.sentence_id, []).append(r.qa)
    return OrderedDict((k, AnnotationSet(k, GOLD, tuple(v))) for k, v in grouped.items())


def cmd_score(args) -> int:
    pred = _by_sentence(_read(args.pred, args))
    gold = _by_sentence(_read(args.gold, args))
    extra = sorted(set(pred) - set(gold))
    if extra:
        raise CommandError(f"{len(extra)} predicted sentence ids are not in the gold file, "
                           f"e.g. {extra[0]!r}")
    pairs = [(pred.get(sid, AnnotationSet(sid, gold[sid].source, ())), gold[sid]) for sid in gold]
    report = score_sets(pairs)
    _emit(render_rows(report.as_rows(), args.report), args.output)
    path = _figure_path(args, "prefix_breakdown.png")
    if path:
        from .plotting import plot_prefix_breakdown
        plot_prefix_breakdown(report, path)
    return 0


def cmd_stats(args) -> int:
    stats = dataset_stats(_read(args.input, args))
    _emit(render_rows(stats.as_rows(), args.report), args.output)
    path = _figure_path(args, "prefix_distribution.png")
    if path:
        from .plotting import plot_prefix_distribution
        plot_prefix_distribution(stats, path)
    return 0


def cmd_iaa(args) -> int:
    records = _read(args.input, args)
    annotations = {}
    for (sid, _), aset in group_sets(records).items():
        if aset.source.kind == "WORKER":
            annotations.setdefault(aset.source.worker_id, {})[sid] = aset
    if args.samples > 1:
        ids = sorted({r.sentence_id for r in records})
        size = -(-len(ids) // args.samples)
        samples = [ids[i:i + size] for i in range(0, len(ids), size)]
        uqa, lqa = compute_iaa_samples(annotations, samples)
    else:
        uqa, lqa = compute_iaa(annotations)
    rows = [("workers", len(annotations)), ("uqa_f1", uqa), ("lqa_accuracy", lqa)]
    _emit(render_rows(rows, args.report), args.output)
    return 0


def cmd_merge(args) -> int:
    merged = merge_records(_read(args.input, args))
    _emit(format_records(merged), args.output)
    return 0


def cmd_convert(args) -> int:
    _emit(format_records(_read(args.input, args)), args.output)
    return 0


def cmd_train(args) -> int:
    lexicon = _lexicon(args)
    records = _read(args.data, args)
    if args.split:
        records = [r for r in records if r.split == args.split]
    gold = {}
    for r in records:
        gold.setdefault(r.sentence_id, []).append(r.qa)
    sentences = [row.sentence for row in read_tagged(args.tagged)]
    examples = build_examples(sentences, gold, lexicon)
    if not examples:
        raise CommandError("no training examples: no tagged sentence has gold QAs")
    model = train_prefix_classifier(examples, tau=args.tau or DEFAULT_TAU,
                                    iterations=args.iterations,
                                    learning_rate=args.learning_rate, seed=args.seed)
    model.save(args.output)
    log.info("wrote model with %d features to %s", len(model.vocabulary), args.output)
    return 0


def cmd_parse(args) -> int:
    lexicon = _lexicon(args)
    model = PrefixModel.load(args.model)
    compat = load_compat_table(args.compat) if args.compat else None
    pipeline = Pipeline.baseline(model, lexicon, compat, args.tau)
    records = []
    for row in read_tagged(args.input):
        s = row.sentence.with_targets(extract_targets(row.sentence, lexicon))
        for qa in parse_sentence(pipeline, s):
            records.append(DatasetRecord(s.id, row.split, row.domain, s.text,
                                         Source("SYSTEM"), qa))
    _emit(format_records(records), args.output)
    return 0


# -- argument parsing -------------------------------------------------------------------

def _tau(text):
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError("tau must lie strictly between 0 and 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", metavar="DESCRIPTOR",
                        help="column-mapping descriptor for non-canonical input files")
    common.add_argument("--report", choices=("text", "machine"), default="text",
                        help="key: value lines (text) or one JSON record per line (machine)")
    common.add_argument("--output", "-o", help="write here instead of stdout")
    common.add_argument("--lexicon", help="connective lexicon file (default: $QADISC_LEXICON "
                                          "or the built-in list)")
    common.add_argument("--seed", type=int, default=0, help="seed for stochastic defaults")
    common.add_argument("--verbose", "-v", action="store_true")

    parser = argparse.ArgumentParser(prog="qadisc", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", parents=[common], help="segment sentences and mark targets")
    p.add_argument("--input", "-i", required=True, help="tagged sentences file")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("validate", parents=[common], help="check every row of a dataset file")
    p.add_argument("--input", "-i", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("score", parents=[common], help="UQA/LQA/prefix accuracy vs gold")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--figures", metavar="DIR", help="also render figures into DIR")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("stats", parents=[common], help="dataset statistics")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--figures", metavar="DIR", help="also render figures into DIR")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("iaa", parents=[common], help="pairwise inter-annotator agreement")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--samples", type=int, default=1,
                   help="split sentences into N samples and average over them")
    p.set_defaults(func=cmd_iaa)

    p = sub.add_parser("merge", parents=[common], help="apply adjudication verdicts")
    p.add_argument("--input", "-i", required=True)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("convert", parents=[common], help="rewrite a file in canonical form")
    p.add_argument("--input", "-i", required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("train", parents=[common], help="train the baseline prefix classifier")
    p.add_argument("--data", required=True, help="gold dataset file")
    p.add_argument("--tagged", required=True, help="tagged sentences for the dataset")
    p.add_argument("--split", choices=("train", "dev", "test"))
    p.add_argument("--tau", type=_tau)
    p.add_argument("--iterations", type=int, default=200)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("parse", parents=[common], help="run the baseline parser")
    p.add_argument("--input", "-i", required=True, help="tagged sentences file")
    p.add_argument("--model", required=True)
    p.add_argument("--tau", type=_tau, help="override the model's threshold")
    p.add_argument("--compat", help="connective -> prefix compatibility table")
    p.set_defaults(func=cmd_parse)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CommandError, DatasetError, MissingVerdict, InsufficientWorkers,
            OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

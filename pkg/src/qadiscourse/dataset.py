"""Reading and writing QA annotation files, adjudication merge, corpus statistics.

The canonical file is UTF-8, tab-separated, one QA per row with a mandatory
header::

    sentence_id  split  domain  sentence  source  question  answer  verdict

Backslash, tab, CR and newline inside fields are backslash-escaped. Other
layouts are read through a :class:`FormatDescriptor`.
"""

from __future__ import annotations

import csv
import io
from collections import Counter, OrderedDict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .grammar import CATALOG, NoPrefixMatch, parse_question
from .metrics import tokenize
from .model import GOLD, AnnotationSet, Grammaticality, QAPair, Source, TaggedSentence

SPLITS = ("train", "dev", "test")
DOMAINS = ("wikinews", "wikipedia", "other")
COLUMNS = ("sentence_id", "split", "domain", "sentence", "source", "question", "answer", "verdict")


class DatasetError(ValueError):
    """Base for row-level read failures; ``row`` is the 1-based file line."""

    def __init__(self, message, row=None):
        self.row = row
        super().__init__(f"row {row}: {message}" if row is not None else message)


class Malformed(DatasetError):
    pass


class UnknownPrefix(DatasetError):
    pass


class MissingVerdict(ValueError):
    pass


@dataclass(frozen=True)
class DatasetRecord:
    sentence_id: str
    split: str
    domain: str
    sentence: str
    source: Source
    qa: QAPair

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r}")
        if self.domain not in DOMAINS:
            raise ValueError(f"unknown domain {self.domain!r}")
        if self.qa.prefix not in CATALOG:
            raise ValueError(f"prefix {self.qa.prefix.surface!r} is not a catalog member")

    @property
    def sort_key(self):
        return (SPLITS.index(self.split), self.sentence_id)


_ESC = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESC = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}


def escape(text: str) -> str:
    return "".join(_ESC.get(c, c) for c in text)


def unescape(text: str) -> str:
    if "\\" not in text:
        return text
    out = []
    it = iter(text)
    for c in it:
        if c == "\\":
            nxt = next(it, "")
            if nxt not in _UNESC:
                raise ValueError(f"bad escape sequence \\{nxt}")
            out.append(_UNESC[nxt])
        else:
            out.append(c)
    return "".join(out)


@dataclass
class FormatDescriptor:
    """How to read a non-canonical tabular file.

    Parsed from ``key=value`` lines. Recognized keys: ``delimiter`` (``tab``,
    ``comma`` or a literal character), ``header`` (true/false), ``escape``
    (``backslash`` or ``none``; csv quoting is used when ``none``),
    ``column.<field>`` giving the source column name (or 0-based index when
    there is no header), and ``default.<field>`` for constant values.
    """

    delimiter: str = "\t"
    header: bool = True
    escape: str = "backslash"
    columns: Dict[str, str] = field(default_factory=lambda: {c: c for c in COLUMNS})
    defaults: Dict[str, str] = field(default_factory=dict)

    @classmethod
    def canonical(cls) -> "FormatDescriptor":
        return cls()

    @classmethod
    def parse(cls, text: str) -> "FormatDescriptor":
        d = cls(columns={})
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"descriptor line {lineno}: expected key=value")
            key, value = key.strip(), value.strip()
            if key == "delimiter":
                d.delimiter = {"tab": "\t", "\\t": "\t", "comma": ","}.get(value, value)
            elif key == "header":
                d.header = value.lower() in ("1", "true", "yes")
            elif key == "escape":
                if value not in ("backslash", "none"):
                    raise ValueError(f"descriptor line {lineno}: escape must be backslash or none")
                d.escape = value
            elif key.startswith("column."):
                d.columns[key[7:]] = value
            elif key.startswith("default."):
                d.defaults[key[8:]] = value
            else:
                raise ValueError(f"descriptor line {lineno}: unknown key {key!r}")
        unknown = (set(d.columns) | set(d.defaults)) - set(COLUMNS)
        if unknown:
            raise ValueError(f"descriptor names unknown fields {sorted(unknown)}")
        missing = {"sentence_id", "question", "answer"} - set(d.columns)
        if missing:
            raise ValueError(f"descriptor must map columns {sorted(missing)}")
        return d

    @classmethod
    def load(cls, path) -> "FormatDescriptor":
        with open(path, encoding="utf-8") as f:
            return cls.parse(f.read())


_FALLBACK = {"split": "train", "domain": "other", "sentence": "", "source": "GOLD",
             "verdict": Grammaticality.UNREVIEWED.value}


def _rows(text: str, fmt: FormatDescriptor) -> Iterable[Tuple[int, List[str]]]:
    if fmt.escape == "backslash":
        for lineno, line in enumerate(text.split("\n"), 1):
            line = line.rstrip("\r")
            if line:
                yield lineno, line.split(fmt.delimiter)
    else:
        reader = csv.reader(io.StringIO(text), delimiter=fmt.delimiter)
        for row in reader:
            if row:
                yield reader.line_num, row


def parse_records(text: str, fmt: Optional[FormatDescriptor] = None,
                  errors: Optional[List[DatasetError]] = None) -> List[DatasetRecord]:
    """Parse file contents into records.

    Row failures raise immediately unless an ``errors`` list is passed, in
    which case they are collected there and the bad rows skipped.
    """
    fmt = fmt or FormatDescriptor.canonical()
    rows = iter(_rows(text, fmt))
    if fmt.header:
        first = next(rows, None)
        if first is None:
            raise Malformed("missing header row", 1)
        header = first[1]
        missing = [c for c in fmt.columns.values() if c not in header]
        if missing:
            raise Malformed(f"header lacks columns {missing}", first[0])
        index = {f: header.index(c) for f, c in fmt.columns.items()}
    else:
        try:
            index = {f: int(c) for f, c in fmt.columns.items()}
        except ValueError:
            raise Malformed("column references must be integers when header=false") from None

    records = []
    for lineno, cols in rows:
        try:
            records.append(_row_record(cols, index, fmt, lineno))
        except DatasetError as e:
            if errors is None:
                raise
            errors.append(e)
    return records


def _row_record(cols, index, fmt, lineno) -> DatasetRecord:
    values = {}
    try:
        for f in COLUMNS:
            if f in index:
                raw = cols[index[f]]
                values[f] = unescape(raw) if fmt.escape == "backslash" else raw
            else:
                values[f] = fmt.defaults.get(f, _FALLBACK.get(f, ""))
    except IndexError:
        raise Malformed(f"expected at least {max(index.values()) + 1} columns, got {len(cols)}",
                        lineno) from None
    except ValueError as e:
        raise Malformed(str(e), lineno) from None
    return _make_record(values, lineno)


def _make_record(v: Mapping[str, str], lineno: int) -> DatasetRecord:
    try:
        prefix, aux, body = parse_question(v["question"])
    except NoPrefixMatch as e:
        raise UnknownPrefix(str(e), lineno) from None
    try:
        verdict = Grammaticality(v["verdict"].strip().upper() or "UNREVIEWED")
        qa = QAPair(prefix, aux, body, v["answer"], grammaticality=verdict)
        return DatasetRecord(v["sentence_id"], v["split"].strip().lower(),
                             v["domain"].strip().lower(), v["sentence"],
                             Source.parse(v["source"]), qa)
    except ValueError as e:
        raise Malformed(str(e), lineno) from None


def read_dataset(path, fmt: Optional[FormatDescriptor] = None,
                 errors: Optional[List[DatasetError]] = None) -> List[DatasetRecord]:
    with open(path, encoding="utf-8", newline="") as f:
        return parse_records(f.read(), fmt, errors)


def format_records(records: Iterable[DatasetRecord]) -> str:
    lines = ["\t".join(COLUMNS)]
    for r in sorted(records, key=lambda r: r.sort_key):
        fields = (r.sentence_id, r.split, r.domain, r.sentence, str(r.source),
                  r.qa.question, r.qa.answer, r.qa.grammaticality.value)
        lines.append("\t".join(escape(f) for f in fields))
    return "\n".join(lines) + "\n"


def write_dataset(records: Iterable[DatasetRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(format_records(records))


def group_sets(records: Iterable[DatasetRecord]) -> "OrderedDict[Tuple[str, str], AnnotationSet]":
    """Group records into one AnnotationSet per (sentence_id, source)."""
    grouped: "OrderedDict[Tuple[str, str], list]" = OrderedDict()
    sources = {}
    for r in records:
        key = (r.sentence_id, str(r.source))
        grouped.setdefault(key, []).append(r.qa)
        sources[key] = r.source
    return OrderedDict((k, AnnotationSet(k[0], sources[k], tuple(v))) for k, v in grouped.items())


def _norm(text: str) -> str:
    return " ".join(text.split())


def merge_adjudicated(a: AnnotationSet, b: AnnotationSet,
                      verdicts: Mapping[QAPair, Grammaticality]) -> AnnotationSet:
    """Keep the QAs an adjudicator accepted, dropping NOT_CORRECT ones and duplicates.

    Duplicates are QAs with the same whitespace-normalized question and
    answer; the first occurrence (``a`` before ``b``) wins. The verdict is
    stored on each surviving pair so ungrammatical ones can be fixed later.
    """
    if a.sentence_id != b.sentence_id:
        raise ValueError(f"cannot merge {a.sentence_id!r} with {b.sentence_id!r}")
    kept, seen = [], set()
    for qa in list(a.pairs) + list(b.pairs):
        verdict = verdicts.get(qa)
        if verdict is None or verdict is Grammaticality.UNREVIEWED:
            raise MissingVerdict(f"no verdict for {qa.question!r} in sentence {a.sentence_id!r}")
        if verdict is Grammaticality.NOT_CORRECT:
            continue
        key = (_norm(qa.question), _norm(qa.answer))
        if key in seen:
            continue
        seen.add(key)
        kept.append(QAPair(qa.prefix, qa.auxiliary, qa.question_body, qa.answer,
                           qa.source_targets, verdict))
    return AnnotationSet(a.sentence_id, GOLD, tuple(kept))


def merge_records(records: Sequence[DatasetRecord]) -> List[DatasetRecord]:
    """Adjudicate a file where each row's verdict column holds the adjudicator's label.

    Every sentence's worker sets are merged in order of first appearance.
    """
    by_sentence: "OrderedDict[str, List[DatasetRecord]]" = OrderedDict()
    for r in records:
        by_sentence.setdefault(r.sentence_id, []).append(r)
    out = []
    for sid, rows in by_sentence.items():
        sets = list(group_sets(rows).values())
        # the verdict column already sits on each pair, so pairs key their own verdicts
        verdicts = {r.qa: r.qa.grammaticality for r in rows}
        merged = AnnotationSet(sid, GOLD, ())
        for s in sets:
            merged = merge_adjudicated(merged, s, verdicts)
        first = rows[0]
        out += [DatasetRecord(sid, first.split, first.domain, first.sentence, GOLD, qa)
                for qa in merged.pairs]
    return out


@dataclass
class StatsReport:
    sentences_with_qa: int
    total_qas: int
    per_prefix: Dict[str, Tuple[int, float]]
    avg_question_tokens: float
    avg_answer_tokens: float
    per_domain_split: Dict[Tuple[str, str], Tuple[int, int]] = field(default_factory=dict)

    def as_rows(self) -> List[Tuple[str, object]]:
        rows = [("sentences_with_qa", self.sentences_with_qa), ("total_qas", self.total_qas)]
        for (domain, split), (ns, nq) in self.per_domain_split.items():
            rows.append((f"{domain}.{split}.sentences", ns))
            rows.append((f"{domain}.{split}.qas", nq))
        for surface, (count, prop) in self.per_prefix.items():
            rows.append((f"prefix[{surface}].count", count))
            rows.append((f"prefix[{surface}].proportion", prop))
        rows.append(("avg_question_tokens", self.avg_question_tokens))
        rows.append(("avg_answer_tokens", self.avg_answer_tokens))
        return rows


def dataset_stats(records: Sequence[DatasetRecord]) -> StatsReport:
    total = len(records)
    counts = Counter(r.qa.prefix.surface for r in records)
    per_prefix = {p.surface: (counts[p.surface], counts[p.surface] / total if total else 0.0)
                  for p in CATALOG}
    cells: Dict[Tuple[str, str], Tuple[set, int]] = {}
    for d in DOMAINS:
        for s in SPLITS:
            ids = {r.sentence_id for r in records if r.domain == d and r.split == s}
            n = sum(1 for r in records if r.domain == d and r.split == s)
            if n:
                cells[(d, s)] = (len(ids), n)
    q_tokens = sum(len(tokenize(r.qa.question)) for r in records)
    a_tokens = sum(len(tokenize(r.qa.answer)) for r in records)
    return StatsReport(
        len({r.sentence_id for r in records}), total, per_prefix,
        q_tokens / total if total else 0.0, a_tokens / total if total else 0.0, cells,
    )


@dataclass(frozen=True)
class TaggedRow:
    sentence: TaggedSentence
    split: str = "test"
    domain: str = "other"


def parse_tagged(text: str) -> List[TaggedRow]:
    """Rows of ``sentence_id<TAB>tokens<TAB>POS tags[<TAB>split[<TAB>domain]]``.

    Tokens and tags are space-separated and must pair up one to one. Tags may
    be coarse, Universal Dependencies or Penn Treebank.
    """
    rows = []
    for lineno, line in enumerate(text.split("\n"), 1):
        line = line.rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) < 3 or not cols[2].strip():
            raise Malformed("missing POS column", lineno)
        sid, toks, tags = cols[0], cols[1].split(), cols[2].split()
        split = cols[3].strip().lower() if len(cols) > 3 and cols[3].strip() else "test"
        domain = cols[4].strip().lower() if len(cols) > 4 and cols[4].strip() else "other"
        if split not in SPLITS or domain not in DOMAINS:
            raise Malformed(f"bad split/domain {split!r}/{domain!r}", lineno)
        try:
            rows.append(TaggedRow(TaggedSentence.from_lists(sid, toks, tags), split, domain))
        except ValueError as e:
            raise Malformed(str(e), lineno) from None
    return rows


def read_tagged(path) -> List[TaggedRow]:
    with open(path, encoding="utf-8") as f:
        return parse_tagged(f.read())

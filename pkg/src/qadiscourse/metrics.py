"""QA-set alignment by token-bag IOU, and the UQA / LQA / prefix-accuracy scores.

Two QA sets for the same sentence are aligned by drawing, for each QA on
either side, an edge to its maximal-IOU counterpart on the other side
(only when that IOU reaches 0.5). Connected components of the edge graph are
the alignment clusters; QAs with no edge stay unaligned.
"""

from __future__ import annotations

import itertools
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple, Union

from .grammar import CATALOG
from .model import AnnotationSet, PDTBRelation, QAPair

IOU_THRESHOLD = 0.5

_TOKEN_RE = re.compile(r"\w+(?:['’\-]\w+)*")


class SentenceMismatch(ValueError):
    pass


class InsufficientWorkers(ValueError):
    pass


TokenBag = Counter


def tokenize(text: str) -> List[str]:
    """Lowercased word tokens; punctuation is dropped."""
    return _TOKEN_RE.findall(text.lower())


def text_bag(*texts: str) -> TokenBag:
    bag: TokenBag = Counter()
    for t in texts:
        bag.update(tokenize(t))
    return bag


def qa_token_bag(qa: QAPair) -> TokenBag:
    # prefix and auxiliary are the label, not part of the span
    return text_bag(qa.question_body, qa.answer)


def iou(a: TokenBag, b: TokenBag) -> float:
    union = sum((a | b).values())
    if union == 0:
        return 0.0
    return sum((a & b).values()) / union


@dataclass
class AlignmentResult:
    clusters: List[Tuple[Tuple[int, ...], Tuple[int, ...]]]
    unaligned_left: Set[int]
    unaligned_right: Set[int]
    pairwise_iou: Dict[Tuple[int, int], float] = field(default_factory=dict)
    n_left: int = 0
    n_right: int = 0

    @property
    def aligned_left(self) -> int:
        return sum(len(l) for l, _ in self.clusters)

    @property
    def aligned_right(self) -> int:
        return sum(len(r) for _, r in self.clusters)

    def swapped(self) -> "AlignmentResult":
        return AlignmentResult(
            [(r, l) for l, r in self.clusters],
            set(self.unaligned_right), set(self.unaligned_left),
            {(j, i): v for (i, j), v in self.pairwise_iou.items()},
            self.n_right, self.n_left,
        )


def _best(scores: Sequence[float]) -> Optional[int]:
    best, best_i = -1.0, None
    for i, s in enumerate(scores):
        if s > best:
            best, best_i = s, i
    if best_i is None or best < IOU_THRESHOLD:
        return None
    return best_i


def align_bags(left: Sequence[TokenBag], right: Sequence[TokenBag]) -> AlignmentResult:
    n, m = len(left), len(right)
    scores = {(i, j): iou(left[i], right[j]) for i in range(n) for j in range(m)}

    parent = list(range(n + m))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    has_edge = [False] * (n + m)
    for i in range(n):
        j = _best([scores[i, j] for j in range(m)])
        if j is not None:
            union(i, n + j)
            has_edge[i] = has_edge[n + j] = True
    for j in range(m):
        i = _best([scores[i, j] for i in range(n)])
        if i is not None:
            union(i, n + j)
            has_edge[i] = has_edge[n + j] = True

    groups: Dict[int, Tuple[List[int], List[int]]] = {}
    for x in range(n + m):
        if not has_edge[x]:
            continue
        l, r = groups.setdefault(find(x), ([], []))
        (l if x < n else r).append(x if x < n else x - n)
    clusters = sorted((tuple(l), tuple(r)) for l, r in groups.values())
    return AlignmentResult(
        clusters,
        {i for i in range(n) if not has_edge[i]},
        {j for j in range(m) if not has_edge[n + j]},
        scores, n, m,
    )


def align_qa_sets(a: AnnotationSet, b: AnnotationSet) -> AlignmentResult:
    if a.sentence_id != b.sentence_id:
        raise SentenceMismatch(f"cannot align {a.sentence_id!r} with {b.sentence_id!r}")
    return align_bags([qa_token_bag(q) for q in a.pairs], [qa_token_bag(q) for q in b.pairs])


def align_pdtb(rel: Union[PDTBRelation, Sequence[PDTBRelation]], qas: AnnotationSet) -> AlignmentResult:
    """Align QAs (left) with PDTB relations (right), each relation as one Arg1+Arg2 bag."""
    rels = [rel] if isinstance(rel, PDTBRelation) else list(rel)
    return align_bags([qa_token_bag(q) for q in qas.pairs],
                      [text_bag(r.arg1_text, r.arg2_text) for r in rels])


def _ratio(num, den) -> float:
    return num / den if den else 0.0


def f1_score(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r else 0.0


def uqa_scores(r: AlignmentResult) -> Tuple[float, float, float]:
    p = _ratio(r.aligned_left, r.n_left)
    rec = _ratio(r.aligned_right, r.n_right)
    return p, rec, f1_score(p, rec)


def _labels(pairs, idx):
    return {pairs[i].prefix.canonical for i in idx}


def _lqa_counts(r: AlignmentResult, a: AnnotationSet, b: AnnotationSet) -> Tuple[int, int]:
    correct = sum(1 for l, rr in r.clusters if _labels(a.pairs, l) & _labels(b.pairs, rr))
    return correct, len(r.clusters)


def lqa_accuracy(r: AlignmentResult, a: AnnotationSet, b: AnnotationSet) -> float:
    return _ratio(*_lqa_counts(r, a, b))


def _prefix_hits(r: AlignmentResult, a: AnnotationSet, b: AnnotationSet) -> List[bool]:
    """Per gold QA (side b): is its canonical label among its cluster's predicted labels."""
    hits = [False] * len(b.pairs)
    for l, rr in r.clusters:
        pred = _labels(a.pairs, l)
        for j in rr:
            hits[j] = b.pairs[j].prefix.canonical in pred
    return hits


def prefix_accuracy(r: AlignmentResult, a: AnnotationSet, b: AnnotationSet) -> float:
    hits = _prefix_hits(r, a, b)
    return _ratio(sum(hits), len(hits))


@dataclass
class SentenceCounts:
    """Poolable counts behind every metric for one aligned sentence."""

    n_pred: int = 0
    n_gold: int = 0
    aligned_pred: int = 0
    aligned_gold: int = 0
    clusters: int = 0
    correct_clusters: int = 0
    prefix_hits: int = 0
    per_prefix: Counter = field(default_factory=Counter)
    per_prefix_hits: Counter = field(default_factory=Counter)

    def __iadd__(self, other: "SentenceCounts"):
        self.n_pred += other.n_pred
        self.n_gold += other.n_gold
        self.aligned_pred += other.aligned_pred
        self.aligned_gold += other.aligned_gold
        self.clusters += other.clusters
        self.correct_clusters += other.correct_clusters
        self.prefix_hits += other.prefix_hits
        self.per_prefix.update(other.per_prefix)
        self.per_prefix_hits.update(other.per_prefix_hits)
        return self

    @property
    def precision(self):
        return _ratio(self.aligned_pred, self.n_pred)

    @property
    def recall(self):
        return _ratio(self.aligned_gold, self.n_gold)

    @property
    def f1(self):
        return f1_score(self.precision, self.recall)

    @property
    def lqa(self):
        return _ratio(self.correct_clusters, self.clusters)

    @property
    def prefix_accuracy(self):
        return _ratio(self.prefix_hits, self.n_gold)


def sentence_counts(pred: AnnotationSet, gold: AnnotationSet) -> SentenceCounts:
    r = align_qa_sets(pred, gold)
    correct, total = _lqa_counts(r, pred, gold)
    hits = _prefix_hits(r, pred, gold)
    c = SentenceCounts(len(pred), len(gold), r.aligned_left, r.aligned_right,
                       total, correct, sum(hits))
    for qa, hit in zip(gold.pairs, hits):
        c.per_prefix[qa.prefix.surface] += 1
        c.per_prefix_hits[qa.prefix.surface] += int(hit)
    return c


@dataclass
class MetricsReport:
    uqa_precision: float
    uqa_recall: float
    uqa_f1: float
    lqa_accuracy: float
    prefix_accuracy: float
    per_prefix_breakdown: Dict[str, Tuple[int, int]]
    macro: Dict[str, float] = field(default_factory=dict)
    n_sentences: int = 0

    def as_rows(self) -> List[Tuple[str, float]]:
        rows = [
            ("sentences", self.n_sentences),
            ("uqa_precision", self.uqa_precision),
            ("uqa_recall", self.uqa_recall),
            ("uqa_f1", self.uqa_f1),
            ("lqa_accuracy", self.lqa_accuracy),
            ("prefix_accuracy", self.prefix_accuracy),
        ]
        rows += [(f"macro_{k}", v) for k, v in self.macro.items()]
        for surface, (count, matched) in self.per_prefix_breakdown.items():
            rows.append((f"prefix[{surface}].count", count))
            rows.append((f"prefix[{surface}].matched", matched))
        return rows


def score_sets(pairs: Sequence[Tuple[AnnotationSet, AnnotationSet]]) -> MetricsReport:
    """Micro-pooled scores over (predicted, gold) sentence pairs; macro variants alongside."""
    total = SentenceCounts()
    per_sentence = []
    for pred, gold in pairs:
        c = sentence_counts(pred, gold)
        total += c
        per_sentence.append(c)
    n = len(per_sentence)
    macro = {
        "uqa_precision": _ratio(sum(c.precision for c in per_sentence), n),
        "uqa_recall": _ratio(sum(c.recall for c in per_sentence), n),
        "uqa_f1": _ratio(sum(c.f1 for c in per_sentence), n),
        "lqa_accuracy": _ratio(sum(c.lqa for c in per_sentence), n),
        "prefix_accuracy": _ratio(sum(c.prefix_accuracy for c in per_sentence), n),
    }
    breakdown = {p.surface: (total.per_prefix[p.surface], total.per_prefix_hits[p.surface])
                 for p in CATALOG if total.per_prefix[p.surface]}
    return MetricsReport(total.precision, total.recall, total.f1, total.lqa,
                         total.prefix_accuracy, breakdown, macro, n)


def compute_iaa(annotations: Mapping[str, Mapping[str, AnnotationSet]],
                sentences: Optional[Sequence[str]] = None) -> Tuple[float, float]:
    """Mean pairwise (UQA F1, LQA accuracy) across all unordered worker pairs.

    ``annotations`` maps worker -> sentence id -> that worker's set. Each pair
    is scored micro-pooled over the sentences both workers annotated.
    """
    workers = sorted(annotations)
    wanted = set(sentences) if sentences is not None else None
    scores = []
    for w1, w2 in itertools.combinations(workers, 2):
        shared = set(annotations[w1]) & set(annotations[w2])
        if wanted is not None:
            shared &= wanted
        if not shared:
            continue
        total = SentenceCounts()
        for sid in sorted(shared):
            total += sentence_counts(annotations[w1][sid], annotations[w2][sid])
        scores.append((total.f1, total.lqa))
    if not scores:
        raise InsufficientWorkers("need at least two workers sharing a sentence")
    return (sum(s[0] for s in scores) / len(scores), sum(s[1] for s in scores) / len(scores))


def compute_iaa_samples(annotations: Mapping[str, Mapping[str, AnnotationSet]],
                        samples: Sequence[Sequence[str]]) -> Tuple[float, float]:
    """Average :func:`compute_iaa` over repeated samples of sentences."""
    results = [compute_iaa(annotations, s) for s in samples]
    if not results:
        raise InsufficientWorkers("no samples given")
    return (sum(r[0] for r in results) / len(results), sum(r[1] for r in results) / len(results))

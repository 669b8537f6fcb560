"""Non-neural three-stage parser: prefix prediction, question generation, answer generation.

Prefix prediction is a one-vs-rest logistic model over sparse indicator
features of the target; the other two stages are copy-only rules over the
sentence's segments. Each stage is a plain callable so any of them can be
swapped for a stronger model through :class:`Pipeline`.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import (Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Set,
                    Tuple)

import numpy as np
from scipy import sparse
from scipy.special import expit

from .grammar import (CATALOG, AUXILIARIES, ComposedQuestion, EmptyBody, NoPrefixMatch,
                      compose_question, get_prefix, parse_question)
from .metrics import text_bag, tokenize
from .model import SYSTEM, POS, AnnotationSet, QAPair, QuestionPrefix, TaggedSentence
from .targets import (ConnectiveLexicon, Segment, extract_targets, segment_of,
                      segment_sentence, segment_text)

log = logging.getLogger(__name__)

MODEL_FORMAT = "qadiscourse-prefix-model"
MODEL_VERSION = 1
DEFAULT_TAU = 0.3
UNK = "<unk>"
WINDOW = 3


class EmptyTrainingSet(ValueError):
    pass


class NoTargets(ValueError):
    pass


class NoCandidate(ValueError):
    pass


def class_weight(count_x: int, total: int) -> float:
    """Positive-example weight for a label seen ``count_x`` times in ``total`` instances.

    (total - count) / count, with the count floored at 1e-5 so unseen labels
    get a large finite weight instead of a division by zero.
    """
    if not 0 <= count_x <= total:
        raise ValueError(f"need 0 <= count ({count_x}) <= total ({total})")
    return (total - count_x) / max(count_x, 1e-5)


# -- features -----------------------------------------------------------------

def target_features(sentence: TaggedSentence, target: int, lexicon: ConnectiveLexicon,
                    segments: Optional[Sequence[Segment]] = None) -> Dict[str, float]:
    segments = segments if segments is not None else segment_sentence(sentence, lexicon)
    toks = sentence.tokens
    tok = toks[target]
    feats = {"bias": 1.0, f"w={tok.surface.lower()}": 1.0, f"pos={tok.pos.value}": 1.0}
    for off in range(-WINDOW, WINDOW + 1):
        j = target + off
        if off and 0 <= j < len(toks):
            feats[f"w[{off}]={toks[j].surface.lower()}"] = 1.0
    k = next(i for i, s in enumerate(segments) if target in s)
    seg = segments[k]
    feats[f"seg_conn={seg.connective or '-'}"] = 1.0
    if k + 1 < len(segments):
        feats[f"next_conn={segments[k + 1].connective or '-'}"] = 1.0
    if k > 0:
        feats[f"prev_conn={segments[k - 1].connective or '-'}"] = 1.0
    if len(segments) == 1:
        where = "only"
    else:
        where = "first" if k == 0 else "last" if k == len(segments) - 1 else "middle"
    feats[f"seg_pos={where}"] = 1.0
    if segments[0].starts_with_connective:
        feats["sent_init_conn"] = 1.0
        feats[f"sent_init_conn={segments[0].connective}"] = 1.0
    return feats


# -- prefix model ---------------------------------------------------------------

@dataclass
class PrefixModel:
    vocabulary: Dict[str, int]
    weights: np.ndarray  # (n_prefixes, n_features)
    tau: float = DEFAULT_TAU
    class_weights: Dict[str, float] = field(default_factory=dict)
    prefixes: Tuple[str, ...] = tuple(p.surface for p in CATALOG)

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"tau must lie in [0, 1], got {self.tau}")
        if self.weights.shape != (len(self.prefixes), len(self.vocabulary)):
            raise ValueError("weight matrix does not match prefixes x vocabulary")
        if UNK not in self.vocabulary:
            raise ValueError(f"vocabulary lacks the reserved {UNK!r} bucket")

    def vectorize(self, rows: Sequence[Mapping[str, float]]) -> sparse.csr_matrix:
        data, indices, indptr = [], [], [0]
        unk = self.vocabulary[UNK]
        for feats in rows:
            merged: Dict[int, float] = {}
            for name, value in feats.items():
                j = self.vocabulary.get(name, unk)
                merged[j] = merged.get(j, 0.0) + value
            indices.extend(merged)
            data.extend(merged.values())
            indptr.append(len(indices))
        return sparse.csr_matrix((data, indices, indptr), shape=(len(rows), len(self.vocabulary)))

    def scores(self, feats: Mapping[str, float]) -> Dict[str, float]:
        probs = expit(self.vectorize([feats]) @ self.weights.T)[0]
        return dict(zip(self.prefixes, map(float, probs)))

    def to_json(self) -> dict:
        vocab = sorted(self.vocabulary, key=self.vocabulary.get)
        return {
            "format": MODEL_FORMAT, "version": MODEL_VERSION, "tau": self.tau,
            "prefixes": list(self.prefixes), "vocabulary": vocab,
            "class_weights": self.class_weights,
            "weights": [[float(x) for x in row] for row in self.weights],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PrefixModel":
        if obj.get("format") != MODEL_FORMAT or obj.get("version") != MODEL_VERSION:
            raise ValueError("not a version-1 prefix model file")
        prefixes = tuple(obj["prefixes"])
        if set(prefixes) != {p.surface for p in CATALOG}:
            raise ValueError("model prefixes do not match the catalog")
        return cls({f: i for i, f in enumerate(obj["vocabulary"])},
                   np.asarray(obj["weights"], dtype=float), float(obj["tau"]),
                   dict(obj.get("class_weights", {})), prefixes)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_json(), f, sort_keys=True)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "PrefixModel":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(json.load(f))


def train_prefix_classifier(examples: Sequence[Tuple[Mapping[str, float], Iterable]],
                            tau: float = DEFAULT_TAU, iterations: int = 200,
                            learning_rate: float = 0.1, seed: int = 0) -> PrefixModel:
    """Fit 17 independent weighted logistic models by full-batch gradient descent.

    Gold labels may be prefixes or prefix surfaces. Positive examples of each
    prefix are weighted by :func:`class_weight`; each model's loss is averaged
    over its total example weight, so uniformly duplicating the data leaves
    the optimisation unchanged.
    """
    if not examples:
        raise EmptyTrainingSet("no training examples")
    surfaces = tuple(p.surface for p in CATALOG)
    col = {s: k for k, s in enumerate(surfaces)}
    names = sorted({f for feats, _ in examples for f in feats})
    vocab = {UNK: 0}
    for f in names:
        vocab.setdefault(f, len(vocab))

    n, k = len(examples), len(surfaces)
    y = np.zeros((n, k))
    for i, (_, gold) in enumerate(examples):
        for p in gold:
            y[i, col[p.surface if isinstance(p, QuestionPrefix) else get_prefix(p).surface]] = 1.0
    counts = y.sum(axis=0)
    cw = np.array([class_weight(int(c), n) for c in counts])
    w = np.where(y > 0, cw, 1.0)
    norm = w.sum(axis=0)
    norm[norm == 0] = 1.0

    rng = np.random.default_rng(seed)
    theta = rng.normal(scale=1e-3, size=(k, len(vocab)))
    model = PrefixModel(vocab, theta, tau, dict(zip(surfaces, map(float, cw))), surfaces)
    x = model.vectorize([feats for feats, _ in examples])
    xt = x.T.tocsr()
    for it in range(iterations):
        p = expit(x @ theta.T)
        grad = (xt @ (w * (p - y) / norm)).T
        theta -= learning_rate * grad
    model.weights = theta
    log.info("trained prefix model on %d examples, %d features", n, len(vocab))
    return model


def predict_prefixes(model: PrefixModel, sentence: TaggedSentence, target: int,
                     lexicon: Optional[ConnectiveLexicon] = None,
                     tau: Optional[float] = None) -> Set[QuestionPrefix]:
    if target not in sentence.targets:
        raise ValueError(f"{target} is not a target of sentence {sentence.id!r}")
    tau = model.tau if tau is None else tau
    scores = model.scores(target_features(sentence, target, lexicon or ConnectiveLexicon.default()))
    return {get_prefix(s) for s, v in scores.items() if v >= tau}


# -- question and answer generation ------------------------------------------------

_AUX = frozenset(AUXILIARIES)


def _do_support(word: str) -> str:
    w = word.lower()
    if w.endswith("ed"):
        return "did"
    if w.endswith("s") and not w.endswith("ss"):
        return "does"
    return "do"


def generate_question(sentence: TaggedSentence, prefix: QuestionPrefix, targets: Iterable[int],
                      lexicon: Optional[ConnectiveLexicon] = None) -> List[ComposedQuestion]:
    """One question per target: its segment's text, minus any leading connective.

    "What is ..." prefixes take no auxiliary. Otherwise an auxiliary verb
    before the target is moved to the front ("could it hit"), or a form of
    *do* is chosen from the target's ending.
    """
    targets = list(targets)
    if not targets:
        raise NoTargets("no targets to ask about")
    lexicon = lexicon or ConnectiveLexicon.default()
    segments = segment_sentence(sentence, lexicon)
    toks = sentence.tokens
    out = []
    for t in targets:
        seg = segment_of(segments, t)
        start = seg.start + (len(seg.connective.split()) if seg.connective else 0)
        idx = list(range(start, seg.end))
        while idx and toks[idx[0]].pos is POS.PUNCT:
            idx.pop(0)
        while idx and toks[idx[-1]].pos is POS.PUNCT:
            idx.pop()
        if not idx:
            idx = [t]
        aux = None
        if not prefix.surface.startswith("What is"):
            moved = next((i for i in idx if i < t and toks[i].pos is POS.VERB
                          and toks[i].surface.lower() in _AUX), None)
            if moved is not None and idx.index(moved) > 0:
                aux = toks[moved].surface.lower()
                idx.remove(moved)
            else:
                aux = _do_support(toks[t].surface)
        words = [toks[i].surface for i in idx]
        if idx[0] == 0 and toks[0].pos is not POS.NOUN:
            words[0] = words[0].lower()
        out.append(compose_question(prefix, aux, words))
    return out


# connective -> prefix surfaces it signals at the start of an answer
DEFAULT_COMPAT = {
    "because": ("What is the reason",), "because of": ("What is the reason",),
    "since": ("What is the reason",), "so": ("What is the result of",),
    "so that": ("What is the result of",), "if": ("In what case",),
    "when": ("While what", "In what case"), "unless": ("Unless what",),
    "although": ("Despite what",), "though": ("Despite what",), "despite": ("Despite what",),
    "while": ("While what",), "after": ("After what",), "before": ("Before what",),
    "instead of": ("Instead of what",),
}


def load_compat_table(path) -> Dict[str, Tuple[str, ...]]:
    """``connective<TAB>prefix surface`` per line; repeated connectives accumulate."""
    table: Dict[str, List[str]] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            conn, sep, surface = line.partition("\t")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected connective<TAB>prefix")
            table.setdefault(" ".join(conn.lower().split()), []).append(
                get_prefix(surface).surface)
    return {k: tuple(v) for k, v in table.items()}


def generate_answer(sentence: TaggedSentence, question: ComposedQuestion,
                    lexicon: Optional[ConnectiveLexicon] = None,
                    compat: Optional[Mapping[str, Sequence[str]]] = None) -> str:
    """Pick the segment that best answers ``question``.

    The question's own segment is the one sharing the most tokens with its
    body; every other segment is a candidate. Score = 1 if the candidate's
    leading connective signals the question's sense, plus 1/distance.
    Ties go to the nearest segment on the left.
    """
    lexicon = lexicon or ConnectiveLexicon.default()
    compat = DEFAULT_COMPAT if compat is None else compat
    segments = segment_sentence(sentence, lexicon)
    texts = [segment_text(sentence, s) for s in segments]
    body = text_bag(question.body)
    overlap = [sum((text_bag(t) & body).values()) for t in texts]
    home = max(range(len(segments)), key=lambda i: (overlap[i], -i))
    sense = question.prefix.sense
    best, best_key = None, None
    for i, seg in enumerate(segments):
        if i == home or not texts[i]:
            continue
        signalled = compat.get(seg.connective or "", ())
        bonus = 1.0 if any(get_prefix(s).sense == sense for s in signalled) else 0.0
        dist = abs(i - home)
        key = (bonus + 1.0 / dist, -dist, i < home)
        if best_key is None or key > best_key:
            best, best_key = i, key
    if best is None:
        raise NoCandidate(f"no answer candidate in sentence {sentence.id!r}")
    return texts[best]


# -- pipeline -----------------------------------------------------------------------

PrefixStage = Callable[[TaggedSentence, int], Set[QuestionPrefix]]
QuestionStage = Callable[[TaggedSentence, QuestionPrefix, Sequence[int]], List[ComposedQuestion]]
AnswerStage = Callable[[TaggedSentence, ComposedQuestion], str]


@dataclass
class Pipeline:
    predict_prefixes: PrefixStage
    generate_question: QuestionStage
    generate_answer: AnswerStage

    @classmethod
    def baseline(cls, model: PrefixModel, lexicon: Optional[ConnectiveLexicon] = None,
                 compat=None, tau: Optional[float] = None) -> "Pipeline":
        lexicon = lexicon or ConnectiveLexicon.default()
        return cls(
            lambda s, t: predict_prefixes(model, s, t, lexicon, tau),
            lambda s, p, ts: generate_question(s, p, ts, lexicon),
            lambda s, q: generate_answer(s, q, lexicon, compat),
        )


_STAGE_ERRORS = (NoTargets, NoCandidate, EmptyBody, NoPrefixMatch)


def parse_sentence(pipeline: Pipeline, sentence: TaggedSentence) -> AnnotationSet:
    targets = sorted(sentence.targets)
    by_prefix: Dict[QuestionPrefix, List[int]] = {}
    for t in targets:
        for p in pipeline.predict_prefixes(sentence, t):
            by_prefix.setdefault(p, []).append(t)
    pairs, seen = [], set()
    for p in CATALOG:
        if p not in by_prefix:
            continue
        try:
            questions = pipeline.generate_question(sentence, p, by_prefix[p])
        except _STAGE_ERRORS as e:
            log.debug("question stage dropped %s on %s: %s", p, sentence.id, e)
            continue
        for q in questions:
            try:
                answer = pipeline.generate_answer(sentence, q)
                prefix, aux, body = parse_question(q.full_text)
                qa = QAPair(prefix, aux, body, answer)
            except _STAGE_ERRORS + (ValueError,) as e:
                log.debug("answer stage dropped %r: %s", q.full_text, e)
                continue
            key = (qa.question, qa.answer)
            if key not in seen:
                seen.add(key)
                pairs.append(qa)
    return AnnotationSet(sentence.id, SYSTEM, tuple(pairs[:len(targets) * len(CATALOG)]))


# -- training data -------------------------------------------------------------------

def target_labels(sentence: TaggedSentence, qas: Iterable[QAPair]) -> Dict[int, Set[str]]:
    """Assign each gold QA's prefix to every target whose word occurs in its question body."""
    labels = {t: set() for t in sentence.targets}
    for qa in qas:
        body = set(tokenize(qa.question_body))
        for t in sentence.targets:
            if sentence.tokens[t].surface.lower() in body:
                labels[t].add(qa.prefix.surface)
    return labels


def build_examples(sentences: Iterable[TaggedSentence], gold: Mapping[str, Sequence[QAPair]],
                   lexicon: ConnectiveLexicon) -> List[Tuple[Dict[str, float], Set[str]]]:
    examples = []
    for s in sentences:
        if s.id not in gold:
            continue
        if not s.targets:
            s = s.with_targets(extract_targets(s, lexicon))
        segments = segment_sentence(s, lexicon)
        labels = target_labels(s, gold[s.id])
        for t in sorted(s.targets):
            examples.append((target_features(s, t, lexicon, segments), labels[t]))
    return examples

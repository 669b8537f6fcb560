"""Shared domain types: tagged sentences, question prefixes, QA pairs."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import FrozenSet, Optional, Tuple


class POS(str, enum.Enum):
    """Coarse part-of-speech tags. External taggers are mapped onto these."""

    VERB = "VERB"
    ADV = "ADV"
    NOUN = "NOUN"
    OTHER_OPEN = "OTHER-open"
    PUNCT = "PUNCT"
    OTHER = "OTHER"


TARGET_POS = frozenset({POS.VERB, POS.NOUN, POS.ADV})

_UNIVERSAL = {
    "VERB": POS.VERB, "AUX": POS.VERB,
    "NOUN": POS.NOUN, "PROPN": POS.NOUN,
    "ADV": POS.ADV,
    "ADJ": POS.OTHER_OPEN, "OTHER-OPEN": POS.OTHER_OPEN, "INTJ": POS.OTHER_OPEN,
    "PUNCT": POS.PUNCT, "SYM": POS.OTHER,
}


def coarse_pos(tag: str) -> POS:
    """Map a Universal Dependencies or Penn Treebank tag onto the coarse set."""
    t = tag.strip().upper()
    if not t:
        raise ValueError("empty POS tag")
    if t in _UNIVERSAL:
        return _UNIVERSAL[t]
    if t in POS.__members__:
        return POS[t]
    # Penn Treebank
    if t.startswith("VB") or t == "MD":
        return POS.VERB
    if t.startswith("NN"):
        return POS.NOUN
    if t.startswith("RB") or t == "WRB":
        return POS.ADV
    if t.startswith("JJ") or t == "FW":
        return POS.OTHER_OPEN
    if t in {",", ".", ":", "``", "''", "-LRB-", "-RRB-", "HYPH", "NFP", "(", ")", "#", "$"}:
        return POS.PUNCT
    return POS.OTHER


@dataclass(frozen=True)
class Token:
    surface: str
    pos: POS


@dataclass(frozen=True)
class TaggedSentence:
    id: str
    tokens: Tuple[Token, ...]
    targets: FrozenSet[int] = frozenset()

    def __post_init__(self):
        if not self.tokens:
            raise ValueError(f"sentence {self.id!r} has no tokens")
        n = len(self.tokens)
        for i in self.targets:
            if not 0 <= i < n:
                raise ValueError(f"target index {i} out of range for sentence {self.id!r}")
            if self.tokens[i].pos not in TARGET_POS:
                raise ValueError(
                    f"target {i} ({self.tokens[i].surface!r}) is {self.tokens[i].pos.value}, "
                    "not VERB/NOUN/ADV")

    @classmethod
    def from_lists(cls, id, surfaces, tags, targets=()):
        if len(surfaces) != len(tags):
            raise ValueError(f"sentence {id!r}: {len(surfaces)} tokens but {len(tags)} POS tags")
        toks = tuple(Token(s, t if isinstance(t, POS) else coarse_pos(t))
                     for s, t in zip(surfaces, tags))
        return cls(id, toks, frozenset(targets))

    @property
    def surfaces(self) -> Tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)

    @property
    def text(self) -> str:
        return " ".join(self.surfaces)

    def with_targets(self, targets) -> "TaggedSentence":
        return replace(self, targets=frozenset(targets))

    def __len__(self):
        return len(self.tokens)


class Direction(str, enum.Enum):
    FIXED = "FIXED"
    SYMMETRIC = "SYMMETRIC"
    REVERSED = "REVERSED"


@dataclass(frozen=True)
class QuestionPrefix:
    """One question prefix; members of the closed catalog in :mod:`qadiscourse.grammar`.

    ``reverse_partner`` holds the partner's surface string (not the object) so
    the value stays hashable and acyclic.
    """

    surface: str
    sense: str
    direction: Direction
    canonical: str
    reverse_partner: Optional[str] = None

    def __str__(self):
        return self.surface


class Grammaticality(str, enum.Enum):
    UNREVIEWED = "UNREVIEWED"
    CORRECT = "CORRECT"
    NOT_CORRECT = "NOT_CORRECT"
    CORRECT_NOT_GRAMMATICAL = "CORRECT_NOT_GRAMMATICAL"


@dataclass(frozen=True)
class QAPair:
    prefix: QuestionPrefix
    auxiliary: Optional[str]
    question_body: str
    answer: str
    source_targets: Optional[Tuple[int, int]] = None
    grammaticality: Grammaticality = Grammaticality.UNREVIEWED

    def __post_init__(self):
        if not self.question_body.strip():
            raise ValueError("empty question body")
        if not self.answer.strip():
            raise ValueError("empty answer")

    @property
    def question(self) -> str:
        parts = [self.prefix.surface]
        if self.auxiliary:
            parts.append(self.auxiliary)
        parts.append(self.question_body)
        return " ".join(parts)

    def check_targets(self, sentence: TaggedSentence):
        if self.source_targets is None:
            return
        bad = [i for i in self.source_targets if i not in sentence.targets]
        if bad:
            raise ValueError(f"QA source targets {bad} are not targets of sentence {sentence.id!r}")


@dataclass(frozen=True)
class Source:
    """Who produced an annotation set: a worker, the gold set, or a system."""

    kind: str  # "WORKER" | "GOLD" | "SYSTEM"
    worker_id: Optional[str] = None

    @classmethod
    def parse(cls, text: str) -> "Source":
        t = text.strip()
        if t in ("GOLD", "SYSTEM"):
            return cls(t)
        if not t:
            raise ValueError("empty source")
        return cls("WORKER", t)

    def __str__(self):
        return self.worker_id if self.kind == "WORKER" else self.kind


GOLD = Source("GOLD")
SYSTEM = Source("SYSTEM")


@dataclass(frozen=True)
class AnnotationSet:
    sentence_id: str
    source: Source
    pairs: Tuple[QAPair, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


@dataclass(frozen=True)
class PDTBRelation:
    arg1_text: str
    arg2_text: str
    senses: Tuple[str, ...]
    connective: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "senses", tuple(self.senses))
        if not self.arg1_text.strip() or not self.arg2_text.strip():
            raise ValueError("PDTB relation arguments must be non-empty")
        if not self.senses:
            raise ValueError("PDTB relation needs at least one sense")

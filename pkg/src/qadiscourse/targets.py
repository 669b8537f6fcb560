"""Sentence segmentation and target-word selection.

A sentence is split on ``,`` ``;`` ``:`` and then before every discourse
connective. Each segment contributes the last verb of every consecutive verb
run; a verbless segment that opens with a connective contributes one noun
(or adverb) instead.
"""

from __future__ import annotations

import os
import shlex
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from .model import POS, TaggedSentence

SPLIT_PUNCT = frozenset({",", ";", ":"})
EXCLUDED_VERBS = frozenset({"said", "according", "spoke"})

# Explicit connectives (PDTB 2.0 list plus a few multiword PDTB 3.0 additions).
DEFAULT_CONNECTIVES = """
accordingly additionally after afterward afterwards albeit also alternatively although and
as "as a result" "as an alternative" "as if" "as long as" "as soon as" "as though" "as well"
because "because of" before "before and after" besides but "by comparison" "by contrast"
"by then" consequently conversely despite earlier else except "except when" finally for
"for example" "for instance" further furthermore hence if "if and when" "in addition"
"in contrast" "in fact" "in other words" "in particular" "in short" "in spite of" "in sum"
"in the end" "in turn" indeed "insofar as" instead "instead of" later lest likewise meantime
meanwhile moreover "much as" nevertheless next nonetheless nor "now that" "on the contrary"
"on the other hand" once or otherwise overall previously rather "rather than" regardless
separately similarly simultaneously since so "so that" specifically still then thereafter
thereby therefore though thus till ultimately unless until when "when and if" whereas while
whilst yet
"""

# Tokens with common non-connective syntactic uses.
DEFAULT_EXCLUSIONS = frozenset({
    "so", "as", "to", "about", "for", "also", "and", "or", "still", "then", "yet", "next",
    "further", "later", "earlier", "else", "rather", "overall", "finally",
})


def _parse_word_list(text: str) -> List[str]:
    return [w.lower() for w in shlex.split(text)]


@dataclass(frozen=True)
class ConnectiveLexicon:
    connectives: FrozenSet[str]
    excluded_ambiguous: FrozenSet[str] = frozenset()

    def __post_init__(self):
        conns = frozenset(" ".join(c.lower().split()) for c in self.connectives)
        excl = frozenset(" ".join(c.lower().split()) for c in self.excluded_ambiguous)
        object.__setattr__(self, "connectives", conns - excl)
        object.__setattr__(self, "excluded_ambiguous", excl)
        index: Dict[str, List[Tuple[str, ...]]] = {}
        for c in self.connectives:
            toks = tuple(c.split())
            index.setdefault(toks[0], []).append(toks)
        for v in index.values():
            v.sort(key=len, reverse=True)
        object.__setattr__(self, "_index", index)

    @classmethod
    def default(cls) -> "ConnectiveLexicon":
        return cls(frozenset(_parse_word_list(DEFAULT_CONNECTIVES)), DEFAULT_EXCLUSIONS)

    @classmethod
    def load(cls, path, base: Optional["ConnectiveLexicon"] = None) -> "ConnectiveLexicon":
        """Read one connective per line; ``#`` comments, ``!word`` adds an exclusion.

        Default exclusions always apply on top of whatever the file lists.
        """
        conns: Set[str] = set(base.connectives) if base else set()
        excl: Set[str] = set(DEFAULT_EXCLUSIONS)
        with open(path, encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if line.startswith("!"):
                    excl.add(line[1:].strip().lower())
                else:
                    conns.add(line.lower())
        return cls(frozenset(conns), frozenset(excl))

    @classmethod
    def from_env(cls, path=None) -> "ConnectiveLexicon":
        path = path or os.environ.get("QADISC_LEXICON")
        return cls.load(path) if path else cls.default()

    def match_at(self, words: Tuple[str, ...], i: int) -> int:
        """Length in tokens of the longest connective starting at ``words[i]`` (0 if none)."""
        for cand in self._index.get(words[i], ()):
            if tuple(words[i:i + len(cand)]) == cand:
                return len(cand)
        return 0


@dataclass(frozen=True)
class Segment:
    start: int
    end: int
    starts_with_connective: bool = False
    connective: Optional[str] = None

    @property
    def token_span(self) -> Tuple[int, int]:
        return (self.start, self.end)

    def __contains__(self, i):
        return self.start <= i < self.end

    def __len__(self):
        return self.end - self.start


def segment_sentence(sentence: TaggedSentence, lexicon: ConnectiveLexicon) -> List[Segment]:
    words = tuple(t.surface.lower() for t in sentence.tokens)
    spans = []
    start = 0
    for i, w in enumerate(words):
        if w in SPLIT_PUNCT:
            if i > start:
                spans.append((start, i))
            start = i + 1
    if start < len(words):
        spans.append((start, len(words)))

    segments = []
    for s, e in spans:
        cur, conn = s, None
        i = s
        while i < e:
            n = lexicon.match_at(words, i)
            if n and i + n <= e:
                if i > cur:
                    segments.append(Segment(cur, i, conn is not None, conn))
                cur, conn = i, " ".join(words[i:i + n])
                i += n
            else:
                i += 1
        segments.append(Segment(cur, e, conn is not None, conn))
    return segments


def _verb_runs(sentence: TaggedSentence, seg: Segment) -> List[Tuple[int, int]]:
    """Maximal verb runs inside a segment as inclusive (first, last) index pairs.

    A single adverb, or the infinitive marker ``to``, between two verbs keeps
    the run going ("is also studying", "try to replace").
    """
    toks = sentence.tokens
    runs = []
    i = seg.start
    while i < seg.end:
        if toks[i].pos is not POS.VERB:
            i += 1
            continue
        first = last = i
        j = i + 1
        while j < seg.end:
            if toks[j].pos is POS.VERB:
                last = j
                j += 1
            elif (j + 1 < seg.end and toks[j + 1].pos is POS.VERB
                  and (toks[j].pos is POS.ADV or toks[j].surface.lower() == "to")):
                last = j + 1
                j += 2
            else:
                break
        runs.append((first, last))
        i = last + 1
    return runs


def _segment_targets(sentence: TaggedSentence, seg: Segment) -> Set[int]:
    toks = sentence.tokens
    runs = _verb_runs(sentence, seg)
    if runs:
        return {last for _, last in runs if toks[last].surface.lower() not in EXCLUDED_VERBS}
    if not seg.starts_with_connective:
        return set()
    body_start = seg.start + len(seg.connective.split())
    for pos in (POS.NOUN, POS.ADV):
        for i in range(body_start, seg.end):
            if toks[i].pos is pos:
                return {i}
    return set()


def extract_targets(sentence: TaggedSentence, lexicon: ConnectiveLexicon) -> FrozenSet[int]:
    targets: Set[int] = set()
    for seg in segment_sentence(sentence, lexicon):
        targets |= _segment_targets(sentence, seg)
    return frozenset(targets)


def mark_targets(sentence: TaggedSentence, lexicon: ConnectiveLexicon) -> TaggedSentence:
    return sentence.with_targets(extract_targets(sentence, lexicon))


def segment_text(sentence: TaggedSentence, seg: Segment, skip_connective: bool = False) -> str:
    """Surface text of a segment with edge punctuation trimmed."""
    start = seg.start
    if skip_connective and seg.connective:
        start += len(seg.connective.split())
    toks = sentence.tokens[start:seg.end]
    lo, hi = 0, len(toks)
    while lo < hi and toks[lo].pos is POS.PUNCT:
        lo += 1
    while hi > lo and toks[hi - 1].pos is POS.PUNCT:
        hi -= 1
    return " ".join(t.surface for t in toks[lo:hi])


def segment_of(segments: Iterable[Segment], index: int) -> Optional[Segment]:
    for seg in segments:
        if index in seg:
            return seg
    return None

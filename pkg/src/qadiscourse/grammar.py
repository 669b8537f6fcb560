"""The closed prefix catalog, canonical labels, and question composition/parsing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .model import Direction, QuestionPrefix

AUXILIARIES = (
    "do", "does", "did", "is", "are", "was", "were", "has", "have", "had",
    "will", "would", "can", "could", "should", "may", "might", "must",
)
_AUX_SET = frozenset(AUXILIARIES)


class NoPrefixMatch(ValueError):
    pass


class EmptyBody(ValueError):
    pass


# (surface, sense, direction, reverse partner), in order of collected frequency.
_CATALOG_ROWS = [
    ("In what manner", "Expansion.Manner", Direction.FIXED, None),
    ("What is the reason", "Contingency.Cause", Direction.REVERSED, "What is the result of"),
    ("What is the result of", "Contingency.Cause", Direction.REVERSED, "What is the reason"),
    ("What is an example of", "Expansion.Level-of-detail", Direction.FIXED, None),
    ("After what", "Temporal.Asynchronous", Direction.REVERSED, "Before what"),
    ("While what", "Temporal.Synchronous", Direction.SYMMETRIC, None),
    ("In what case", "Contingency.Condition", Direction.FIXED, None),
    ("Despite what", "Comparison.Concession", Direction.FIXED, None),
    ("What is contrasted with", "Comparison.Contrast", Direction.SYMMETRIC, None),
    ("Before what", "Temporal.Asynchronous", Direction.REVERSED, "After what"),
    ("Since when", "Temporal.Asynchronous", Direction.REVERSED, "Until when"),
    ("What is similar to", "Comparison.Similarity", Direction.SYMMETRIC, None),
    ("Until when", "Temporal.Asynchronous", Direction.REVERSED, "Since when"),
    ("Instead of what", "Expansion.Substitution", Direction.FIXED, None),
    ("What is an alternative to", "Expansion.Disjunction", Direction.FIXED, None),
    ("Except when", "Expansion.Exception", Direction.FIXED, None),
    ("Unless what", "Contingency.Negative-condition", Direction.FIXED, None),
]


def _canonical(surface, direction, partner):
    if direction is Direction.REVERSED:
        # order-independent label shared by both partners
        return "/".join(sorted((surface, partner)))
    return surface


def _build(rows) -> Tuple[QuestionPrefix, ...]:
    prefixes = tuple(
        QuestionPrefix(s, sense, d, _canonical(s, d, partner), partner)
        for s, sense, d, partner in rows
    )
    _check_catalog(prefixes)
    return prefixes


def _check_catalog(prefixes: Sequence[QuestionPrefix]):
    by_surface = {p.surface: p for p in prefixes}
    if len(prefixes) != 17 or len(by_surface) != 17:
        raise ValueError("prefix catalog must hold 17 distinct surfaces")
    for p in prefixes:
        if (p.direction is Direction.REVERSED) != (p.reverse_partner is not None):
            raise ValueError(f"{p.surface!r}: partner must be set iff REVERSED")
        if p.reverse_partner is not None:
            q = by_surface.get(p.reverse_partner)
            if q is None or q.reverse_partner != p.surface or q.canonical != p.canonical:
                raise ValueError(f"{p.surface!r}: inconsistent reverse partner")
    # a surface that is a whole-token prefix of another would make parsing ambiguous
    lowered = [p.surface.lower() for p in prefixes]
    for a in lowered:
        for b in lowered:
            if a != b and b.startswith(a + " "):
                raise ValueError(f"ambiguous prefixes {a!r} / {b!r}")


CATALOG: Tuple[QuestionPrefix, ...] = _build(_CATALOG_ROWS)
_BY_SURFACE: Dict[str, QuestionPrefix] = {p.surface.lower(): p for p in CATALOG}
# longest first so that e.g. "What is the result of" wins over shorter overlaps
_MATCH_ORDER = sorted(CATALOG, key=lambda p: len(p.surface), reverse=True)


def prefix_catalog() -> List[QuestionPrefix]:
    return list(CATALOG)


def get_prefix(surface: str) -> QuestionPrefix:
    try:
        return _BY_SURFACE[surface.strip().lower()]
    except KeyError:
        raise NoPrefixMatch(f"unknown question prefix {surface!r}") from None


def canonical_label(prefix: QuestionPrefix) -> str:
    return prefix.canonical


def canonical_labels() -> List[str]:
    seen = []
    for p in CATALOG:
        if p.canonical not in seen:
            seen.append(p.canonical)
    return seen


def reverse_partner(prefix: QuestionPrefix) -> Optional[QuestionPrefix]:
    if prefix.reverse_partner is None:
        return None
    return get_prefix(prefix.reverse_partner)


def parse_question(text: str) -> Tuple[QuestionPrefix, Optional[str], str]:
    """Split a full question into (prefix, auxiliary, body).

    The prefix is matched case-insensitively at a token boundary; the next
    token is taken as the auxiliary only when it is in :data:`AUXILIARIES`.
    """
    stripped = text.strip()
    if not stripped:
        raise NoPrefixMatch("empty question")
    low = stripped.lower()
    for p in _MATCH_ORDER:
        s = p.surface.lower()
        if low.startswith(s) and (len(low) == len(s) or low[len(s)].isspace()):
            rest = stripped[len(s):].lstrip()
            break
    else:
        raise NoPrefixMatch(f"question does not start with a known prefix: {text!r}")
    aux = None
    head, _, tail = rest.partition(" ")
    if head.lower() in _AUX_SET and tail.strip():
        aux, rest = head, tail.lstrip()
    return p, aux, rest


@dataclass(frozen=True)
class ComposedQuestion:
    prefix: QuestionPrefix
    auxiliary: Optional[str]
    body: str
    full_text: str


def compose_question(prefix: QuestionPrefix, auxiliary: Optional[str],
                     spans: Iterable[str], edits: Optional[str] = None) -> ComposedQuestion:
    """Assemble prefix, optional auxiliary and copied spans into a question.

    ``edits`` replaces the joined spans wholesale (the annotator's manual fix).
    Only structure is enforced, not grammaticality. The returned body carries
    the trailing question mark.
    """
    if prefix.surface.lower() not in _BY_SURFACE:
        raise NoPrefixMatch(f"prefix {prefix.surface!r} is not in the catalog")
    if auxiliary is not None and auxiliary.lower() not in _AUX_SET:
        raise ValueError(f"auxiliary {auxiliary!r} is not allowed")
    raw = edits if edits is not None else " ".join(s.strip() for s in spans if s.strip())
    body = " ".join(raw.split())
    if not body.rstrip("?").strip():
        raise EmptyBody("question body is empty")
    if not body.endswith("?"):
        body += "?"
    parts = [prefix.surface] + ([auxiliary] if auxiliary else []) + [body]
    return ComposedQuestion(prefix, auxiliary, body, " ".join(parts))


def load_catalog_override(path) -> Tuple[QuestionPrefix, ...]:
    """Read an experimental catalog: ``surface | sense | direction | partner`` per line.

    The override must keep the same 17 surfaces; only senses and
    directionality may change.
    """
    rows = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cols = [c.strip() for c in line.split("|")]
            if len(cols) not in (3, 4):
                raise ValueError(f"{path}:{lineno}: expected 3 or 4 '|'-separated fields")
            surface, sense, direction = cols[:3]
            partner = cols[3] if len(cols) == 4 and cols[3] else None
            try:
                d = Direction(direction.upper())
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad direction class {direction!r}") from None
            rows.append((surface, sense, d, partner))
    known = {p.surface for p in CATALOG}
    extra = {r[0] for r in rows} - known
    if extra:
        raise ValueError(f"override introduces unknown prefixes: {sorted(extra)}")
    return _build(rows)

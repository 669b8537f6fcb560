from hypothesis import given, settings, strategies as st

from qadiscourse.model import POS, TaggedSentence
from qadiscourse.targets import (EXCLUDED_VERBS, ConnectiveLexicon, extract_targets,
                                 segment_sentence, segment_text)


def words(sentence, idx):
    return {sentence.tokens[i].surface for i in idx}


def test_labor_segments(labor_sentence, lexicon):
    segs = segment_sentence(labor_sentence, lexicon)
    assert [segment_text(labor_sentence, s) for s in segs] == [
        "Despite labor-shortage warnings",
        "80% aim for first-year wage increases of under 4%",
        "and 77% say they'd try to replace workers",
        "if struck",
        "or would consider it",
    ]
    assert [s.starts_with_connective for s in segs] == [True, False, False, True, False]


def test_labor_targets(labor_sentence, lexicon):
    got = extract_targets(labor_sentence, lexicon)
    assert words(labor_sentence, got) == {"warnings", "aim", "say", "replace", "struck", "consider"}


def test_single_clause_is_one_segment(lexicon):
    s = TaggedSentence.from_lists("one", "the dog barked loudly".split(),
                                  "OTHER NOUN VERB ADV".split())
    segs = segment_sentence(s, lexicon)
    assert len(segs) == 1 and segs[0].token_span == (0, 4)


def test_punctuation_then_connective(lexicon):
    s = TaggedSentence.from_lists("abc", "A , B because C".split(),
                                  "NOUN PUNCT NOUN OTHER NOUN".split())
    segs = segment_sentence(s, lexicon)
    assert [segment_text(s, g) for g in segs] == ["A", "B", "because C"]


def test_verb_adverb_verb_is_one_run(lexicon):
    s = TaggedSentence.from_lists("st", "she is also studying law".split(),
                                  "OTHER VERB ADV VERB NOUN".split())
    assert words(s, extract_targets(s, lexicon)) == {"studying"}


def test_verbless_connective_segment_takes_noun(lexicon):
    s = TaggedSentence.from_lists("rain", "the game stopped because of the rain".split(),
                                  "OTHER NOUN VERB OTHER OTHER OTHER NOUN".split())
    segs = segment_sentence(s, lexicon)
    assert segs[1].connective == "because of"
    assert words(s, extract_targets(s, lexicon)) == {"stopped", "rain"}


def test_verbless_connective_segment_falls_back_to_adverb(lexicon):
    s = TaggedSentence.from_lists("warily", "they agreed , albeit warily".split(),
                                  "OTHER VERB PUNCT OTHER ADV".split())
    assert words(s, extract_targets(s, lexicon)) == {"agreed", "warily"}


def test_enumeration_nouns_are_not_targets(lexicon):
    s = TaggedSentence.from_lists("enum", "apples , pears , plums".split(),
                                  "NOUN PUNCT NOUN PUNCT NOUN".split())
    assert extract_targets(s, lexicon) == frozenset()


def test_excluded_verbs(lexicon):
    s = TaggedSentence.from_lists("said", "he said the plan failed".split(),
                                  "OTHER VERB OTHER NOUN VERB".split())
    assert words(s, extract_targets(s, lexicon)) == {"failed"}


def test_longest_connective_match():
    lex = ConnectiveLexicon(frozenset({"as", "as long as"}), frozenset())
    s = TaggedSentence.from_lists("al", "we stay as long as it rains".split(),
                                  "OTHER VERB OTHER ADV OTHER OTHER VERB".split())
    segs = segment_sentence(s, lex)
    assert [g.connective for g in segs] == [None, "as long as"]


def test_default_exclusions(lexicon):
    for w in ("so", "as", "to", "about"):
        assert w in lexicon.excluded_ambiguous
        assert w not in lexicon.connectives
    assert not (lexicon.connectives & lexicon.excluded_ambiguous)


def test_lexicon_file(tmp_path):
    path = tmp_path / "lex.txt"
    path.write_text("# mine\nbecause\nin order to\n!because\nmeanwhile\n")
    lex = ConnectiveLexicon.load(path)
    assert lex.connectives == {"in order to", "meanwhile"}
    assert {"because", "so", "as", "to", "about"} <= lex.excluded_ambiguous


def test_lexicon_env(tmp_path, monkeypatch):
    path = tmp_path / "lex.txt"
    path.write_text("whereupon\n")
    monkeypatch.setenv("QADISC_LEXICON", str(path))
    assert ConnectiveLexicon.from_env().connectives == {"whereupon"}


_TAGS = [POS.VERB, POS.ADV, POS.NOUN, POS.OTHER_OPEN, POS.PUNCT, POS.OTHER]
_WORDS = ["because", "if", "said", "run", "ran", ",", ";", ":", ".", "the", "dog", "also",
          "to", "instead", "of", "while", "as", "long", "despite", "quickly", "said"]


@st.composite
def sentences(draw):
    n = draw(st.integers(1, 25))
    toks = draw(st.lists(st.sampled_from(_WORDS), min_size=n, max_size=n))
    tags = draw(st.lists(st.sampled_from(_TAGS), min_size=n, max_size=n))
    return TaggedSentence.from_lists("h", toks, tags)


@settings(max_examples=300)
@given(sentences())
def test_extraction_properties(s):
    lexicon = ConnectiveLexicon.default()
    segs = segment_sentence(s, lexicon)
    # ordered, disjoint, and covering everything except the splitting punctuation
    covered = []
    for a, b in zip(segs, segs[1:]):
        assert a.end <= b.start
    for g in segs:
        covered.extend(range(g.start, g.end))
    rest = set(range(len(s))) - set(covered)
    assert all(s.tokens[i].surface in {",", ";", ":"} for i in rest)
    assert len(covered) == len(set(covered))

    targets = extract_targets(s, lexicon)
    assert targets == extract_targets(s, lexicon)
    s.with_targets(targets)  # targets point at VERB/NOUN/ADV
    for t in targets:
        owners = [g for g in segs if t in g]
        assert len(owners) == 1
        g = owners[0]
        if s.tokens[t].pos is POS.VERB:
            assert s.tokens[t].surface.lower() not in EXCLUDED_VERBS
        else:
            assert g.starts_with_connective
            assert sum(1 for u in targets if u in g and s.tokens[u].pos is not POS.VERB) == 1

import pytest
from hypothesis import given, settings, strategies as st

from qadiscourse.dataset import (COLUMNS, DOMAINS, SPLITS, DatasetRecord, FormatDescriptor,
                                 Malformed, MissingVerdict, UnknownPrefix, dataset_stats, escape,
                                 format_records, merge_adjudicated, merge_records, parse_records,
                                 parse_tagged, read_dataset, unescape, write_dataset)
from qadiscourse.grammar import AUXILIARIES, CATALOG, compose_question, get_prefix
from qadiscourse.model import GOLD, AnnotationSet, Grammaticality, QAPair, Source

V = Grammaticality


def rec(sid, question_prefix, body, answer, *, aux=None, split="train", domain="wikinews",
        source=GOLD, verdict=V.UNREVIEWED, sentence="Some sentence ."):
    qa = QAPair(get_prefix(question_prefix), aux, body, answer, grammaticality=verdict)
    return DatasetRecord(sid, split, domain, sentence, source, qa)


_word = st.text(alphabet="abcxyzXY019'-,", min_size=1, max_size=6)
_free = st.text(alphabet=st.characters(blacklist_categories=("Cs",)), min_size=0, max_size=12)


@st.composite
def records(draw):
    prefix = draw(st.sampled_from(CATALOG))
    aux = draw(st.one_of(st.none(), st.sampled_from(AUXILIARIES)))
    words = draw(st.lists(_word, min_size=1, max_size=5))
    if aux is None and words[0].lower() in AUXILIARIES:
        words = ["x"] + words
    q = compose_question(prefix, aux, words)
    answer = draw(_free.filter(lambda s: s.strip()))
    qa = QAPair(prefix, aux, q.body, answer, grammaticality=draw(st.sampled_from(list(V))))
    source = draw(st.sampled_from([GOLD, Source("SYSTEM"), Source.parse("A17"),
                                   Source.parse("w\tb")]))
    return DatasetRecord(draw(_free.filter(lambda s: s.strip())), draw(st.sampled_from(SPLITS)),
                         draw(st.sampled_from(DOMAINS)), draw(_free), source, qa)


@settings(max_examples=200)
@given(st.lists(records(), max_size=8))
def test_read_write_roundtrip(rs):
    text = format_records(rs)
    back = parse_records(text)
    assert back == sorted(rs, key=lambda r: r.sort_key)
    assert format_records(back) == text


def test_escape_examples():
    assert escape("a\tb\nc\\d\re") == "a\\tb\\nc\\\\d\\re"
    assert unescape(escape("x\\ty")) == "x\\ty"
    with pytest.raises(ValueError):
        unescape("bad\\q")


def test_roundtrip_on_disk(tmp_path):
    rs = [rec("s2", "Despite what", "they\tsaid so?", "even\nthough", aux="did", split="dev"),
          rec("s1", "Since when", "it rained?", "since May", aux="has", split="test"),
          rec("s0", "What is the reason", "it rained?", "clouds", split="test")]
    path = tmp_path / "d.tsv"
    write_dataset(rs, path)
    raw = path.read_text(encoding="utf-8")
    assert raw.splitlines()[0].split("\t") == list(COLUMNS)
    assert len(raw.splitlines()) == 4
    back = read_dataset(path)
    assert [r.sentence_id for r in back] == ["s2", "s0", "s1"]
    assert back[0].qa.question_body == "they\tsaid so?"
    assert back[0].qa.answer == "even\nthough"


def test_unknown_prefix_row_is_reported():
    header = "\t".join(COLUMNS)
    good = "s1\ttrain\tother\tS .\tGOLD\tAfter what did it rain?\tafter x\tCORRECT"
    bad = "s2\ttrain\tother\tS .\tGOLD\tWho said it?\tx\tCORRECT"
    with pytest.raises(UnknownPrefix) as err:
        parse_records("\n".join([header, good, bad]))
    assert err.value.row == 3
    errors = []
    got = parse_records("\n".join([header, bad, good, "s3\ttrain"]), errors=errors)
    assert [r.sentence_id for r in got] == ["s1"]
    assert [type(e) for e in errors] == [UnknownPrefix, Malformed]
    assert [e.row for e in errors] == [2, 4]


def test_malformed_values():
    header = "\t".join(COLUMNS)
    for row in ["s1\tsummer\tother\tS\tGOLD\tAfter what did it rain?\tx\t",
                "s1\ttrain\tnews\tS\tGOLD\tAfter what did it rain?\tx\t",
                "s1\ttrain\tother\tS\tGOLD\tAfter what did it rain?\t \t",
                "s1\ttrain\tother\tS\tGOLD\tAfter what did it rain?\tx\tMAYBE"]:
        with pytest.raises(Malformed):
            parse_records(header + "\n" + row)
    with pytest.raises(Malformed):
        parse_records("")
    with pytest.raises(Malformed):
        parse_records("sentence_id\tquestion\n")


def test_descriptor_csv_matches_canonical():
    canonical = parse_records(
        "\t".join(COLUMNS) + "\n"
        "s1\ttrain\twikipedia\tIt rained , so we left .\tGOLD\tWhat is the result of it raining?"
        "\twe left\tCORRECT\n")
    fmt = FormatDescriptor.parse("""
        # exported spreadsheet
        delimiter = comma
        escape = none
        column.sentence_id = id
        column.sentence = text
        column.question = q
        column.answer = a
        column.verdict = label
        default.split = train
        default.domain = wikipedia
    """)
    csv_text = ('id,text,q,a,label\n'
                's1,"It rained , so we left .",What is the result of it raining?,we left,correct\n')
    assert parse_records(csv_text, fmt) == canonical


def test_descriptor_headerless_tsv():
    fmt = FormatDescriptor.parse("header=false\ncolumn.sentence_id=0\ncolumn.question=2\n"
                                 "column.answer=1\ndefault.split=dev")
    got = parse_records("s9\tbecause x\tWhat is the reason y?\n", fmt)
    assert got[0].split == "dev" and got[0].qa.answer == "because x"
    assert got[0].source == GOLD and got[0].domain == "other"


def test_descriptor_rejects_missing_required_columns():
    with pytest.raises(ValueError):
        FormatDescriptor.parse("column.sentence_id=id\ncolumn.question=q")
    with pytest.raises(ValueError):
        FormatDescriptor.parse("column.bogus=1")


def test_sort_is_split_then_id():
    rs = [rec("b", "Before what", "x?", "y", aux="did", split="test"),
          rec("a", "Before what", "x?", "y", aux="did", split="test"),
          rec("z", "Before what", "x?", "y", aux="did", split="train"),
          rec("c", "Before what", "x?", "y", aux="did", split="dev")]
    assert [r.sentence_id for r in parse_records(format_records(rs))] == ["z", "c", "a", "b"]


# -- adjudication -----------------------------------------------------------------------

def _set(sid, *pairs, worker="W"):
    return AnnotationSet(sid, Source.parse(worker), tuple(pairs))


def test_merge_drops_rejected_and_duplicates():
    q1 = QAPair(get_prefix("After what"), "did", "it rain?", "after noon")
    q2 = QAPair(get_prefix("Despite what"), "did", "they go?", "despite rain")
    q1_again = QAPair(get_prefix("After what"), "did", "it  rain?", "after  noon")
    q3 = QAPair(get_prefix("In what manner"), "did", "they go?", "by bus")
    verdicts = {q1: V.CORRECT, q2: V.NOT_CORRECT, q1_again: V.CORRECT,
                q3: V.CORRECT_NOT_GRAMMATICAL}
    merged = merge_adjudicated(_set("s", q1, q2, worker="A"), _set("s", q1_again, q3, worker="B"),
                               verdicts)
    assert merged.source == GOLD
    assert [p.answer for p in merged.pairs] == ["after noon", "by bus"]
    assert [p.grammaticality for p in merged.pairs] == [V.CORRECT, V.CORRECT_NOT_GRAMMATICAL]


def test_merge_needs_every_verdict():
    q1 = QAPair(get_prefix("After what"), "did", "it rain?", "after noon")
    q2 = QAPair(get_prefix("Despite what"), "did", "they go?", "despite rain")
    with pytest.raises(MissingVerdict):
        merge_adjudicated(_set("s", q1), _set("s", q2), {q1: V.CORRECT})
    with pytest.raises(MissingVerdict):
        merge_adjudicated(_set("s", q1), _set("s"), {q1: V.UNREVIEWED})


def test_merge_records_file_level():
    rs = [rec("s1", "After what", "it rain?", "after noon", aux="did", source=Source.parse("A"),
              verdict=V.CORRECT),
          rec("s1", "After what", "it rain?", "after noon", aux="did", source=Source.parse("B"),
              verdict=V.CORRECT),
          rec("s1", "Unless what", "they stay?", "unless told", aux="will",
              source=Source.parse("B"), verdict=V.NOT_CORRECT),
          rec("s2", "Since when", "it rain?", "since May", aux="has", source=Source.parse("A"),
              verdict=V.CORRECT_NOT_GRAMMATICAL)]
    out = merge_records(rs)
    assert [(r.sentence_id, r.qa.prefix.surface, r.source) for r in out] == [
        ("s1", "After what", GOLD), ("s2", "Since when", GOLD)]
    with pytest.raises(MissingVerdict):
        merge_records(rs + [rec("s3", "Since when", "x?", "y", aux="has")])


# -- statistics ---------------------------------------------------------------------------

def test_stats_counts_and_averages():
    rs = [rec("s1", "What is the reason", "it rained?", "clouds formed"),
          rec("s1", "After what", "it rained?", "after the heat", aux="did"),
          rec("s2", "After what", "we left?", "after lunch", aux="did", domain="wikipedia",
              split="dev")]
    s = dataset_stats(rs)
    assert s.sentences_with_qa == 2 and s.total_qas == 3
    assert s.per_prefix["After what"] == (2, pytest.approx(2 / 3))
    assert s.per_prefix["Unless what"] == (0, 0.0)
    # question tokens include the prefix and auxiliary: 6, 5, 5
    assert s.avg_question_tokens == pytest.approx(16 / 3)
    assert s.avg_answer_tokens == pytest.approx(7 / 3)
    assert s.per_domain_split == {("wikinews", "train"): (1, 2), ("wikipedia", "dev"): (1, 1)}
    assert sum(p for _, p in s.per_prefix.values()) == pytest.approx(1.0)


def test_stats_on_empty_input():
    s = dataset_stats([])
    assert (s.sentences_with_qa, s.total_qas, s.avg_question_tokens) == (0, 0, 0.0)
    assert all(v == (0, 0.0) for v in s.per_prefix.values())


@settings(max_examples=50)
@given(st.lists(records(), min_size=1, max_size=10))
def test_stats_proportions_sum_to_one(rs):
    s = dataset_stats(rs)
    assert sum(p for _, p in s.per_prefix.values()) == pytest.approx(1.0)
    assert sum(c for c, _ in s.per_prefix.values()) == len(rs)


def test_parse_tagged():
    rows = parse_tagged("# comment\ns1\tIt rained .\tPRP VBD .\tdev\twikipedia\n"
                        "s2\tWe left\tOTHER VERB\n")
    assert [(r.sentence.id, r.split, r.domain) for r in rows] == [
        ("s1", "dev", "wikipedia"), ("s2", "test", "other")]
    with pytest.raises(Malformed, match="missing POS column"):
        parse_tagged("s1\tIt rained .\n")
    with pytest.raises(Malformed):
        parse_tagged("s1\tIt rained .\tPRP VBD\n")

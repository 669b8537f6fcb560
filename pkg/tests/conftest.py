import pytest

from qadiscourse.model import TaggedSentence
from qadiscourse.targets import ConnectiveLexicon

# Tokens and coarse tags for the sentences used throughout the tests.
LABOR = (
    "Despite labor-shortage warnings , 80% aim for first-year wage increases of under 4% ; "
    "and 77% say they'd try to replace workers , if struck , or would consider it .",
    "OTHER OTHER-open NOUN PUNCT OTHER VERB OTHER OTHER-open NOUN NOUN OTHER OTHER OTHER PUNCT "
    "OTHER OTHER VERB OTHER VERB OTHER VERB NOUN PUNCT OTHER VERB PUNCT OTHER VERB VERB OTHER PUNCT",
)
CHECKS = (
    "And I also feel like in a capitalistic society , checks and balances happen when there "
    "is competition .",
    "OTHER OTHER ADV VERB OTHER OTHER OTHER OTHER-open NOUN PUNCT NOUN OTHER NOUN VERB OTHER "
    "OTHER VERB NOUN PUNCT",
)
HAWAII = (
    "It could hit Hawaii if it stays on its predicted path .",
    "OTHER VERB VERB NOUN OTHER OTHER VERB OTHER OTHER OTHER-open NOUN PUNCT",
)


def tagged(sid, pair):
    text, tags = pair
    return TaggedSentence.from_lists(sid, text.split(), tags.split())


@pytest.fixture(scope="session")
def lexicon():
    return ConnectiveLexicon.default()


@pytest.fixture
def labor_sentence():
    return tagged("labor", LABOR)


@pytest.fixture
def checks_sentence():
    return tagged("checks", CHECKS)


@pytest.fixture
def hawaii_sentence():
    return tagged("hawaii", HAWAII)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

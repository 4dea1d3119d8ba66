import sys
from pathlib import Path

import pytest

DATA_DIR = Path(__file__).parent / "data"

# the §-style example graph used across linearization and Smatch tests
EXAMPLE_PENMAN = (
    "(r / recommend-01 :ARG1 (a / advocate-01 :ARG1 (i / it) :manner (v / vigorous)))"
)


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR


@pytest.fixture(scope="session")
def mini_corpus_path():
    return DATA_DIR / "mini_corpus.amr"


@pytest.fixture(scope="session")
def lookup_parser_cmd(mini_corpus_path):
    script = DATA_DIR / "lookup_parser.py"
    return f"{sys.executable} {script} {mini_corpus_path}"


@pytest.fixture(scope="session")
def example_graph():
    from amrgen import parse_penman

    return parse_penman(EXAMPLE_PENMAN)

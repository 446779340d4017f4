import os
import shutil

import pytest

CORPUS = os.path.join(os.path.dirname(__file__), "corpus")

# lines collected by the acceptance module, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def corpus_files():
    return sorted(os.path.join(CORPUS, f) for f in os.listdir(CORPUS) if f.endswith(".smt2"))


def read_corpus(name):
    with open(os.path.join(CORPUS, name)) as fh:
        return fh.read()


needs_z3 = pytest.mark.skipif(shutil.which("z3") is None, reason="z3 binary not on PATH")


@pytest.fixture(scope="session")
def mock_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("mocks")


@pytest.fixture(scope="session")
def make_mock(mock_dir):
    from stormforge.mock import build_mock

    cache = {}

    def make(spec):
        if spec not in cache:
            name = spec.replace(":", "_").replace("/", "_")
            cache[spec] = build_mock(spec, str(mock_dir / name))
        return cache[spec]

    return make


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

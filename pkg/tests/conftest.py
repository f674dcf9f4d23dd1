import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from kgp.corpus import Block, Corpus, Document, Page  # noqa: E402
from kgp.eval.synthetic import SyntheticSpec, generate_synthetic_corpus  # noqa: E402
from oracles import ACCEPTANCE  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def small_corpus() -> Corpus:
    docs = (
        Document(
            "alpha",
            "Alpha Station",
            (
                Page(1, (Block("text", "The alpha station measures river temperature. It opened in spring."),)),
                Page(
                    2,
                    (
                        Block("text", "River levels rose after the storm near the station."),
                        Block("table", "Month,Level\nMay,3\nJune,5", table_id=1),
                    ),
                ),
            ),
        ),
        Document(
            "beta",
            "Beta Harbor",
            (Page(1, (Block("text", "The harbor crane lifts containers. A storm closed the harbor."),)),),
        ),
        Document(
            "gamma",
            "Gamma Orchard",
            (Page(1, (Block("text", "Apple trees grow in the orchard. Cider is pressed in autumn."),)),),
        ),
    )
    return Corpus(docs).split()


@pytest.fixture(scope="session")
def chain_corpus():
    return generate_synthetic_corpus(SyntheticSpec(num_docs=10, chain_length=3, distractor_count=3, seed=11))

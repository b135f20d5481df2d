from pathlib import Path

import pytest

from foclearn.grammar import HypothesisClassConfig
from foclearn.relstore import ingest

DATA = Path(__file__).parent / "data"

EXAMPLE1 = "#(z1,z2).(Author(x,z1) & Citation(z2,z1))"
EXAMPLE2 = "#(z1).(Brought(x1,z1) & !Type(z1,y1)) + 2 * #(z1).(Brought(x1,z1) & Type(z1,y1))"


@pytest.fixture
def citations():
    return ingest(DATA / "citations.jsonl")


@pytest.fixture
def cake():
    return ingest(DATA / "cake.jsonl")


@pytest.fixture
def citations_cfg():
    return HypothesisClassConfig(
        k=1, ell=0, max_count_vars=2, psi_library=("Author(x1,z1) & Citation(z2,z1)",)
    )


@pytest.fixture
def cake_cfg():
    return HypothesisClassConfig(
        k=1,
        ell=1,
        integers=(2,),
        max_summands=2,
        max_count_vars=1,
        psi_library=("Brought(x1,z1) & !Type(z1,y1)", "Brought(x1,z1) & Type(z1,y1)"),
    )

import json
from pathlib import Path

import pytest

from permuswap import Dataset, Domain, Record, load_dataset, load_roles

FIXTURES = Path(__file__).parent / "fixtures"


def make_dataset(records, domain):
    return Dataset(tuple(Record(*r) for r in records), Domain(*domain))


def load_fixture(name):
    """Fixture dataset plus its expected-bound annotation."""
    dataset = load_dataset(
        FIXTURES / f"{name}.csv", load_roles(FIXTURES / f"{name}.roles.json")
    )
    expected = json.loads((FIXTURES / f"{name}.expected.json").read_text())
    return dataset, expected


@pytest.fixture
def two_record_pair():
    """The smallest mixed stratum and its swapped twin (b = 2)."""
    x = make_dataset([(0, 0, 0), (0, 1, 1)], (1, 2, 2))
    x_swapped = make_dataset([(0, 0, 1), (0, 1, 0)], (1, 2, 2))
    return x, x_swapped

import json
from pathlib import Path

import pytest

from oofa import Dataset, read_design

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def oracle_fixtures() -> dict:
    with open(DATA / "oracle_fixtures.json", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def m3_dataset() -> Dataset:
    data = read_design(DATA / "m3_runs.csv")
    assert isinstance(data, Dataset)
    return data


@pytest.fixture(scope="session")
def m4_dataset() -> Dataset:
    return read_design(DATA / "m4_n24_block.csv")


@pytest.fixture(scope="session")
def m5_dataset() -> Dataset:
    return read_design(DATA / "m5_n40_block.csv")

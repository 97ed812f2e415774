import pathlib

import pytest

from partrank.instance import load_file

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def fixture(name):
    return load_file(str(FIXTURES / f"{name}.json"))


@pytest.fixture
def fixtures_dir():
    return FIXTURES

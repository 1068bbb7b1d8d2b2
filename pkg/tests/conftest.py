import json
from pathlib import Path

import pytest

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    if not FIXTURES.is_dir():
        pytest.skip("fixtures directory missing; run the fixture generator")
    return FIXTURES


def load_reference(name: str) -> dict:
    with open(FIXTURES / f"{name}.ref.json") as fh:
        return json.load(fh)


def fixture_path(name: str) -> Path:
    return FIXTURES / f"{name}.fcidump"

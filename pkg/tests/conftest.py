import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
REPO_ROOT = TESTS_DIR.parent
FIXTURES = REPO_ROOT / "fixtures"

sys.path.insert(0, str(TESTS_DIR))


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def neutral_profile():
    from moraldyad.model import CultureProfile

    return CultureProfile()


def read_fixture(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")

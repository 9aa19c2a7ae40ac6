import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
CHILDREN_DIR = TESTS_DIR / "children"

sys.path.insert(0, str(TESTS_DIR))


@pytest.fixture
def child_command():
    """Shell command for a named protocol child script."""

    def _command(name: str, *extra: str) -> str:
        path = CHILDREN_DIR / f"{name}.py"
        parts = [sys.executable, str(path), *extra]
        return " ".join(parts)

    return _command

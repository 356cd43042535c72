import os
import pathlib
import shutil

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def piezolab_cli():
    exe = os.environ.get("PIEZOLAB_CLI") or shutil.which("piezolab")
    if not exe:
        candidate = ROOT / "build" / "tools" / "piezolab"
        exe = str(candidate) if candidate.exists() else None
    if not exe:
        pytest.skip("piezolab executable not built")
    return exe


@pytest.fixture(scope="session")
def root():
    return ROOT

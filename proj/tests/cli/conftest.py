import shutil
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[2]


def pytest_addoption(parser):
    parser.addoption("--gamacro", default=str(ROOT / "build" / "gamacro"))


@pytest.fixture
def gamacro(request):
    return request.config.getoption("--gamacro")


@pytest.fixture
def cross_project(tmp_path):
    dst = tmp_path / "cross"
    shutil.copytree(ROOT / "example_projects" / "cross_product", dst)
    return dst

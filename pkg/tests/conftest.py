# -*- coding: utf-8 -*-
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from hdi.curves import make_curve  # noqa: E402
from hdi.surfaces import make_surface  # noqa: E402


def periodic_nodes(n: int) -> np.ndarray:
    return 2 * np.pi / n * np.arange(n)


@pytest.fixture
def circle():
    return make_curve("circle")


@pytest.fixture
def kite():
    return make_curve("kite")


@pytest.fixture
def pinched():
    return make_curve("pinched")


@pytest.fixture(scope="session")
def sphere12():
    return make_surface("sphere", n=12)


@pytest.fixture(scope="session")
def sphere16():
    return make_surface("sphere", n=16)


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("HDI_OUTPUT_DIR", str(tmp_path))
    return tmp_path

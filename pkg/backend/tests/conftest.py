"""
Shared fixtures for the test suite
"""
import os
import sys

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from config import Config
from services.coeffs import SchemeId


MIDPOINT_SCHEMES = ("me4-base", "me4-opti", "me6-base", "me6-opti")


@pytest.fixture(params=MIDPOINT_SCHEMES)
def midpoint_scheme(request) -> SchemeId:
    return SchemeId.parse(request.param)


@pytest.fixture
def wavenumbers() -> np.ndarray:
    return np.linspace(0.05, np.pi, 37)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240501)


@pytest.fixture
def out_dir(tmp_path, monkeypatch) -> str:
    path = tmp_path / "outputs"
    monkeypatch.setattr(Config, "OUTPUT_DIR", str(path))
    return str(path)

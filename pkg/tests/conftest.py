"""Shared pytest fixtures."""

import logging
import sys
from pathlib import Path

import numpy as np
import pytest

# Add the repository root to the path so `src` imports resolve
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.Generator(np.random.Philox(1234))


@pytest.fixture
def output_dir(tmp_path: Path) -> Path:
    out = tmp_path / "output"
    out.mkdir()
    return out

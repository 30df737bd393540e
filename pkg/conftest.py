"""Shared pytest configuration: reproducible randomness and fixture paths."""
from __future__ import annotations

import random
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


def pytest_addoption(parser):
    parser.addoption("--seed", action="store", type=int, default=20240101,
                     help="Seed for randomized property tests")


@pytest.fixture
def seed(request) -> int:
    return request.config.getoption("--seed")


@pytest.fixture
def rng(seed) -> random.Random:
    return random.Random(seed)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES

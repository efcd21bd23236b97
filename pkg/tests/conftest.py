"""
Pytest configuration and fixtures.
"""

import pytest

from app.core.config import Settings
from app.domain.iblt import Iblt, build
from app.domain.sparse_recovery import SolverConfig

# The 7-element worked example: hash seed 7 gives these cell pairs at b=14, k=2.
WORKED_HASH_SEED = 7
WORKED_B = 14
WORKED_K = 2
WORKED_INDICES = {
    1: [3, 0], 2: [7, 10], 3: [1, 6], 4: [6, 3],
    5: [4, 5], 6: [11, 1], 7: [0, 13], 8: [12, 13],
}


@pytest.fixture
def worked_s_a() -> set[int]:
    return set(range(1, 8))


@pytest.fixture
def worked_s_b() -> set[int]:
    return set(range(2, 9))


@pytest.fixture
def worked_table_a(worked_s_a) -> Iblt:
    return build(worked_s_a, WORKED_B, WORKED_K, WORKED_HASH_SEED)


@pytest.fixture
def worked_table_b(worked_s_b) -> Iblt:
    return build(worked_s_b, WORKED_B, WORKED_K, WORKED_HASH_SEED)


@pytest.fixture
def solver() -> SolverConfig:
    return SolverConfig()


@pytest.fixture
def settings() -> Settings:
    return Settings()

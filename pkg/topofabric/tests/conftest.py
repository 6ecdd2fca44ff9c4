"""
Pytest configuration for topofabric tests.
Cached settings are dropped around every test so environment patches take effect.
"""

import pytest

from topofabric.settings import reset_settings


@pytest.fixture(autouse=True)
def fresh_settings():
    reset_settings()
    yield
    reset_settings()

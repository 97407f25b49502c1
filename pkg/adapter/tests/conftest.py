from __future__ import annotations

from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from el_adapter.config import load_adapter_config
from el_adapter.service import create_app

ADAPTER_ROOT = Path(__file__).resolve().parent.parent
DEMO_CONFIG = ADAPTER_ROOT / "demo" / "config.yaml"
GOLDEN_DIR = ADAPTER_ROOT / "tests" / "golden"


@pytest.fixture(scope="session")
def demo_config():
    return load_adapter_config(DEMO_CONFIG)


@pytest.fixture
def client(demo_config):
    return TestClient(create_app(demo_config))


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    return GOLDEN_DIR

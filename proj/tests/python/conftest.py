import os
import shutil

import pytest


@pytest.fixture
def cli():
    path = os.environ.get("FFOU_CLI") or shutil.which("ffou_cli")
    if not path:
        pytest.skip("ffou_cli not available")
    return path


@pytest.fixture
def configs():
    return os.environ.get("FFOU_CONFIGS", os.path.join(os.path.dirname(__file__), "..", "..", "configs"))

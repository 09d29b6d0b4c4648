import os
import pathlib

import pytest


@pytest.fixture
def data_dir():
    env = os.environ.get("DISTRESS_DATA_DIR")
    if env:
        return pathlib.Path(env)
    return pathlib.Path(__file__).resolve().parents[2] / "data"

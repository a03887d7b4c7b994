from pathlib import Path

import pytest

from invpta.dsl import parse

DATA = Path(__file__).resolve().parents[1] / "src" / "invpta" / "data"


@pytest.fixture
def rtp():
    return parse((DATA / "rtp.pta").read_text())


@pytest.fixture
def fig1():
    return parse((DATA / "fig1.pta").read_text())

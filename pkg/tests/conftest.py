import json

import pytest

from helpers import AIRY_CFG, airy_inputs


@pytest.fixture(scope="session")
def airy():
    return airy_inputs()


@pytest.fixture
def airy_cfg_dict():
    return json.loads(AIRY_CFG.read_text())


@pytest.fixture
def write_cfg(tmp_path):
    def _w(d, name="cfg.json"):
        p = tmp_path / name
        p.write_text(json.dumps(d))
        return str(p)

    return _w

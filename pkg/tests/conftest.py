import json
import pytest
import os
import sys

# Add the project root to the Python path
sys.path.insert(0, os.path.abspath(os.path.dirname(os.path.dirname(__file__))))

from rep_growth.core.cartan import root_datum
from rep_growth.core.tensor_growth import make_rep_spec


# Common test fixtures
@pytest.fixture
def a1():
    """Root datum of SL2"""
    return root_datum("A1")


@pytest.fixture
def a2():
    """Root datum of SL3"""
    return root_datum("A2")


@pytest.fixture
def b2():
    """Root datum of Spin5"""
    return root_datum("B2")


@pytest.fixture
def g2():
    """Root datum of G2"""
    return root_datum("G2")


@pytest.fixture
def a1_standard(a1):
    """The 2-dimensional representation of SL2"""
    return make_rep_spec(a1, [((1,), 1)])


@pytest.fixture
def a2_standard(a2):
    """The 3-dimensional representation of SL3"""
    return make_rep_spec(a2, [((1, 0), 1)])


@pytest.fixture
def t1_three_weights():
    """The rank-1 torus acting with weights -1, 0, 1"""
    return make_rep_spec(root_datum("T1"), [((1,), 1), ((0,), 1), ((-1,), 1)])


@pytest.fixture
def write_config(tmp_path):
    """Return a function writing a config dict to a JSON file under tmp_path"""

    def _write(document, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(document))
        return path

    return _write

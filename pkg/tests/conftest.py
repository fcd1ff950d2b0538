import json

import numpy as np
import pytest

import toricdist as td
from toricdist import projective as pj


@pytest.fixture(scope="session")
def segment():
    """Unit interval [0, 1] (the 1-D standard simplex)."""
    return td.standard_simplex(1)


@pytest.fixture(scope="session")
def segment_w(segment):
    return td.WeightSet.unit(segment)


@pytest.fixture(scope="session")
def simplex2():
    return td.standard_simplex(2)


@pytest.fixture(scope="session")
def square():
    return td.unit_box(2)


@pytest.fixture(scope="session")
def sim7():
    return td.standard_simplex(2, 7)


@pytest.fixture(scope="session")
def sim7_w():
    return pj.binomial_weights(7, 2)


@pytest.fixture()
def sim7_json(tmp_path, sim7):
    path = tmp_path / "sim7.json"
    path.write_text(json.dumps({
        "dim": 2,
        "facets": [{"normal": [int(v) for v in n], "offset": int(o)}
                   for n, o in zip(sim7.normals, sim7.offsets)],
        "vertices": [[int(v) for v in vv] for vv in sim7.vertices],
    }))
    return str(path)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1729)

import numpy as np
import pytest

import renyiclf as rc


@pytest.fixture
def binary_schema():
    return rc.CategoricalSchema.from_cardinalities([2])


@pytest.fixture
def worked_joint(binary_schema):
    """d=1, m=2 joint with P(x=1,y=1)=0.4, P(x=1,y=0)=0.1, P(x=2,y=1)=0.1,
    P(x=2,y=0)=0.4.  Hand-derived facts used across the suite:
    Q=diag(.5,.5), d=(.3,-.3), q0=.5, z*=(.3,-.3), gamma=.16, HGR=0.6,
    e*=0.2, theta=0.16, randomized-rule worst-case error 4/17."""
    return rc.JointDistribution(schema=binary_schema, p=np.array([0.1, 0.4, 0.4, 0.1]))


@pytest.fixture
def worked_dataset():
    """Ten samples drawn exactly proportional to the worked joint."""
    schema = rc.CategoricalSchema((("x1", ("a", "b")),))
    rows = np.array([[1]] * 5 + [[2]] * 5)
    labels = np.array([1, 1, 1, 1, 0, 1, 0, 0, 0, 0])
    return rc.Dataset(schema=schema, rows=rows, labels=labels)


@pytest.fixture
def deterministic_joint_d2():
    """Two features locked to the label: (x1,x2,y) is (1,1,1) or (2,2,0),
    each with probability 1/2."""
    schema = rc.CategoricalSchema.from_cardinalities([2, 2])
    p = np.zeros(8)
    p[rc.JointDistribution(schema=schema, p=np.full(8, 1 / 8)).config_index((1, 1)) * 2 + 1] = 0.5
    p[rc.JointDistribution(schema=schema, p=np.full(8, 1 / 8)).config_index((2, 2)) * 2 + 0] = 0.5
    return rc.JointDistribution(schema=schema, p=p)


def write_csv(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


@pytest.fixture
def csv_factory(tmp_path):
    def make(name, text):
        return write_csv(tmp_path / name, text)

    return make

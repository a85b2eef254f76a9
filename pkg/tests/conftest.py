import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from memesim import NetSpec, generate

# single master seed for every acceptance-scale fixture in the suite
MASTER_SEED = 20250810


def n_jobs():
    return max(1, min(8, os.cpu_count() or 1))


@pytest.fixture(scope="session")
def jobs():
    return n_jobs()


@pytest.fixture(scope="session")
def paper_net_spec():
    return NetSpec(n=1000, m=10, seed=1)


@pytest.fixture(scope="session")
def paper_graph(paper_net_spec):
    return generate(paper_net_spec)


@pytest.fixture(scope="session")
def small_net_spec():
    return NetSpec(n=200, m=5, seed=3)


@pytest.fixture(scope="session")
def small_graph(small_net_spec):
    return generate(small_net_spec)


def repo_path(*parts):
    return os.path.join(os.path.dirname(__file__), "..", *parts)

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(params=[2, 3])
def p(request):
    return request.param

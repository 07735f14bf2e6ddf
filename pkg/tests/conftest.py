import numpy as np
import pytest

from barrierlab.envelope import EnvelopeCalculus
from barrierlab.weights import ProblemSpec, WeightSpec


@pytest.fixture(scope="session")
def stock_problem():
    """The workhorse configuration: N=3, p=2, m=2, linear exponent."""
    return ProblemSpec(N=3, p=2.0, m=2.0, weight=WeightSpec.power(1.0))


@pytest.fixture(scope="session")
def stock_calc(stock_problem):
    return EnvelopeCalculus(stock_problem)


@pytest.fixture(scope="session")
def zygmund_problem():
    return ProblemSpec(N=3, p=2.0, m=2.0, weight=WeightSpec.zygmund(0.5, 0.5, 2.0))


@pytest.fixture(scope="session")
def zygmund_calc(zygmund_problem):
    return EnvelopeCalculus(zygmund_problem)


@pytest.fixture(scope="session")
def zygmund_e_spec():
    """g(s) = s log(s+e): handy because G has a closed antiderivative."""
    return WeightSpec.zygmund(1.0, 1.0, float(np.e))

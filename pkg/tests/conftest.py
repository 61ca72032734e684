import pytest

from nudirac.models import (
    NonPTParams,
    PTLinearParams,
    nonpt_solve,
    pt_linear_solve,
)


@pytest.fixture(scope="session")
def pt_params():
    # the a = b/gamma slice where the published spectrum expression holds
    return PTLinearParams(a=1.0, b=2.0, gamma=2.0, omega=2.0)


@pytest.fixture(scope="session")
def nonpt_params():
    return NonPTParams(alpha=1.0, beta=2.0, gamma=2.0)


@pytest.fixture(scope="session")
def pt_states(pt_params):
    return pt_linear_solve(pt_params, 4, normalize=False)


@pytest.fixture(scope="session")
def nonpt_states(nonpt_params):
    return nonpt_solve(nonpt_params, 4, normalize=False)

import math

import pytest

from ssfkit import BoundaryData, square_well, zero_potential


@pytest.fixture(scope="session")
def acc_bc():
    """Boundary data of the acceptance configuration: phi = pi/3, R = [[1,1],[0,1]]."""
    return BoundaryData(phi=math.pi / 3.0, r=((1.0, 1.0), (0.0, 1.0)))


@pytest.fixture(scope="session")
def acc_potential():
    return square_well(1.0, 1.0)


@pytest.fixture(scope="session")
def zero_pot():
    return zero_potential()


@pytest.fixture(scope="session")
def acc_line_ssf(acc_potential):
    from ssfkit.ssf import ssf_line
    return ssf_line(acc_potential)

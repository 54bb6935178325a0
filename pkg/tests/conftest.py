import pytest

from polarorder import ivp


@pytest.fixture(scope="session")
def traj():
    """One well-resolved trajectory shared by the whole suite."""
    return ivp.integrate(t_max=12.0, tol=1e-10)


@pytest.fixture(scope="session")
def traj10(traj):
    """The default-configuration run the acceptance criteria talk about."""
    return ivp.integrate(t_max=10.0, tol=ivp.DEFAULT_TOL)

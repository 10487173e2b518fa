"""Shared test problems and expensive session-scoped computations."""

import numpy as np
import pytest

from matsl import (
    BoundaryProblem,
    Potential,
    SingularOrder,
    group_weights,
    locate_eigenvalues,
)

TWO_CHANNEL_Q = [
    np.array([[0.35, 0.05], [0.08, -0.22]]),
    np.array([[0.12, 0.10], [0.00, 0.15]]),
]


@pytest.fixture(scope="session")
def p_closed():
    """m=1, nu=1/2, Q=0, h=H=0, T=pi: everything in closed form."""
    order = SingularOrder.from_nu([0.5])
    z = np.zeros((1, 1))
    return BoundaryProblem(order=order, Q=Potential.zero(1), h=z, H=z, T=np.pi)


@pytest.fixture(scope="session")
def p_mixed():
    """m=2, nu=(0.7, 0.3), polynomial Q, nonzero h and H."""
    order = SingularOrder.from_nu([0.7, 0.3])
    return BoundaryProblem(
        order=order,
        Q=Potential.polynomial(TWO_CHANNEL_Q),
        h=np.array([[0.2, 0.05], [0.05, -0.1]]),
        H=np.array([[-0.15, 0.1], [0.1, 0.05]]),
        T=2.8,
    )


@pytest.fixture(scope="session")
def p_scalar03():
    """m=1, nu=0.3, Q = 0.1 x: the beta = 0.6 branch."""
    order = SingularOrder.from_nu([0.3])
    return BoundaryProblem(
        order=order,
        Q=Potential.polynomial([np.zeros((1, 1)), np.array([[0.1]])]),
        h=np.array([[0.1]]),
        H=np.array([[-0.2]]),
        T=np.pi,
    )


@pytest.fixture(scope="session")
def p_diag0():
    """m=2, nu=(0.7, 0.3), Q=0, diagonal h and H: decoupled channels."""
    order = SingularOrder.from_nu([0.7, 0.3])
    return BoundaryProblem(
        order=order,
        Q=Potential.zero(2),
        h=np.diag([0.15, -0.05]).astype(complex),
        H=np.diag([0.1, 0.2]).astype(complex),
        T=2.5,
    )


@pytest.fixture(scope="session")
def p_cluster():
    """m=2, equal nu=(0.7, 0.7): one J-class, two roots per contour."""
    order = SingularOrder.from_nu([0.7, 0.7])
    return BoundaryProblem(
        order=order,
        Q=Potential.polynomial(TWO_CHANNEL_Q),
        h=np.array([[0.2, 0.05], [0.05, -0.1]]),
        H=np.array([[-0.15, 0.1], [0.1, 0.05]]),
        T=2.8,
    )


LADDER_NS = [10, 14, 19, 26, 34, 40]


@pytest.fixture(scope="session")
def cluster_ladder(p_cluster):
    """Located clusters with group weights on the acceptance ladder."""
    data = locate_eigenvalues(p_cluster, LADDER_NS)
    for d in data:
        group_weights(p_cluster, d)
    return data


@pytest.fixture(scope="session")
def diag0_ladder(p_diag0):
    data = locate_eigenvalues(p_diag0, LADDER_NS)
    for d in data:
        group_weights(p_diag0, d)
    return data


@pytest.fixture(scope="session")
def scalar03_ladder(p_scalar03):
    data = locate_eigenvalues(p_scalar03, LADDER_NS)
    for d in data:
        group_weights(p_scalar03, d)
    return data

import numpy as np
import pytest

import monosplit as ms
from monosplit.operators import ConeKind


@pytest.fixture(scope="session")
def known_n2():
    return ms.build_known_solution_problem([2.0, -0.5])


@pytest.fixture(scope="session")
def known_n50():
    a = np.zeros(50)
    a[0] = 2.0
    a[1] = -0.5
    return ms.build_known_solution_problem(a)


@pytest.fixture(scope="session")
def chain_eq_20():
    return ms.build_qp_problem(20, ConeKind.ZERO_CONE)


@pytest.fixture(scope="session")
def chain_eq_200():
    return ms.build_qp_problem(200, ConeKind.ZERO_CONE)


@pytest.fixture(scope="session")
def chain_ineq_200():
    return ms.build_qp_problem(200, ConeKind.NONNEG_ORTHANT)


class CountingForward:
    """Wraps a problem's forward oracle and counts evaluations."""

    def __init__(self, problem):
        self.problem = problem
        self.calls = 0
        self._orig = problem.apply_forward

    def __enter__(self):
        def counted(z):
            self.calls += 1
            return self._orig(z)
        self.problem.apply_forward = counted
        return self

    def __exit__(self, *exc):
        self.problem.apply_forward = self._orig
        return False

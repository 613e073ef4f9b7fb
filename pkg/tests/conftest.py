import numpy as np
import pytest

from periodic_portfolio import (
    EvaluationSpec,
    MarketModel,
    PowerProblem,
    constrained_sharpe,
    fixed_point,
)

# Benchmark two-stock market used throughout: mu = (0.1, 0.15),
# sigma = diag(0.2, 0.25), r = 0.12, so xi = (-0.1, 0.12) and the
# short-sale clamp gives xi_tilde = (0, 0.12).
TABLE_MU = (0.1, 0.15)
TABLE_SIGMA = ((0.2, 0.0), (0.0, 0.25))
TABLE_R = 0.12
TABLE_TAU = 1.0
TABLE_GAMMA = 0.8
TABLE_DELTA = 0.3
TABLE_X0 = 0.5
TABLE_ALPHA = 0.5


@pytest.fixture(scope="session")
def table_market():
    return MarketModel(mu=TABLE_MU, sigma=TABLE_SIGMA, r=TABLE_R)


@pytest.fixture(scope="session")
def table_cone(table_market):
    return constrained_sharpe(table_market)


@pytest.fixture(scope="session")
def table_eval():
    return EvaluationSpec(tau=TABLE_TAU, gamma=TABLE_GAMMA, delta=TABLE_DELTA)


@pytest.fixture(scope="session")
def power_problem(table_market, table_eval, table_cone):
    return PowerProblem(
        market=table_market, evaluation=table_eval, alpha=TABLE_ALPHA, cs=table_cone
    )


@pytest.fixture(scope="session")
def power_solution(power_problem):
    return fixed_point(power_problem)


@pytest.fixture(scope="session")
def power_problem_g1(table_market, table_cone):
    e = EvaluationSpec(tau=TABLE_TAU, gamma=1.0, delta=TABLE_DELTA)
    return PowerProblem(market=table_market, evaluation=e, alpha=TABLE_ALPHA, cs=table_cone)


@pytest.fixture(scope="session")
def power_solution_g1(power_problem_g1):
    return fixed_point(power_problem_g1)


def random_market(rng: np.random.Generator, n: int = 2) -> MarketModel:
    """A random well-posed market: lower-triangular sigma with solid diagonal."""
    diag = rng.uniform(0.15, 0.5, size=n)
    lower = rng.uniform(-0.1, 0.1, size=(n, n))
    sigma = np.tril(lower, k=-1) + np.diag(diag)
    mu = rng.uniform(-0.05, 0.35, size=n)
    r = rng.uniform(0.0, 0.2)
    return MarketModel(mu=mu, sigma=sigma, r=r)

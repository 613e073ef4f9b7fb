"""Closed-form solution layer for logarithmic utility.

Everything here is explicit: V(x) = A* + C* log x with

    A* = (e^(delta*tau) - gamma) / (e^(delta*tau) - 1)^2 * (r + |xi_tilde|^2/2) * tau,
    C* = (1 - gamma) / (e^(delta*tau) - 1),

a feedback portfolio (sigma^T)^{-1} xi_tilde that is independent of gamma and
tau, and the cost of the short-selling ban relative to the unconstrained
problem, which replaces xi_tilde by xi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cone import ConstrainedSharpe
from .errors import DomainError, ParameterOutOfRange
from .market import EvaluationSpec, MarketModel, sharpe_ratio

_MIN_DELTA_TAU = 1e-12


def _growth_coef(u: float, gamma: float) -> float:
    # (e^u - gamma) / (e^u - 1)^2, stable for tiny and huge u
    if u < _MIN_DELTA_TAU:
        raise ParameterOutOfRange("delta*tau is too small to evaluate stably")
    if u > 350.0:
        return math.exp(-u)
    em1 = math.expm1(u)
    return (em1 + (1.0 - gamma)) / em1**2


@dataclass(eq=False)
class LogSolution:
    a_star: float
    c_star: float
    xi_tilde_norm_sq: float
    feedback_fractions: np.ndarray
    a_unconstrained: float
    constraint_cost: float


def solve_log(m: MarketModel, e: EvaluationSpec, cs: ConstrainedSharpe) -> LogSolution:
    """Populate all closed-form fields of the logarithmic solution."""
    u = e.delta * e.tau
    coef = _growth_coef(u, e.gamma)
    q_tilde = cs.objective
    q_free = float(cs.xi @ cs.xi)

    a_star = coef * (m.r + 0.5 * q_tilde) * e.tau
    a_unconstrained = coef * (m.r + 0.5 * q_free) * e.tau
    c_star = (1.0 - e.gamma) / math.expm1(u) if u <= 700.0 else 0.0
    fractions = np.linalg.solve(m.sigma.T, cs.xi_tilde)
    return LogSolution(
        a_star=a_star,
        c_star=c_star,
        xi_tilde_norm_sq=q_tilde,
        feedback_fractions=fractions,
        a_unconstrained=a_unconstrained,
        constraint_cost=constraint_cost(m, e, cs),
    )


def value_log(s: LogSolution, x):
    """V(x) = A* + C* log x for x > 0."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0.0):
        raise DomainError("value function requires x > 0")
    out = s.a_star + s.c_star * np.log(x_arr)
    return float(out) if out.ndim == 0 else out


def dual_value_log(y: float, m: MarketModel, e: EvaluationSpec, cs: ConstrainedSharpe) -> float:
    """Dual value -log y + |xi_tilde|^2 tau / 2 + r tau - 1."""
    if y <= 0.0:
        raise DomainError("dual value requires y > 0")
    return -math.log(y) + 0.5 * cs.objective * e.tau + m.r * e.tau - 1.0


def unconstrained_log(m: MarketModel, e: EvaluationSpec) -> tuple[float, np.ndarray]:
    """Solution constants when short selling is allowed.

    Returns the value-function intercept built from |xi|^2 and the Merton
    feedback fractions (sigma sigma^T)^{-1} (mu - r 1), which may be negative.
    """
    xi = sharpe_ratio(m)
    coef = _growth_coef(e.delta * e.tau, e.gamma)
    a_unconstrained = coef * (m.r + 0.5 * float(xi @ xi)) * e.tau
    fractions = np.linalg.solve(m.sigma @ m.sigma.T, m.excess_returns())
    return a_unconstrained, fractions


def constraint_cost(m: MarketModel, e: EvaluationSpec, cs: ConstrainedSharpe) -> float:
    """Value lost to the short-selling ban, independent of initial wealth.

    Equals (e^(delta*tau) - gamma) / (2 (e^(delta*tau) - 1)^2) *
    (|xi|^2 - |xi_tilde|^2) * tau >= 0; zero exactly when the constraint
    never binds (xi >= 0 already).
    """
    coef = _growth_coef(e.delta * e.tau, e.gamma)
    q_free = float(cs.xi @ cs.xi)
    return coef * 0.5 * (q_free - cs.objective) * e.tau

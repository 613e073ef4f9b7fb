"""Power-utility pipeline for the periodically evaluated portfolio problem.

The infinite-horizon value function has the form V(x) = (1/alpha) * A* *
x^(alpha*(1-gamma)) where A* solves the one-dimensional fixed-point equation
A* = exp(-delta*tau) * H(A*). H(a) is the optimal value of a one-period
problem with the moderated utility

    h_a(x) = (1/alpha) * x^alpha + (a/alpha) * x^(alpha*(1-gamma)),

evaluated through its convex dual: H(a) = alpha * (V_dual(y*) + y*), where
V_dual(y) = E[phi_a(y * Z/B)] is a lognormal expectation of the Legendre
transform of h_a and y* balances the unit budget E[(Z/B) * X] = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from .cone import ConstrainedSharpe, constrained_sharpe
from .errors import (
    AssumptionViolated,
    BracketFailure,
    DomainError,
    NonConvergence,
    NumericalFault,
    ParameterOutOfRange,
)
from .market import EvaluationSpec, MarketModel, check_assumption, zeta
from .quadrature import DeflatorLaw, expect_deflator_adaptive

_NEWTON_CAP = 100
_BRACKET_CAP = 60
_BRACKET_FACTOR = 4.0
_PICARD_CAP = 20000


@dataclass(eq=False)
class PowerProblem:
    """Parameter bundle for one power-utility solve.

    Construction validates alpha and the standing well-posedness condition
    delta > max(zeta(alpha*(1-gamma)), 0); an invalid bundle never exists.
    """

    market: MarketModel
    evaluation: EvaluationSpec
    alpha: float
    cs: ConstrainedSharpe
    tol_root: float = 1e-10
    tol_fixed_point: float = 1e-10
    quad_order: int = 64

    def __post_init__(self):
        if not np.isfinite(self.alpha) or self.alpha == 0 or self.alpha >= 1:
            raise ParameterOutOfRange("alpha must lie in (-inf, 0) or (0, 1)")
        report = check_assumption(
            self.market, self.evaluation, self.alpha, self.xi_tilde_norm_sq
        )
        if not report.satisfied:
            raise AssumptionViolated(
                "well-posedness requires delta > max(zeta(alpha*(1-gamma)), 0): "
                f"delta={self.evaluation.delta:.6g}, "
                f"zeta={report.zeta_at_alpha_one_minus_gamma:.6g}"
            )

    @property
    def xi_tilde_norm_sq(self) -> float:
        return self.cs.objective

    @property
    def law(self) -> DeflatorLaw:
        """Lognormal law of Z/B over one full evaluation period."""
        return DeflatorLaw.for_horizon(
            self.xi_tilde_norm_sq, self.market.r, self.evaluation.tau
        )


@dataclass(frozen=True)
class PowerSolution:
    a_star: float
    y_star: float
    contraction_modulus: float
    lower_bound: float
    upper_bound: float
    iterations: int


@dataclass(eq=False)
class WealthRatioMap:
    """Per-period map from the deflator ratio to the gross wealth growth."""

    a_star: float
    y_star: float
    law: DeflatorLaw
    alpha: float
    gamma: float
    tol_root: float = 1e-10


def make_power_problem(
    market: MarketModel,
    evaluation: EvaluationSpec,
    alpha: float,
    tol_root: float = 1e-10,
    tol_fixed_point: float = 1e-10,
    quad_order: int = 64,
) -> PowerProblem:
    """Convenience constructor: cone projection plus the validated bundle."""
    cs = constrained_sharpe(market)
    return PowerProblem(
        market=market,
        evaluation=evaluation,
        alpha=alpha,
        cs=cs,
        tol_root=tol_root,
        tol_fixed_point=tol_fixed_point,
        quad_order=quad_order,
    )


def moderated_utility(a: float, alpha: float, gamma: float, x):
    """h_a(x) = (1/alpha) x^alpha + (a/alpha) x^(alpha(1-gamma)) for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise DomainError("moderated utility requires x > 0")
    out = x**alpha / alpha + (a / alpha) * x ** (alpha * (1.0 - gamma))
    return float(out) if out.ndim == 0 else out


def moderated_marginal(a: float, alpha: float, gamma: float, x):
    """Derivative x^(alpha-1) + a(1-gamma) x^(alpha(1-gamma)-1)."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise DomainError("marginal requires x > 0")
    out = x ** (alpha - 1.0) + a * (1.0 - gamma) * x ** (alpha * (1.0 - gamma) - 1.0)
    return float(out) if out.ndim == 0 else out


def marginal_inverse(a: float, alpha: float, gamma: float, y, tol: float = 1e-10):
    """Invert the moderated marginal: the unique x > 0 with h_a'(x) = y.

    The marginal decreases strictly from +inf to 0, so the inverse exists for
    every y > 0. With c = a*(1-gamma) the equation in u = log x reads

        g(u) = (alpha-1)*u + log(1 + c*exp(-alpha*gamma*u)) - log y = 0,

    which is convex and strictly decreasing in u, so Newton iteration from
    the pure-power guess u0 = log(y)/(alpha-1) converges globally. When
    c == 0 (a == 0 or gamma == 1) the exact solution y^(1/(alpha-1)) is
    returned directly.
    """
    y_arr = np.asarray(y, dtype=float)
    scalar = y_arr.ndim == 0
    y_arr = np.atleast_1d(y_arr)
    if np.any(y_arr <= 0.0) or not np.all(np.isfinite(y_arr)):
        raise DomainError("marginal inverse requires finite y > 0")

    c = a * (1.0 - gamma)
    if c == 0.0:
        x = y_arr ** (1.0 / (alpha - 1.0))
        return float(x[0]) if scalar else x

    p1 = alpha - 1.0
    beta = -alpha * gamma
    lc = math.log(c)
    logy = np.log(y_arr)

    u = logy / p1
    for _ in range(_NEWTON_CAP):
        t = lc + beta * u
        g = p1 * u + np.logaddexp(0.0, t) - logy
        gp = p1 + beta * expit(t)
        step = g / gp
        u -= step
        if np.max(np.abs(step)) <= tol:
            break
    else:
        raise NonConvergence("marginal inverse Newton iteration hit its cap")
    x = np.exp(u)
    return float(x[0]) if scalar else x


def legendre_transform(a: float, alpha: float, gamma: float, y, tol: float = 1e-10):
    """phi_a(y) = h_a(I(y)) - y * I(y) with I the inverse marginal."""
    y_arr = np.asarray(y, dtype=float)
    x = marginal_inverse(a, alpha, gamma, y_arr, tol)
    out = moderated_utility(a, alpha, gamma, x) - y_arr * x
    return float(out) if np.ndim(out) == 0 else out


def dual_value(p: PowerProblem, a: float, y: float) -> float:
    """Dual value E[phi_a(y * Z/B)] over one period, by adaptive quadrature."""
    if y <= 0.0:
        raise DomainError("dual value requires y > 0")
    return expect_deflator_adaptive(
        lambda z: legendre_transform(a, p.alpha, p.evaluation.gamma, y * z, p.tol_root),
        p.law,
        order=p.quad_order,
    )


def budget_function(p: PowerProblem, a: float, y: float) -> float:
    """F(y) = E[(Z/B) * I(y * Z/B)], strictly decreasing with F(0+)=inf, F(inf)=0."""
    if y <= 0.0:
        raise DomainError("budget function requires y > 0")
    return expect_deflator_adaptive(
        lambda z: z * marginal_inverse(a, p.alpha, p.evaluation.gamma, y * z, p.tol_root),
        p.law,
        order=p.quad_order,
    )


def solve_y_star(
    p: PowerProblem, a: float, budget: float = 1.0, hint: float | None = None
) -> float:
    """Root of F(y) = budget: geometric bracket expansion, then Brent refinement."""
    if budget <= 0.0:
        raise DomainError("budget must be positive")

    def g(y):
        return budget_function(p, a, y) - budget

    y0 = hint if (hint is not None and hint > 0.0) else 1.0
    g0 = g(y0)
    if g0 == 0.0:
        return y0
    if g0 > 0.0:
        lo, glo = y0, g0
        hi = y0
        for _ in range(_BRACKET_CAP):
            hi *= _BRACKET_FACTOR
            ghi = g(hi)
            if ghi < 0.0:
                break
            lo, glo = hi, ghi
        else:
            raise BracketFailure("could not bracket y* from above")
    else:
        hi = y0
        lo = y0
        for _ in range(_BRACKET_CAP):
            lo /= _BRACKET_FACTOR
            glo = g(lo)
            if glo > 0.0:
                break
            hi = lo
        else:
            raise BracketFailure("could not bracket y* from below")
    return float(brentq(g, lo, hi, rtol=1e-12, maxiter=200))


def _value_and_y(p: PowerProblem, a: float, hint: float | None = None):
    y = solve_y_star(p, a, hint=hint)
    return p.alpha * (dual_value(p, a, y) + y), y


def moderated_value(p: PowerProblem, a: float) -> float:
    """H(a) = alpha * (V_dual(y*) + y*), the one-period optimum under h_a."""
    return _value_and_y(p, a)[0]


def contraction_map(p: PowerProblem, a: float) -> float:
    """Psi(a) = exp(-delta*tau) * H(a); a contraction under well-posedness."""
    return math.exp(-p.evaluation.delta * p.evaluation.tau) * moderated_value(p, a)


def contraction_modulus(p: PowerProblem) -> float:
    z2 = zeta(
        p.alpha * (1.0 - p.evaluation.gamma), p.market.r, p.xi_tilde_norm_sq
    )
    return math.exp(-(p.evaluation.delta - z2) * p.evaluation.tau)


def fixed_point_bounds(p: PowerProblem) -> tuple[float, float]:
    """A-priori bracket for the fixed point A*.

    Each side combines the bond-only value exp((r*alpha-delta)*tau) with the
    one-period optimum exp((zeta(alpha)-delta)*tau), divided by one minus the
    matching discount factor; the roles of the two expressions swap between
    alpha in (0,1) and alpha < 0. A side whose denominator is not positive is
    reported as NaN (unreachable when the well-posedness margin is positive).
    """
    r, tau, delta = p.market.r, p.evaluation.tau, p.evaluation.delta
    alpha, gamma = p.alpha, p.evaluation.gamma
    q = p.xi_tilde_norm_sq
    za = zeta(alpha, r, q)
    z2 = zeta(alpha * (1.0 - gamma), r, q)

    def term(growth, decay):
        if decay <= 0.0:
            return float("nan")
        return math.exp((growth - delta) * tau) / (-math.expm1(-decay * tau))

    term_bond = term(r * alpha, delta - r * alpha * (1.0 - gamma))
    term_opt = term(za, delta - z2)
    if alpha > 0:
        return term_bond, term_opt
    return term_opt, term_bond


def fixed_point(p: PowerProblem, start: float | None = None) -> PowerSolution:
    """Iterate Psi to its unique fixed point A*.

    The stopping rule |A_{k+1} - A_k| <= tol * (1-q)/q with q the contraction
    modulus guarantees |A_k - A*| <= tol and a map residual below tol.
    """
    q_mod = contraction_modulus(p)
    lower, upper = fixed_point_bounds(p)
    if start is None:
        start = lower if p.alpha > 0 else upper
        if not np.isfinite(start):
            start = 1.0
    if start < 0:
        raise DomainError("fixed-point start must be nonnegative")

    stop = p.tol_fixed_point * (1.0 - q_mod) / q_mod
    disc = math.exp(-p.evaluation.delta * p.evaluation.tau)
    a_prev = float(start)
    y_hint = None
    iterations = 0
    for _ in range(_PICARD_CAP):
        iterations += 1
        h_val, y_hint = _value_and_y(p, a_prev, y_hint)
        a_next = disc * h_val
        if abs(a_next - a_prev) <= stop:
            break
        a_prev = a_next
    else:
        raise NonConvergence("fixed-point iteration hit its cap")

    y_star = solve_y_star(p, a_next, hint=y_hint)
    return PowerSolution(
        a_star=a_next,
        y_star=y_star,
        contraction_modulus=q_mod,
        lower_bound=lower,
        upper_bound=upper,
        iterations=iterations,
    )


def value_function(sol: PowerSolution, x, alpha: float, gamma: float):
    """V(x) = (1/alpha) * A* * x^(alpha*(1-gamma)) for x > 0."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0.0):
        raise DomainError("value function requires x > 0")
    out = sol.a_star / alpha * x_arr ** (alpha * (1.0 - gamma))
    return float(out) if out.ndim == 0 else out


def wealth_ratio_map(p: PowerProblem, sol: PowerSolution) -> WealthRatioMap:
    return WealthRatioMap(
        a_star=sol.a_star,
        y_star=sol.y_star,
        law=p.law,
        alpha=p.alpha,
        gamma=p.evaluation.gamma,
        tol_root=p.tol_root,
    )


def period_ratio(ratio_map: WealthRatioMap, deflator_ratio):
    """Gross wealth growth over one period: I(y* * R), decreasing in R."""
    r_arr = np.asarray(deflator_ratio, dtype=float)
    if np.any(r_arr <= 0.0):
        raise DomainError("deflator ratio must be positive")
    return marginal_inverse(
        ratio_map.a_star,
        ratio_map.alpha,
        ratio_map.gamma,
        ratio_map.y_star * r_arr,
        ratio_map.tol_root,
    )


def intra_period_profile(
    p: PowerProblem, sol: PowerSolution, t: float, z: float
) -> tuple[float, np.ndarray]:
    """Optimal wealth multiplier and portfolio fractions inside a period.

    ``z`` is the intra-period deflator level Z_t/B_t relative to the period
    start. With m(t, z) = E[(z*R) * I(y* * z * R)] over the residual deflator
    R of horizon tau - t, the wealth multiplier is m/z and the per-unit-wealth
    risky fractions are (sigma^T)^{-1} xi_tilde * (1 - z * dm/dz / m); the
    z-sensitivity is a Richardson-extrapolated central difference. Fractions
    are nonnegative in theory; a violation beyond 1e-6 raises NumericalFault.
    """
    tau = p.evaluation.tau
    if not 0.0 <= t <= tau:
        raise DomainError("t must lie in [0, tau]")
    if z <= 0.0:
        raise DomainError("deflator level z must be positive")

    law_res = DeflatorLaw.for_horizon(p.xi_tilde_norm_sq, p.market.r, tau - t)
    a, alpha, gamma = sol.a_star, p.alpha, p.evaluation.gamma
    y_star = sol.y_star

    def m_of(zz: float) -> float:
        return expect_deflator_adaptive(
            lambda rr: (zz * rr)
            * marginal_inverse(a, alpha, gamma, y_star * zz * rr, p.tol_root),
            law_res,
            order=p.quad_order,
        )

    m0 = m_of(z)
    h = 1e-5 * z
    d_coarse = (m_of(z + h) - m_of(z - h)) / (2.0 * h)
    d_fine = (m_of(z + 0.5 * h) - m_of(z - 0.5 * h)) / h
    dm = (4.0 * d_fine - d_coarse) / 3.0

    multiplier = m0 / z
    scale = 1.0 - z * dm / m0
    fractions = scale * p.cs.kkt_gradient
    if fractions.min() < -1e-6:
        raise NumericalFault(
            "computed portfolio fractions are negative beyond tolerance"
        )
    return multiplier, fractions

"""Projection of the Sharpe ratio onto the no-short-selling cone.

Solves min_{p >= 0} |xi + sigma^{-1} p|^2, a small nonnegative least-squares
problem, by an active-set method, and carries an explicit KKT certificate so
that optimality can be re-verified after the fact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonConvergence
from .market import MarketModel, sharpe_ratio

KKT_TOL_DEFAULT = 1e-10


@dataclass(eq=False)
class ConstrainedSharpe:
    """Result of the cone projection.

    Attributes
    ----------
    xi : ndarray
        Unconstrained market price of risk.
    sigma_inv : ndarray
        Inverse volatility matrix used as the design matrix.
    pi_tilde_star : ndarray
        Nonnegative dual minimizer.
    xi_tilde : ndarray
        Modified price of risk xi + sigma_inv @ pi_tilde_star.
    kkt_gradient : ndarray
        sigma_inv.T @ xi_tilde; nonnegative at an optimum and zero on the
        coordinates where pi_tilde_star is strictly positive.
    objective : float
        |xi_tilde|^2, the minimized squared norm.
    """

    xi: np.ndarray
    sigma_inv: np.ndarray
    pi_tilde_star: np.ndarray
    xi_tilde: np.ndarray
    kkt_gradient: np.ndarray
    objective: float


def _ls_on_support(A: np.ndarray, b: np.ndarray, passive: np.ndarray) -> np.ndarray:
    """Unconstrained least squares restricted to the passive columns."""
    z = np.zeros(A.shape[1])
    if passive.any():
        sol, *_ = np.linalg.lstsq(A[:, passive], b, rcond=None)
        z[passive] = sol
    return z


def solve_cone(
    xi: np.ndarray,
    sigma_inv: np.ndarray,
    tol: float = KKT_TOL_DEFAULT,
    max_iter: int | None = None,
    start: np.ndarray | None = None,
) -> ConstrainedSharpe:
    """Minimize |xi + sigma_inv @ p|^2 over p >= 0 (active-set NNLS).

    Parameters
    ----------
    xi : (n,) array
        Market price of risk.
    sigma_inv : (n, n) array
        Inverse of a validated volatility matrix.
    tol : float
        KKT residual tolerance.
    max_iter : int, optional
        Iteration cap, default 100*n.
    start : (n,) array, optional
        Feasible warm-start point; only its support matters. The problem is
        strictly convex for invertible sigma, so every start converges to
        the same minimizer.
    """
    xi = np.asarray(xi, dtype=float)
    A = np.asarray(sigma_inv, dtype=float)
    n = xi.size
    if max_iter is None:
        max_iter = 100 * n
    b = -xi

    if start is None:
        x = np.zeros(n)
        passive = np.zeros(n, dtype=bool)
    else:
        x = np.maximum(np.asarray(start, dtype=float), 0.0)
        passive = x > 0.0

    iters = 0

    def feasibility_loop(x, passive):
        # Move from the feasible x toward the least-squares point on the
        # passive set, dropping coordinates that hit zero on the way.
        nonlocal iters
        z = _ls_on_support(A, b, passive)
        while passive.any() and z[passive].min() <= 0.0:
            iters += 1
            if iters > max_iter:
                raise NonConvergence("cone projection exceeded iteration cap")
            blocking = passive & (z <= 0.0)
            denom = x - z
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(denom > 0.0, x / denom, 0.0)
            steps = np.where(blocking, ratio, np.inf)
            step = min(steps.min(), 1.0)
            x = x + step * (z - x)
            x[x < 0.0] = 0.0
            passive = passive & (x > 0.0)
            z = _ls_on_support(A, b, passive)
        return np.maximum(z, 0.0), passive

    x, passive = feasibility_loop(x, passive)

    while True:
        iters += 1
        if iters > max_iter:
            raise NonConvergence("cone projection exceeded iteration cap")
        w = A.T @ (b - A @ x)  # negative gradient of the squared residual
        candidates = np.where(~passive, w, -np.inf)
        if candidates.max() <= tol:
            break
        passive[int(np.argmax(candidates))] = True
        x, passive = feasibility_loop(x, passive)

    xi_tilde = xi + A @ x
    gradient = A.T @ xi_tilde
    cs = ConstrainedSharpe(
        xi=xi,
        sigma_inv=A,
        pi_tilde_star=x,
        xi_tilde=xi_tilde,
        kkt_gradient=gradient,
        objective=float(xi_tilde @ xi_tilde),
    )
    if not verify_kkt(cs, tol):
        raise NonConvergence("cone projection terminated without a KKT certificate")
    return cs


def verify_kkt(c: ConstrainedSharpe, tol: float = KKT_TOL_DEFAULT) -> bool:
    """Re-verify primal feasibility, stationarity and complementary slackness.

    The gradient is recomputed from the stored xi_tilde so that a corrupted
    certificate cannot pass on stale fields.
    """
    g = c.sigma_inv.T @ c.xi_tilde
    if c.pi_tilde_star.min() < -tol:
        return False
    if g.min() < -tol:
        return False
    if np.abs(c.pi_tilde_star * g).max() > tol:
        return False
    return True


def constrained_sharpe(m: MarketModel, tol: float = KKT_TOL_DEFAULT) -> ConstrainedSharpe:
    """Validate the market, compute xi and project it onto the cone."""
    xi = sharpe_ratio(m)
    return solve_cone(xi, np.linalg.inv(m.sigma), tol=tol)

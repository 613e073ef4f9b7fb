"""Optimal evaluation-period length: condition gates and 1-d maximizers.

Three settings admit an optimal period length tau*:

* power utility, gamma = 1, on the scaled objective A*(tau)*tau, provided
  delta/2 < zeta(alpha) < delta;
* log utility on the plain value V(x; tau), provided gamma < 1 and
  (r + |xi_tilde|^2/2)/delta + log x < 0;
* log utility on the scaled value V(x; tau)*tau, always for gamma = 1 and
  under a sign gate for gamma < 1.

Searches use geometric bracket expansion followed by golden-section to a
relative tau tolerance of 1e-8, and every reported maximizer carries a local
certificate: the objective does not improve at tau* * (1 +/- 1e-3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .cone import ConstrainedSharpe
from .errors import NonConvergence, ParameterOutOfRange
from .logutil import solve_log, value_log
from .market import EvaluationSpec, MarketModel, zeta

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_REL_TOL = 1e-8
_EXPAND_CAP = 60
_CERT_SHIFT = 1e-3


@dataclass
class TauSearchResult:
    condition_holds: bool
    condition_detail: str
    tau_star: float | None
    objective_at_star: float
    objective_kind: str  # 'value' or 'scaled_value'


def _golden_max(f, lo: float, hi: float, rel_tol: float = _REL_TOL) -> tuple[float, float]:
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while (b - a) > rel_tol * (abs(a) + abs(b)) * 0.5:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
    x = 0.5 * (a + b)
    return x, f(x)


def _maximize(f, lo: float, hi: float) -> tuple[float, float]:
    """Expand a geometric grid until the best point is interior, then refine."""
    pts = [lo]
    while pts[-1] < hi:
        pts.append(min(pts[-1] * 2.0, hi))
    vals = [f(t) for t in pts]

    def argmax():
        return max(range(len(pts)), key=vals.__getitem__)

    for _ in range(_EXPAND_CAP):
        if argmax() != len(pts) - 1:
            break
        pts.append(pts[-1] * 2.0)
        vals.append(f(pts[-1]))
    for _ in range(_EXPAND_CAP):
        if argmax() != 0:
            break
        pts.insert(0, pts[0] / 2.0)
        vals.insert(0, f(pts[0]))
    i = argmax()
    if i == 0 or i == len(pts) - 1:
        raise NonConvergence("could not bracket an interior maximizer")
    tau_star, obj = _golden_max(f, pts[i - 1], pts[i + 1])
    _certify(f, tau_star, obj)
    return tau_star, obj


def _certify(f, tau_star: float, obj: float) -> None:
    slack = 1e-12 * (1.0 + abs(obj))
    for shifted in (tau_star * (1.0 - _CERT_SHIFT), tau_star * (1.0 + _CERT_SHIFT)):
        if f(shifted) > obj + slack:
            raise NonConvergence("local-max certificate failed at tau*")


def _capped_supremum(f, cap: float, points: int = 257) -> tuple[float, float]:
    """Grid supremum over (0, cap] used when no sufficient condition applies."""
    pts = [cap * (k + 1) / points for k in range(points)]
    vals = [f(t) for t in pts]
    i = max(range(points), key=vals.__getitem__)
    if 0 < i < points - 1:
        return _golden_max(f, pts[i - 1], pts[i + 1])
    return pts[i], vals[i]


def tau_power_scaled(
    m: MarketModel,
    alpha: float,
    delta: float,
    cs: ConstrainedSharpe,
    sup_cap: float | None = None,
) -> TauSearchResult:
    """Maximize the scaled power value A*(tau)*tau for gamma = 1.

    With gamma = 1 the fixed point is explicit and the scaled objective is
    g(tau) = exp((zeta(alpha)-delta)*tau) * tau / (1 - exp(-delta*tau)),
    with g(0+) = 1/delta. An interior maximizer exists when
    delta/2 < zeta(alpha) < delta.
    """
    if delta <= 0:
        raise ParameterOutOfRange("delta must be positive")
    za = zeta(alpha, m.r, cs.objective)
    holds = delta / 2.0 < za < delta
    detail = (
        f"requires delta/2 < zeta(alpha) < delta: delta/2={delta / 2.0:.6g}, "
        f"zeta(alpha)={za:.6g}, delta={delta:.6g}; g(0+) = 1/delta = {1.0 / delta:.6g}"
    )

    def g(tau: float) -> float:
        return math.exp((za - delta) * tau) * tau / (-math.expm1(-delta * tau))

    if holds:
        tau_star, obj = _maximize(g, 1e-4 / delta, 1.0 / delta)
        return TauSearchResult(True, detail, tau_star, obj, "scaled_value")
    if sup_cap is not None:
        tau_star, obj = _capped_supremum(g, sup_cap)
        return TauSearchResult(False, detail, tau_star, obj, "scaled_value")
    return TauSearchResult(False, detail, None, float("nan"), "scaled_value")


def tau_log_value(
    m: MarketModel,
    e_template: EvaluationSpec,
    cs: ConstrainedSharpe,
    x: float,
    sup_cap: float | None = None,
) -> TauSearchResult:
    """Maximize the log value V(x; tau) over tau for gamma in (0, 1).

    The sufficient condition is (r + |xi_tilde|^2/2)/delta + log x < 0, in
    which case V(x; 0+) = -inf and V(x; inf) = 0 force an interior positive
    maximum.
    """
    gamma, delta = e_template.gamma, e_template.delta
    if not 0 < gamma < 1:
        raise ParameterOutOfRange("the value objective requires gamma in (0, 1)")
    if x <= 0:
        raise ParameterOutOfRange("initial wealth x must be positive")
    mu_g = m.r + 0.5 * cs.objective
    gate = mu_g / delta + math.log(x)
    holds = gate < 0.0
    detail = (
        f"requires (r + |xi_tilde|^2/2)/delta + log x < 0: value={gate:.6g}"
    )

    def v(tau: float) -> float:
        return value_log(solve_log(m, EvaluationSpec(tau, gamma, delta), cs), x)

    if holds:
        tau_star, obj = _maximize(v, 1e-4 / delta, 1.0 / delta)
        return TauSearchResult(True, detail, tau_star, obj, "value")
    if sup_cap is not None:
        tau_star, obj = _capped_supremum(v, sup_cap)
        return TauSearchResult(False, detail, tau_star, obj, "value")
    return TauSearchResult(False, detail, None, float("nan"), "value")


def tau_log_scaled(
    m: MarketModel,
    e_template: EvaluationSpec,
    cs: ConstrainedSharpe,
    x: float,
    sup_cap: float | None = None,
) -> TauSearchResult:
    """Maximize the scaled log value V(x; tau)*tau over tau.

    For gamma = 1 an interior maximizer always exists; delta*tau* solves
    exp(u)*(2 - u) = 2, so tau* > 1/delta. For gamma < 1 the gate is
    (r + |xi_tilde|^2/2)*gamma/delta - (1-gamma)/2 * log x > 0.
    """
    gamma, delta = e_template.gamma, e_template.delta
    if x <= 0:
        raise ParameterOutOfRange("initial wealth x must be positive")
    mu_g = m.r + 0.5 * cs.objective

    def f(tau: float) -> float:
        return value_log(solve_log(m, EvaluationSpec(tau, gamma, delta), cs), x) * tau

    if gamma == 1.0:
        detail = "gamma = 1: an interior maximizer always exists"
        tau_star, obj = _maximize(f, 1e-4 / delta, 1.0 / delta)
        return TauSearchResult(True, detail, tau_star, obj, "scaled_value")

    gate = mu_g * gamma / delta - 0.5 * (1.0 - gamma) * math.log(x)
    holds = gate > 0.0
    detail = (
        "requires (r + |xi_tilde|^2/2)*gamma/delta - (1-gamma)/2*log x > 0: "
        f"value={gate:.6g}"
    )
    if holds:
        tau_star, obj = _maximize(f, 1e-4 / delta, 1.0 / delta)
        return TauSearchResult(True, detail, tau_star, obj, "scaled_value")
    if sup_cap is not None:
        tau_star, obj = _capped_supremum(f, sup_cap)
        return TauSearchResult(False, detail, tau_star, obj, "scaled_value")
    return TauSearchResult(False, detail, None, float("nan"), "scaled_value")

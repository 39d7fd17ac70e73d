"""Macroscopic reference results.

Retarded energy of a perfectly conducting nanoparticle at distance ``d``
from a half-space with static permittivity ``eps``:

    W = -(3 / 16 pi) int_1^inf dv [ (2/v^2 - 1/v^4) r_p(v) - r_s(v) / v^4 ]   hbar c rho^3 / d^4

    r_p = (eps v - w) / (eps v + w),  r_s = (v - w) / (v + w),  w = sqrt(eps - 1 + v^2)

Writing ``eps = (3 + 2x) / (3 - x)`` (Clausius-Mossotti) and expanding in
``x`` gives the many-body series; each order is evaluated at the close
packed value ``x = 3``.
"""
from __future__ import annotations

import math

import numpy as np

from .quadrature import QuadratureSpec, integrate_semi_infinite
from .results import EnergyResult, Scale

PREFACTOR = -3.0 / (16.0 * math.pi)
CLOSE_PACKED_X = 3.0
FD_STEPS = (1e-3, 1e-4)


def _spec(q):
    return q or QuadratureSpec(rel_tol=1e-11, max_subdivisions=5000)


def _check_eps(eps: float):
    if not (eps >= 1.0 or math.isinf(eps)):
        raise ValueError("epsilon must be >= 1")


def reflection_integrand(eps: float, v):
    """Bracket of the v-integral for a static permittivity ``eps`` (``eps - 1 < 0`` allowed for differencing)."""
    v = np.asarray(v, dtype=float)
    if math.isinf(eps):
        return 2.0 / v ** 2
    w = np.sqrt(eps - 1.0 + v * v)
    rp = (eps * v - w) / (eps * v + w)
    rs = (v - w) / (v + w)
    return (2.0 / v ** 2 - 1.0 / v ** 4) * rp - rs / v ** 4


def clausius_mossotti_eps(x: float) -> float:
    return (3.0 + 2.0 * x) / (3.0 - x)


def w_total(epsilon: float, q: QuadratureSpec | None = None, rho: float = 1.0, d: float = 1.0) -> EnergyResult:
    _check_eps(epsilon)
    scale = rho ** 3 / d ** 4
    if math.isinf(epsilon):
        # bracket collapses to 2 / v^2
        return EnergyResult(PREFACTOR * 2.0, Scale.HBAR_C_RHO3_OVER_D4, 0.0, scale, regime="exact")
    if epsilon == 1.0:
        return EnergyResult(0.0, Scale.HBAR_C_RHO3_OVER_D4, 0.0, scale, regime="exact")
    res = integrate_semi_infinite(lambda v: reflection_integrand(epsilon, v), _spec(q), lower=1.0)
    return EnergyResult(PREFACTOR * res.value, Scale.HBAR_C_RHO3_OVER_D4, abs(PREFACTOR) * res.error_estimate,
                        scale, regime="numeric", converged=res.converged)


def linearized_integrand(v):
    """First-order term of the bracket in ``delta = eps - 1``: ``(2v^4 - 2v^2 + 1) / (2 v^6)``."""
    v = np.asarray(v, dtype=float)
    return (2.0 * v ** 4 - 2.0 * v ** 2 + 1.0) / (2.0 * v ** 6)


def _fd_coefficient_integrand(order: int, h: float):
    """Pointwise central difference in x of the bracket, divided by ``order!``."""
    def integrand(v):
        e = lambda x: reflection_integrand(clausius_mossotti_eps(x), v)
        if order == 1:
            return (e(h) - e(-h)) / (2.0 * h)
        if order == 2:
            return (e(h) - 2.0 * e(0.0) + e(-h)) / (2.0 * h * h)
        if order == 3:
            return (e(2 * h) - 2.0 * e(h) + 2.0 * e(-h) - e(-2 * h)) / (12.0 * h ** 3)
        raise ValueError("order must be 1, 2 or 3")
    return integrand


def many_body_coefficient(order: int, q: QuadratureSpec | None = None, method: str = "finite-difference") -> EnergyResult:
    """Coefficient of ``x^order`` in the energy, times ``3^order``.

    ``method="finite-difference"`` differentiates the integrand pointwise with
    steps ``1e-3`` and ``1e-4`` and combines them by Richardson
    extrapolation (central differences have an ``h^2`` error).
    ``method="linearized"`` (order 1 only) uses the closed-form first-order
    integrand.  Order 3 is experimental.
    """
    q = _spec(q)
    if order not in (1, 2, 3):
        raise ValueError("order must be 1 or 2 (3 is experimental)")
    weight = PREFACTOR * CLOSE_PACKED_X ** order
    meta = {"order": order, "method": method}
    if method == "linearized":
        if order != 1:
            raise ValueError("the linearized oracle only exists for order 1")
        res = integrate_semi_infinite(linearized_integrand, q, lower=1.0)
        return EnergyResult(weight * res.value, Scale.HBAR_C_RHO3_OVER_D4, abs(weight) * res.error_estimate,
                            regime="series", converged=res.converged, metadata=meta)
    if method != "finite-difference":
        raise ValueError(f"unknown method {method!r}")

    h1, h2 = FD_STEPS
    # a difference quotient is only resolved to ~eps / h^order; asking more never converges
    floor = lambda h: q.with_(rel_tol=max(q.rel_tol, 10.0 * np.finfo(float).eps / h ** order))
    r1 = integrate_semi_infinite(_fd_coefficient_integrand(order, h1), floor(h1), lower=1.0)
    r2 = integrate_semi_infinite(_fd_coefficient_integrand(order, h2), floor(h2), lower=1.0)
    ratio2 = (h1 / h2) ** 2
    value = (ratio2 * r2.value - r1.value) / (ratio2 - 1.0)
    # step-size disagreement after extrapolation flags round-off or truncation trouble
    spread = abs(value - r2.value)
    quad_err = (ratio2 * r2.error_estimate + r1.error_estimate) / (ratio2 - 1.0)
    roundoff = 8.0 * np.finfo(float).eps / h2 ** order
    err = abs(weight) * (spread + quad_err + roundoff)
    meta.update({"steps": FD_STEPS, "step_spread": spread,
                 "unstable": spread > 1e-4 * abs(value)})
    return EnergyResult(weight * value, Scale.HBAR_C_RHO3_OVER_D4, err, regime="series",
                        converged=r1.converged and r2.converged and not meta["unstable"], metadata=meta)


def partial_sum_residual(q: QuadratureSpec | None = None) -> dict[str, float]:
    """How far the two- plus three-body terms fall short of the perfect-conductor total."""
    c1 = many_body_coefficient(1, q).coefficient
    c2 = many_body_coefficient(2, q).coefficient
    total = w_total(math.inf).coefficient
    return {"order1": c1, "order2": c2, "partial_sum": c1 + c2, "total": total,
            "residual": total - (c1 + c2), "fraction_captured": (c1 + c2) / total}


def casimir_ideal_per_area(d: float = 1.0) -> EnergyResult:
    """Ideal-conductor plate-plate energy per area, ``-(pi^2/720) hbar c / d^3``."""
    if not d > 0:
        raise ValueError("d must be > 0")
    return EnergyResult(-math.pi ** 2 / 720.0, Scale.HBAR_C_OVER_D3, 0.0, 1.0 / d ** 3, regime="exact")

"""Two perfectly conducting half-spaces separated by a gap ``d``.

Slab 1 fills ``z <= 0``, slab 2 fills ``z >= d``.  Per unit area:

* two-body: every particle of slab 1 against every particle of slab 2;
* three-body: only triplets split between the slabs (one particle on one
  side, two on the other) depend on ``d``.  Triplets inside a single slab
  are never enumerated.  The "two in slab 2" and "two in slab 1" families
  are mirror images, hence the factor 2, and each is the nanoparticle /
  half-space three-body energy summed over the lone particle's depth.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import RETARDED_C6
from .macroscopic import casimir_ideal_per_area
from .quadrature import QuadratureSpec, integrate_adaptive_nd, integrate_semi_infinite, semi_infinite_map
from .results import EnergyResult, Scale

W2_AREA_COEFF = -69.0 / (640.0 * math.pi ** 2)
W3_CP_EXACT = 111.0 / (448.0 * math.pi)


@dataclass(frozen=True)
class SlabConfig:
    d: float
    radius: float = 1.0

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError("gap d must be > 0")
        if not self.radius > 0:
            raise ValueError("radius must be > 0")

    @property
    def density(self) -> float:
        return 3.0 / (4.0 * math.pi * self.radius ** 3)


def w2_per_area(cfg: SlabConfig, mode: str = "analytic", q: QuadratureSpec | None = None) -> EnergyResult:
    """Pairwise energy per area.

    The numeric mode integrates over the two depths after doing the in-plane
    integral in closed form, ``int d^2x (x^2 + Z^2)^(-7/2) = 2 pi / (5 Z^5)``.
    """
    scale = 1.0 / cfg.d ** 3
    if mode == "analytic":
        return EnergyResult(W2_AREA_COEFF, Scale.HBAR_C_OVER_D3, 0.0, scale, regime="ret")
    if mode != "numeric":
        raise ValueError("mode must be 'analytic' or 'numeric'")
    q = q or QuadratureSpec(rel_tol=1e-8, max_subdivisions=20_000)
    d = cfg.d
    pref = -RETARDED_C6 * cfg.radius ** 6 * cfg.density ** 2 * 2.0 * math.pi / 5.0

    def integrand(p):
        depth1, j1 = semi_infinite_map(p[:, 0], 0.0, d, q.transform)  # z1 = -depth1
        z2, j2 = semi_infinite_map(p[:, 1], d, d, q.transform)
        val = pref * (z2 + depth1) ** -5 * j1 * j2
        return np.where(np.isfinite(val), val, 0.0)

    res = integrate_adaptive_nd(integrand, [0.0, 0.0], [1.0, 1.0], q)
    return EnergyResult(res.value / scale, Scale.HBAR_C_OVER_D3, res.error_estimate / scale, scale,
                        regime="ret", converged=res.converged, metadata={"evaluations": res.evaluations})


def w3_per_area(cfg: SlabConfig, q: QuadratureSpec | None = None, w3_cp: EnergyResult | float | None = None
                ) -> EnergyResult:
    """Three-body energy per area from the nanoparticle/half-space three-body coefficient.

    ``w3_cp`` is the coefficient ``C`` of ``hbar c rho^3 / z^4`` (an
    EnergyResult or a float); by default the exact ``111 / (448 pi)``.
    Computes ``2 int_d^inf N C rho^3 / z^4 dz``.
    """
    if w3_cp is None:
        coeff, coeff_err, source = W3_CP_EXACT, 0.0, "exact"
    elif isinstance(w3_cp, EnergyResult):
        coeff, coeff_err, source = w3_cp.coefficient, w3_cp.error_estimate, "supplied"
    else:
        coeff, coeff_err, source = float(w3_cp), 0.0, "supplied"
    q = q or QuadratureSpec(rel_tol=1e-12)
    N, rho3 = cfg.density, cfg.radius ** 3
    res = integrate_semi_infinite(lambda z: 2.0 * N * rho3 * z ** -4.0, q, lower=cfg.d, scale=cfg.d)
    scale = 1.0 / cfg.d ** 3
    geom = res.value / scale  # = 1 / (2 pi) for any d and rho
    err = abs(coeff) * res.error_estimate / scale + coeff_err * geom
    return EnergyResult(coeff * geom, Scale.HBAR_C_OVER_D3, err, scale, regime="ret",
                        converged=res.converged, metadata={"w3_cp_coefficient": coeff, "source": source})


def pairwise_fraction(cfg: SlabConfig) -> float:
    """Share of the ideal Casimir energy recovered by pairwise summation."""
    return w2_per_area(cfg).value / casimir_ideal_per_area(cfg.d).value


def partial_sum_fraction(cfg: SlabConfig, w3: EnergyResult | None = None) -> float:
    """``(W2 + W3) / W_ideal``; negative because the three-body term overshoots."""
    w3 = w3 or w3_per_area(cfg)
    return (w2_per_area(cfg).value + w3.value) / casimir_ideal_per_area(cfg.d).value


def three_to_two_ratio(cfg: SlabConfig, w3: EnergyResult | None = None) -> float:
    w3 = w3 or w3_per_area(cfg)
    return abs(w3.value) / abs(w2_per_area(cfg).value)
